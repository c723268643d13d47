#include "corm/spec_io.hpp"
#include "corm/errors.hpp"
#include "corm/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace corm::io {

using nlohmann::ordered_json;

namespace {

int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

double require_number(const ordered_json& obj, const char* key,
                      const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw SpecParseError(where + ": missing numeric field '" + key + "'");
    return obj[key].get<double>();
}

MarginalScore parse_marginal(const ordered_json& m, int index) {
    const std::string where = "score marginal " + std::to_string(index);
    if (!m.is_object() || !m.contains("family") || !m["family"].is_string())
        throw SpecParseError(where + ": needs a 'family' string");
    const std::string family = m["family"].get<std::string>();
    if (family == "gamma")
        return MarginalScore::gamma(require_number(m, "shape", where),
                                    require_number(m, "rate", where));
    if (family == "beta")
        return MarginalScore::beta(require_number(m, "alpha", where),
                                   require_number(m, "beta", where));
    if (family == "exponential") return MarginalScore::exponential();
    throw UnsupportedFamily(where + ": unknown score family '" + family + "'");
}

DirectingMeasure parse_directing(const ordered_json& d) {
    if (!d.is_object() || !d.contains("family") || !d["family"].is_string())
        throw SpecParseError("directing: needs a 'family' string");
    const std::string family = d["family"].get<std::string>();
    if (family == "sigma_stable")
        return build_directing_measure(DirectingFamily::SigmaStable,
                                       require_number(d, "sigma", "directing"));
    if (family == "sigma_stable_normalized")
        return build_directing_measure(DirectingFamily::SigmaStableNormalized,
                                       require_number(d, "sigma", "directing"));
    if (family == "gamma_process")
        return build_directing_measure(DirectingFamily::GammaProcess);
    if (family == "finite_exponential")
        return build_directing_measure(DirectingFamily::FiniteExponential);
    throw UnsupportedFamily("directing: unknown family '" + family + "'");
}

} // namespace

CormSpec parse_spec_json(const std::string& text) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecParseError(std::string("spec file is not valid JSON: ") + e.what(),
                             line_of_byte(text, e.byte));
    }
    if (!root.is_object())
        throw SpecParseError("spec file must contain a JSON object");
    if (!root.contains("score"))
        throw SpecParseError("spec file needs a 'score' block");
    if (!root.contains("directing"))
        throw SpecParseError("spec file needs a 'directing' block");

    std::vector<MarginalScore> marginals;
    const ordered_json& score = root["score"];
    if (score.is_array()) {
        int idx = 0;
        for (const auto& m : score) marginals.push_back(parse_marginal(m, idx++));
    } else if (score.is_object()) {
        marginals.push_back(parse_marginal(score, 0));
    } else {
        throw SpecParseError("'score' must be an object or an array of objects");
    }

    if (root.contains("dimension")) {
        if (!root["dimension"].is_number_integer())
            throw SpecParseError("'dimension' must be an integer");
        const int d = root["dimension"].get<int>();
        if (d != static_cast<int>(marginals.size()))
            throw SpecParseError("'dimension' (" + std::to_string(d) +
                                 ") does not match the number of score marginals (" +
                                 std::to_string(marginals.size()) + ")");
    }

    BaseMeasure base;
    if (root.contains("base")) {
        const ordered_json& b = root["base"];
        if (!b.is_object()) throw SpecParseError("'base' must be an object");
        if (b.contains("mass")) base.total_mass = require_number(b, "mass", "base");
        if (b.contains("window")) {
            const auto& w = b["window"];
            if (!w.is_array() || w.size() != 2 || !w[0].is_number() ||
                !w[1].is_number())
                throw SpecParseError("base 'window' must be [lo, hi]");
            base.window_lo = w[0].get<double>();
            base.window_hi = w[1].get<double>();
        }
    }

    return make_corm_spec(build_score_model(std::move(marginals)),
                          parse_directing(root["directing"]), base);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CormSpec load_spec_file(const std::string& path) {
    return parse_spec_json(read_file(path));
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + tmp);
        out << contents;
        if (!out) throw Error("short write: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string current_utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string manifest_json(const RunManifest& m) {
    ordered_json j;
    j["command"] = m.command;
    j["spec_path"] = m.spec_path;
    j["spec_hash_fnv1a64"] = m.spec_hash;
    j["tool_version"] = m.tool_version.empty() ? kToolVersion : m.tool_version;
    j["seed"] = m.seed;
    j["quad"] = {{"rel_tol", m.quad.rel_tol},
                 {"abs_tol", m.quad.abs_tol},
                 {"divergence_threshold", m.quad.divergence_threshold},
                 {"max_rungs", m.quad.max_rungs}};
    j["timestamp"] = m.timestamp;
    return j.dump(2) + "\n";
}

namespace {

ordered_json integral_json(const quad::IntegralResult& r) {
    ordered_json j;
    j["verdict"] = quad::to_string(r.verdict);
    j["value"] = r.value;
    j["error_estimate"] = r.error_estimate;
    if (!std::isnan(r.evidence.exponent))
        j["endpoint_exponent"] = r.evidence.exponent;
    if (!r.evidence.partial_sums.empty()) {
        j["unbounded_growth"] = r.evidence.unbounded_growth;
        const auto& ps = r.evidence.partial_sums;
        const std::size_t keep = std::min<std::size_t>(ps.size(), 12);
        j["truncation_tail"] =
            std::vector<double>(ps.end() - keep, ps.end());
    }
    return j;
}

ordered_json probe_json(const integrability::LimitProbe& p) {
    ordered_json j;
    j["status"] = integrability::to_string(p.status);
    j["limit_estimate"] = p.limit_estimate;
    return j;
}

} // namespace

std::string verdict_report_json(const CormSpec& spec,
                                const integrability::CormVerdict& verdict) {
    ordered_json j;
    j["dimension"] = spec.d;
    j["directing"] = spec.directing.label;
    j["base_mass"] = spec.base.total_mass;
    j["multivariate"] = integrability::to_string(verdict.multivariate);
    j["marginals"] = ordered_json::array();
    for (const auto& mv : verdict.marginals) {
        ordered_json m;
        m["j"] = mv.j;
        m["score"] = spec.score.marginals[mv.j].label;
        m["overall"] = integrability::to_string(mv.overall);
        m["tail_mass"] = integral_json(mv.tail_mass);
        m["small_weight_mean"] = integral_json(mv.small_weight_mean);
        m["density_tail_limit"] = probe_json(mv.density_tail_limit);
        m["density_origin_limit"] = probe_json(mv.density_origin_limit);
        if (mv.closed_form.has_value())
            m["closed_form"] = integrability::to_string(*mv.closed_form);
        j["marginals"].push_back(std::move(m));
    }
    if (verdict.direct.has_value()) {
        const auto& dc = *verdict.direct;
        ordered_json d;
        d["integral"] = integral_json(dc.integral);
        d["marginal_min_integrals"] = dc.marginal_min_integrals;
        d["bound"] = dc.bound;
        d["within_bound"] = dc.within_bound;
        j["direct_check"] = std::move(d);
    }
    return j.dump(2) + "\n";
}

std::string tail_table_csv(const std::vector<TailTableRow>& rows) {
    std::string out = "y,U_star,U_j,ratio\n";
    for (const auto& r : rows) {
        out += format_double(r.y) + "," + format_double(r.u_star) + "," +
               format_double(r.u_j) + "," + format_double(r.ratio) + "\n";
    }
    return out;
}

std::string index_transfer_json(const tails::IndexTransferReport& report) {
    ordered_json j;
    j["index_hat"] = report.diagnostic.index_hat;
    j["index_expected"] = report.sigma_expected;
    j["index_match"] = report.index_match;
    j["slope_residual"] = report.diagnostic.slope_residual;
    j["regularly_varying"] = report.diagnostic.regularly_varying;
    j["factor_estimate"] = report.factor_estimate;
    if (report.factor_expected > 0.0)
        j["factor_expected"] = report.factor_expected;
    j["ratio_table"] = ordered_json::array();
    for (const auto& e : report.diagnostic.ratio_table)
        j["ratio_table"].push_back(
            {{"a", e.a}, {"t", e.t}, {"ratio", e.ratio}});
    return j.dump(2) + "\n";
}

std::string derivative_report_csv(const expcorm::DerivativeReport& report) {
    std::string out = "d,s_vec,direct,derivative,rel_dev\n";
    for (const auto& p : report.points) {
        std::string svec;
        for (std::size_t i = 0; i < p.s.size(); ++i) {
            if (i) svec += ";";
            svec += format_double(p.s[i]);
        }
        out += std::to_string(p.d) + "," + svec + "," +
               format_double(p.direct_val) + "," + format_double(p.deriv_val) +
               "," + format_double(p.rel_dev) + "\n";
    }
    return out;
}

std::string draw_csv(const sim::CormDraw& draw) {
    std::string out = "atom_index,location,z";
    for (int j = 1; j <= draw.d; ++j) out += ",m_" + std::to_string(j);
    for (int j = 1; j <= draw.d; ++j) out += ",s_" + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < draw.atoms.size(); ++i) {
        const auto& a = draw.atoms[i];
        out += std::to_string(i) + "," + format_double(a.location) + "," +
               format_double(a.jump);
        for (double m : a.scores) out += "," + format_double(m);
        for (double w : a.weights) out += "," + format_double(w);
        out += "\n";
    }
    return out;
}

std::string sim_report_csv(const sim::SimReport& report) {
    std::string out = "y,mean_count,theoretical,std_error,standardized,truncation_ok\n";
    for (const auto& r : report.rows) {
        out += format_double(r.y) + "," + format_double(r.mean_count) + "," +
               format_double(r.theoretical) + "," + format_double(r.std_error) +
               "," + format_double(r.standardized) + "," +
               (r.truncation_ok ? "1" : "0") + "\n";
    }
    return out;
}

} // namespace corm::io
