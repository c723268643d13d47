#include "corm/quad.hpp"
#include "corm/errors.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <cstddef>

namespace corm::quad {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Convergent: return "convergent";
        case Verdict::Divergent: return "divergent";
        default: return "inconclusive";
    }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7/15 kernel
// ---------------------------------------------------------------------------

// Abscissae and weights on [-1,1]; Gauss-7 weight 0 marks Kronrod-only nodes.
constexpr std::array<std::array<double, 3>, 8> kGK15 = {{
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
}};

struct PieceResult {
    double value = 0.0;
    double err = 0.0;
    bool overflow = false;
};

double eval_node(const Fn& f, double x) {
    const double y = f(x);
    if (std::isnan(y))
        throw EvaluationFailure("integrand returned NaN at x = " + std::to_string(x));
    return y;
}

// Single GK15 evaluation; err is |K15 - G7|.
PieceResult gk15(const Fn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    const double y0 = eval_node(f, c);
    double g7 = kGK15[0][1] * y0;
    double k15 = kGK15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kGK15[i][0];
        const double yi = eval_node(f, c + dx) + eval_node(f, c - dx);
        g7 += kGK15[i][1] * yi;
        k15 += kGK15[i][2] * yi;
    }
    g7 *= h;
    k15 *= h;

    PieceResult r;
    r.value = k15;
    r.err = std::abs(k15 - g7);
    r.overflow = !std::isfinite(k15);
    return r;
}

// Adaptive bisection over one finite piece.
PieceResult integrate_piece(const Fn& f, double a, double b, double abs_tol,
                            double rel_tol, int max_intervals) {
    struct Seg { double a, b; };
    std::vector<Seg> stack{{a, b}};
    const double width = b - a;

    PieceResult total;
    int used = 0;
    while (!stack.empty()) {
        const Seg s = stack.back();
        stack.pop_back();
        const PieceResult r = gk15(f, s.a, s.b);
        ++used;
        if (r.overflow) {
            total.value = r.value;
            total.overflow = true;
            total.err = kInf;
            return total;
        }
        const double local_tol =
            std::max(abs_tol * (s.b - s.a) / width, rel_tol * std::abs(r.value));
        if (r.err <= local_tol || (s.b - s.a) < 64.0 * DBL_EPSILON * std::abs(s.a) ||
            used >= max_intervals) {
            total.value += r.value;
            total.err += r.err;
            continue;
        }
        const double mid = 0.5 * (s.a + s.b);
        stack.push_back({s.a, mid});
        stack.push_back({mid, s.b});
    }
    return total;
}

// ---------------------------------------------------------------------------
// Endpoint exponent fits
// ---------------------------------------------------------------------------

double slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw DegenerateGrid("exponent fit: degenerate abscissae");
    return sxy / sxx;
}

double exponent_fit(const Fn& f, double endpoint, bool from_above,
                    const ExponentWindow& w) {
    if (w.n_points < 3)
        throw DegenerateGrid("exponent window needs at least 3 points");
    std::vector<double> xs, ys;
    xs.reserve(w.n_points);
    ys.reserve(w.n_points);
    const bool at_inf = std::isinf(endpoint);
    for (int i = 0; i < w.n_points; ++i) {
        double t, x;
        if (at_inf) {
            t = std::ldexp(1.0 / w.coarse_scale, i); // z = coarse^-1 * 2^i
            x = t;
        } else {
            t = std::ldexp(w.coarse_scale, -i);
            x = from_above ? endpoint + t : endpoint - t;
        }
        const double y = f(x);
        if (!std::isfinite(y) || y <= 0.0)
            throw NonPositiveSamples(
                "exponent fit: nonpositive or non-finite sample at x = " +
                std::to_string(x));
        xs.push_back(std::log(t));
        ys.push_back(std::log(y));
    }
    return slope_fit(xs, ys);
}

// ---------------------------------------------------------------------------
// Dyadic truncation ladders
// ---------------------------------------------------------------------------

enum class SideStatus { Converged, Divergent, Inconclusive };

struct SideResult {
    SideStatus status = SideStatus::Inconclusive;
    double value = 0.0;
    double err = 0.0;
    LadderEvidence evidence;
};

struct SideSpec {
    // rung k, k = 0..max_rungs-1; rungs march toward the endpoint
    std::function<std::pair<double, double>(int)> rung;
    double endpoint = 0.0;
    bool finite_endpoint = true;
    bool from_above = true; // approach direction for finite endpoints
};

// Exponent consistent with divergence: local power p <= -1 at a finite
// endpoint, p >= -1 at infinity (boundary margin 0.02 either way).
bool divergence_consistent(double p, bool finite_endpoint) {
    if (std::isnan(p)) return false;
    return finite_endpoint ? (p <= -1.0 + 0.02) : (p >= -1.0 - 0.02);
}

double try_exponent(const Fn& f, const SideSpec& side, const QuadConfig& cfg) {
    ExponentWindow w{cfg.exponent_points, cfg.exponent_coarse_scale};
    try {
        return exponent_fit(f, side.endpoint, side.from_above, w);
    } catch (const Error&) {
        // Retry on a shallower window; steep integrands can overflow the
        // deep one while still being classifiable.
        ExponentWindow shallow{8, 1.0 / 64.0};
        try {
            return exponent_fit(f, side.endpoint, side.from_above, shallow);
        } catch (const Error&) {
            return kNaN;
        }
    }
}

SideResult run_ladder(const Fn& f, const SideSpec& side, double outside_scale,
                      double tol_share, const QuadConfig& cfg) {
    SideResult out;
    out.evidence.endpoint = side.endpoint;

    std::vector<double> increments;
    double sum = 0.0, piece_err = 0.0;
    const double piece_rel = 0.05 * cfg.rel_tol;
    const double piece_abs = cfg.abs_tol / 64.0;

    auto decide_growth = [&](bool threshold_hit) {
        out.evidence.unbounded_growth = true;
        out.evidence.exponent = try_exponent(f, side, cfg);
        (void)threshold_hit;
        out.status = divergence_consistent(out.evidence.exponent, side.finite_endpoint)
                         ? SideStatus::Divergent
                         : SideStatus::Inconclusive;
    };

    for (int k = 0; k < cfg.max_rungs; ++k) {
        const auto [a, b] = side.rung(k);
        const PieceResult piece =
            integrate_piece(f, a, b, piece_abs, piece_rel, cfg.max_intervals);
        if (piece.overflow) {
            increments.push_back(piece.value);
            out.evidence.partial_sums.push_back(kInf);
            decide_growth(true);
            return out;
        }
        increments.push_back(piece.value);
        sum += piece.value;
        piece_err += piece.err;
        out.evidence.partial_sums.push_back(sum);

        const double scale = std::max(std::abs(sum), outside_scale);
        const double tol_here =
            tol_share * std::max(cfg.abs_tol, cfg.rel_tol * scale);
        const std::size_t n = increments.size();
        const double t_k = increments[n - 1];

        // Vanished tail (support ended, or decay below underflow).
        if (n >= 2 && t_k == 0.0 && increments[n - 2] == 0.0) {
            out.status = SideStatus::Converged;
            out.value = sum;
            out.err = piece_err;
            return out;
        }

        // Fast decay: two consecutive tiny increments, still shrinking.
        if (n >= 3 && std::abs(t_k) <= 0.25 * tol_here &&
            std::abs(increments[n - 2]) <= 0.25 * tol_here &&
            std::abs(t_k) <= 0.6 * std::abs(increments[n - 3])) {
            out.status = SideStatus::Converged;
            out.value = sum;
            out.err = piece_err + 4.0 * std::abs(t_k);
            return out;
        }

        if (n >= 6) {
            bool same_sign = true;
            for (std::size_t i = n - 5; i < n; ++i)
                if (increments[i] * increments[n - 1] <= 0.0) same_sign = false;

            if (same_sign) {
                std::array<double, 4> ratios{};
                bool ratios_ok = true;
                for (int i = 0; i < 4; ++i) {
                    const double denom = increments[n - 2 - i];
                    if (denom == 0.0) { ratios_ok = false; break; }
                    ratios[i] = increments[n - 1 - i] / denom;
                }
                if (ratios_ok) {
                    const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
                    std::array<double, 4> sorted = ratios;
                    std::sort(sorted.begin(), sorted.end());
                    const double rhat = 0.5 * (sorted[1] + sorted[2]);
                    const double spread = *mx - *mn;

                    // Geometric tail extrapolation.
                    if (rhat > 0.0 && rhat <= 0.995 && *mx < 1.0) {
                        const double remainder = t_k * rhat / (1.0 - rhat);
                        const double err_r =
                            std::abs(remainder) *
                                std::min(1.0, 2.5 * spread / (1.0 - rhat)) +
                            piece_err;
                        if (err_r <= tol_here) {
                            out.status = SideStatus::Converged;
                            out.value = sum + remainder;
                            out.err = err_r;
                            return out;
                        }
                    }

                    // Non-decaying increments: the truncated integrals grow
                    // without bound.
                    if (k >= 10 && *mn >= 0.999 && spread <= 0.2 * rhat) {
                        decide_growth(false);
                        return out;
                    }
                }
            }
        }

        if (std::abs(sum) > cfg.divergence_threshold) {
            decide_growth(true);
            return out;
        }
    }

    // Ladder exhausted without a decision.
    out.status = SideStatus::Inconclusive;
    out.value = sum;
    out.err = kInf;
    out.evidence.exponent = try_exponent(f, side, cfg);
    return out;
}

} // namespace

double estimate_endpoint_exponent(const Fn& f, double endpoint, bool from_above,
                                  const ExponentWindow& w) {
    return exponent_fit(f, endpoint, from_above, w);
}

IntegralResult integrate(const Fn& f, const Domain& dom, const QuadConfig& cfg) {
    if (!(dom.lo < dom.hi) || std::isinf(dom.lo))
        throw Error("integrate: invalid domain");

    IntegralResult res;
    double total = 0.0, total_err = 0.0;

    std::vector<SideSpec> ladders;
    std::vector<std::pair<double, double>> regular; // plain GK segments

    if (std::isfinite(dom.hi)) {
        const double mid = dom.lo + 0.5 * (dom.hi - dom.lo);
        if (dom.lo_singular) {
            const double delta = mid - dom.lo;
            SideSpec s;
            s.rung = [lo = dom.lo, delta](int k) {
                return std::make_pair(lo + std::ldexp(delta, -k - 1),
                                      lo + std::ldexp(delta, -k));
            };
            s.endpoint = dom.lo;
            s.finite_endpoint = true;
            s.from_above = true;
            ladders.push_back(std::move(s));
        } else {
            regular.emplace_back(dom.lo, mid);
        }
        if (dom.hi_singular) {
            const double delta = dom.hi - mid;
            SideSpec s;
            s.rung = [hi = dom.hi, delta](int k) {
                return std::make_pair(hi - std::ldexp(delta, -k),
                                      hi - std::ldexp(delta, -k - 1));
            };
            s.endpoint = dom.hi;
            s.finite_endpoint = true;
            s.from_above = false;
            ladders.push_back(std::move(s));
        } else {
            regular.emplace_back(mid, dom.hi);
        }
    } else {
        const double anchor = std::max(dom.lo, 1.0);
        if (dom.lo < anchor) {
            if (dom.lo_singular) {
                const double delta = anchor - dom.lo;
                SideSpec s;
                s.rung = [lo = dom.lo, delta](int k) {
                    return std::make_pair(lo + std::ldexp(delta, -k - 1),
                                          lo + std::ldexp(delta, -k));
                };
                s.endpoint = dom.lo;
                s.finite_endpoint = true;
                s.from_above = true;
                ladders.push_back(std::move(s));
            } else {
                regular.emplace_back(dom.lo, anchor);
            }
        }
        SideSpec s; // ladder toward +inf, rungs [anchor*2^k, anchor*2^(k+1)]
        s.rung = [anchor](int k) {
            return std::make_pair(std::ldexp(anchor, k), std::ldexp(anchor, k + 1));
        };
        s.endpoint = kInf;
        s.finite_endpoint = false;
        ladders.push_back(std::move(s));
    }

    const double piece_rel = 0.05 * cfg.rel_tol;
    const double piece_abs = cfg.abs_tol / 64.0;
    for (const auto& [a, b] : regular) {
        const PieceResult r =
            integrate_piece(f, a, b, piece_abs, piece_rel, cfg.max_intervals);
        if (r.overflow) {
            res.verdict = Verdict::Inconclusive;
            res.error_estimate = kInf;
            return res;
        }
        total += r.value;
        total_err += r.err;
    }

    bool any_inconclusive = false;
    LadderEvidence inconclusive_evidence;
    for (const auto& side : ladders) {
        const SideResult sr = run_ladder(f, side, std::abs(total), 0.35, cfg);
        if (sr.status == SideStatus::Divergent) {
            res.verdict = Verdict::Divergent;
            res.value = 0.0;
            res.error_estimate = kInf;
            res.evidence = sr.evidence;
            return res;
        }
        if (sr.status == SideStatus::Inconclusive) {
            any_inconclusive = true;
            inconclusive_evidence = sr.evidence;
            continue;
        }
        total += sr.value;
        total_err += sr.err;
    }

    if (any_inconclusive) {
        res.verdict = Verdict::Inconclusive;
        res.value = total;
        res.error_estimate = kInf;
        res.evidence = inconclusive_evidence;
        return res;
    }

    res.value = total;
    res.error_estimate = total_err;
    if (total_err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
        res.verdict = Verdict::Convergent;
    } else {
        res.verdict = Verdict::Inconclusive;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Richardson-extrapolated central differences (Ridders' scheme)
// ---------------------------------------------------------------------------

namespace {

struct Stencil {
    int halfwidth;
    std::array<double, 7> coeff; // offsets -3..3
};

// Minimal central stencils for d^m/ds^m, error O(h^2).
const std::array<Stencil, 6> kStencils = {{
    {1, {0, 0, -0.5, 0.0, 0.5, 0, 0}},
    {1, {0, 0, 1.0, -2.0, 1.0, 0, 0}},
    {2, {0, -0.5, 1.0, 0.0, -1.0, 0.5, 0}},
    {2, {0, 1.0, -4.0, 6.0, -4.0, 1.0, 0}},
    {3, {-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5}},
    {3, {1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0}},
}};

double apply_stencil(const Fn& f, double s, double h, int order) {
    const Stencil& st = kStencils[order - 1];
    double acc = 0.0;
    for (int off = -st.halfwidth; off <= st.halfwidth; ++off) {
        const double c = st.coeff[off + 3];
        if (c == 0.0) continue;
        const double y = f(s + off * h);
        if (!std::isfinite(y))
            throw EvaluationFailure("derivative: non-finite sample");
        acc += c * y;
    }
    return acc / std::pow(h, order);
}

} // namespace

double derivative(const Fn& f, double s, int order, double target_rel,
                  double* err_out) {
    if (order < 0 || order > 6)
        throw Error("derivative: order must be in [0, 6]");
    if (order == 0) {
        if (err_out) *err_out = 0.0;
        return f(s);
    }

    const int W = kStencils[order - 1].halfwidth;
    double h = std::min(0.25 * std::max(std::abs(s), 1.0), 0.6 * std::abs(s) / W);
    if (!(h > 0.0) || h < 1e4 * DBL_EPSILON * std::max(std::abs(s), 1.0))
        throw StepUnderflow("derivative: no usable step at s = " + std::to_string(s));

    constexpr int kTab = 12;
    constexpr double kCon = 1.4, kCon2 = kCon * kCon;
    double tab[kTab][kTab];
    tab[0][0] = apply_stencil(f, s, h, order);
    double ans = tab[0][0];
    double err_best = kInf;

    for (int i = 1; i < kTab; ++i) {
        h /= kCon;
        tab[i][0] = apply_stencil(f, s, h, order);
        double fac = kCon2;
        for (int j = 1; j <= i; ++j) {
            tab[i][j] = (tab[i][j - 1] * fac - tab[i - 1][j - 1]) / (fac - 1.0);
            fac *= kCon2;
            const double errt = std::max(std::abs(tab[i][j] - tab[i][j - 1]),
                                         std::abs(tab[i][j] - tab[i - 1][j - 1]));
            if (errt <= err_best) {
                err_best = errt;
                ans = tab[i][j];
            }
        }
        if (i >= 4 && std::abs(tab[i][i] - tab[i - 1][i - 1]) >= 4.0 * err_best)
            break; // extrapolation has hit the noise floor
    }

    if (err_out) *err_out = err_best;
    if (err_best > std::max(target_rel * std::abs(ans), 1e-14))
        throw NoisePlateau("derivative: error estimate " + std::to_string(err_best) +
                           " exceeds target at s = " + std::to_string(s));
    return ans;
}

} // namespace corm::quad
