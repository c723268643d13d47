#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corm/core.hpp"
#include "corm/errors.hpp"
#include "corm/integrability.hpp"

#include <cmath>
#include <vector>

using namespace corm;
using namespace corm::integrability;

namespace {

const BaseMeasure kUnitBase{1.0, 0.0, 1.0};

// Test-local Simpson oracle on (0,1) with the substitution s = t^k to absorb
// an algebraic singularity at 0; independent of corm::quad.
double simpson_unit_power_sub(const std::function<double(double)>& f, int k,
                              int n = 40000) {
    auto g = [&f, k](double t) {
        return t == 0.0 ? 0.0 : f(std::pow(t, k)) * k * std::pow(t, k - 1);
    };
    const double h = 1.0 / n;
    double acc = g(0.0) + g(1.0);
    for (int i = 1; i < n; ++i) acc += g(i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Simpson on [1, hi] (exponentially decaying integrands).
double simpson_upper(const std::function<double(double)>& f, double hi,
                     int n = 40000) {
    const double h = (hi - 1.0) / n;
    double acc = f(1.0) + f(hi);
    for (int i = 1; i < n; ++i) acc += f(1.0 + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

TEST_CASE("gamma x stable verdicts match the closed-form rule") {
    const auto stable04 = build_directing_measure(DirectingFamily::SigmaStable, 0.4);
    const auto stable05 = build_directing_measure(DirectingFamily::SigmaStable, 0.5);
    const auto stable06 = build_directing_measure(DirectingFamily::SigmaStable, 0.6);

    // alpha + sigma = 0.7 < 1: the small-weight condition fails
    const auto bad = check_marginal(0, MarginalScore::gamma(0.3, 1.0), stable04,
                                    kUnitBase);
    CHECK(bad.overall == Overall::IllPosed);
    CHECK(bad.small_weight_mean.verdict == quad::Verdict::Divergent);
    CHECK(bad.tail_mass.verdict == quad::Verdict::Convergent);
    REQUIRE(bad.closed_form.has_value());
    CHECK(*bad.closed_form == ClosedFormVerdict::IllPosed);

    const auto good = check_marginal(0, MarginalScore::gamma(1.0, 1.0), stable05,
                                     kUnitBase);
    CHECK(good.overall == Overall::WellPosed);

    const auto good2 = check_marginal(0, MarginalScore::gamma(1.5, 2.0), stable06,
                                      kUnitBase);
    CHECK(good2.overall == Overall::WellPosed);
}

TEST_CASE("tail-mass value for gamma(1,1) x stable(0.5)") {
    // After swapping the order of integration the tail-mass integral equals
    // int_1^inf e^-s (s^0.5 - 1) ds = 0.139402792640331 (30-digit quadrature).
    const auto stable = build_directing_measure(DirectingFamily::SigmaStable, 0.5);
    const auto r = check_tail_mass(MarginalScore::gamma(1.0, 1.0), stable, kUnitBase);
    REQUIRE(r.verdict == quad::Verdict::Convergent);
    CHECK(r.value == doctest::Approx(0.139402792640330988249616305539).epsilon(1e-8));

    // cross-check with the independent Simpson oracle on the swapped form
    const double oracle = simpson_upper(
        [](double s) { return std::exp(-s) * (std::sqrt(s) - 1.0); }, 60.0);
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("beta scores never contribute tail mass under stable directing") {
    const auto stable = build_directing_measure(DirectingFamily::SigmaStable, 0.5);
    const auto r = check_tail_mass(MarginalScore::beta(0.4, 2.0), stable, kUnitBase);
    REQUIRE(r.verdict == quad::Verdict::Convergent);
    CHECK(r.value == 0.0);
}

TEST_CASE("beta x stable small-weight condition") {
    const auto stable03 = build_directing_measure(DirectingFamily::SigmaStable, 0.3);
    const auto bad = check_small_weight_mean(MarginalScore::beta(0.2, 1.0),
                                             stable03, kUnitBase);
    CHECK(bad.verdict == quad::Verdict::Divergent); // alpha + sigma = 0.5

    // alpha + sigma = 1.1: convergent, and the value matches the swapped form
    //   sigma/(1-sigma) * int_0^1 h(s) (s^(sigma-1) - 1) ds
    const double alpha = 0.5, beta = 2.0, sigma = 0.6;
    const auto stable06 = build_directing_measure(DirectingFamily::SigmaStable, sigma);
    const auto score = MarginalScore::beta(alpha, beta);
    const auto r = check_small_weight_mean(score, stable06, kUnitBase);
    REQUIRE(r.verdict == quad::Verdict::Convergent);

    const double oracle =
        sigma / (1.0 - sigma) *
        simpson_unit_power_sub(
            [&score, sigma](double s) {
                return score.density(s) * (std::pow(s, sigma - 1.0) - 1.0);
            },
            20);
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-5));
}

TEST_CASE("exponential score under every directing family") {
    const auto score = MarginalScore::exponential();
    for (auto fam : {DirectingFamily::SigmaStable, DirectingFamily::SigmaStableNormalized,
                     DirectingFamily::GammaProcess, DirectingFamily::FiniteExponential}) {
        const auto directing = build_directing_measure(fam, 0.5);
        CAPTURE(directing.label);
        const auto v = check_marginal(0, score, directing, kUnitBase);
        CHECK(v.overall == Overall::WellPosed);
    }

    // value check for the finite-exponential pairing: the tail-mass integrand
    // is exp(-1/z) e^-z on (0,1)
    const auto fe = build_directing_measure(DirectingFamily::FiniteExponential);
    const auto r = check_tail_mass(score, fe, kUnitBase);
    REQUIRE(r.verdict == quad::Verdict::Convergent);
    double acc = 0.0; // plain Simpson; integrand is smooth and tiny near 0
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        const double z = static_cast<double>(i) / n;
        const double v = z == 0.0 ? 0.0 : std::exp(-1.0 / z) * std::exp(-z);
        acc += v * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    acc /= 3.0 * n;
    CHECK(r.value == doctest::Approx(acc).epsilon(1e-7));
}

TEST_CASE("density limit probes") {
    // h(1/z)/z^2 -> 0 for gamma and beta densities
    CHECK(check_density_tail_limit(MarginalScore::gamma(0.3, 1.0)).status ==
          LimitStatus::Holds);
    CHECK(check_density_tail_limit(MarginalScore::beta(0.5, 2.0)).status ==
          LimitStatus::Holds);

    // power tail s^-3: the ratio decays like z
    auto heavy = MarginalScore::custom(
        [](double s) { return s > 1.0 ? 2.0 * std::pow(s, -3.0) : 0.0; },
        [](double s) { return s > 1.0 ? 1.0 - std::pow(s, -2.0) : 0.0; });
    const auto probe = check_density_tail_limit(heavy);
    CHECK(probe.status == LimitStatus::Holds);
    CHECK(probe.limit_estimate == 0.0);

    // boundary case: density with tail exactly s^-2 has limit 1
    auto boundary = MarginalScore::custom(
        [](double s) { return s > 1.0 ? std::pow(s, -2.0) : 0.0; },
        [](double s) { return s > 1.0 ? 1.0 - 1.0 / s : 0.0; });
    CHECK(check_density_tail_limit(boundary).status == LimitStatus::Inconclusive);

    // origin probe: bounded iff the density does not blow up at 0
    CHECK(check_density_origin_limit(MarginalScore::gamma(2.0, 1.0)).status ==
          LimitStatus::Holds);
    const auto diverging = check_density_origin_limit(MarginalScore::gamma(0.5, 1.0));
    CHECK(diverging.status == LimitStatus::Fails);
    CHECK(std::isinf(diverging.limit_estimate));
    const auto uniform = check_density_origin_limit(MarginalScore::beta(1.0, 1.0));
    CHECK(uniform.status == LimitStatus::Holds);
    CHECK(uniform.limit_estimate == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("closed-form verdict boundaries") {
    CHECK(stable_closed_form_verdict(ScoreFamily::Gamma, 0.3, 0.4) ==
          ClosedFormVerdict::IllPosed);
    CHECK(stable_closed_form_verdict(ScoreFamily::Beta, 0.7, 0.3) ==
          ClosedFormVerdict::Boundary);
    CHECK(stable_closed_form_verdict(ScoreFamily::Gamma, 2.0, 0.5) ==
          ClosedFormVerdict::WellPosed);
    CHECK_THROWS_AS(stable_closed_form_verdict(ScoreFamily::Custom, 1.0, 0.5),
                    UnsupportedFamily);
    CHECK_THROWS_AS(stable_closed_form_verdict(ScoreFamily::Gamma, 1.0, 1.5),
                    InvalidIndex);
}

TEST_CASE("well-posedness is decided by the two integral checks") {
    // structural iff, probed over a mixed battery
    struct Case { MarginalScore score; DirectingFamily fam; double sigma; };
    const std::vector<Case> battery = {
        {MarginalScore::gamma(0.3, 1.0), DirectingFamily::SigmaStable, 0.4},
        {MarginalScore::gamma(1.2, 0.7), DirectingFamily::SigmaStable, 0.5},
        {MarginalScore::beta(0.2, 1.0), DirectingFamily::SigmaStableNormalized, 0.3},
        {MarginalScore::beta(2.0, 2.0), DirectingFamily::GammaProcess, 0.0},
        {MarginalScore::exponential(), DirectingFamily::FiniteExponential, 0.0},
    };
    for (const auto& c : battery) {
        const auto directing = build_directing_measure(c.fam, c.sigma);
        const auto v = check_marginal(0, c.score, directing, kUnitBase);
        const bool both = v.tail_mass.convergent() && v.small_weight_mean.convergent();
        CHECK((v.overall == Overall::WellPosed) == both);
        const bool either_div =
            v.tail_mass.divergent() || v.small_weight_mean.divergent();
        CHECK((v.overall == Overall::IllPosed) == either_div);
    }
}

TEST_CASE("density probes holding implies well-posed under every family") {
    const std::vector<MarginalScore> scores = {
        MarginalScore::gamma(1.0, 1.0), MarginalScore::gamma(2.0, 0.5),
        MarginalScore::beta(1.0, 1.0), MarginalScore::beta(2.0, 2.0),
        MarginalScore::exponential()};
    for (const auto& s : scores) {
        REQUIRE(check_density_tail_limit(s).status == LimitStatus::Holds);
        REQUIRE(check_density_origin_limit(s).status == LimitStatus::Holds);
        for (auto fam : {DirectingFamily::SigmaStable,
                         DirectingFamily::SigmaStableNormalized,
                         DirectingFamily::GammaProcess,
                         DirectingFamily::FiniteExponential}) {
            const auto directing = build_directing_measure(fam, 0.45);
            CAPTURE(s.label);
            CAPTURE(directing.label);
            CHECK(check_marginal(0, s, directing, kUnitBase).overall ==
                  Overall::WellPosed);
        }
    }
}

TEST_CASE("verdicts ignore the base mass, values scale with it") {
    const auto stable = build_directing_measure(DirectingFamily::SigmaStable, 0.5);
    const auto score = MarginalScore::gamma(1.0, 1.0);
    const auto a = check_tail_mass(score, stable, BaseMeasure{1.0, 0.0, 1.0});
    const auto b = check_tail_mass(score, stable, BaseMeasure{7.5, 0.0, 1.0});
    REQUIRE(a.verdict == quad::Verdict::Convergent);
    REQUIRE(b.verdict == quad::Verdict::Convergent);
    CHECK(b.value == doctest::Approx(7.5 * a.value).epsilon(1e-9));

    const auto bad = MarginalScore::gamma(0.3, 1.0);
    CHECK(check_small_weight_mean(bad, stable, BaseMeasure{0.1, 0.0, 1.0}).verdict ==
          quad::Verdict::Divergent);
}

TEST_CASE("vector verdict reduces to the marginals") {
    const auto stable = build_directing_measure(DirectingFamily::SigmaStable, 0.5);

    auto spec2 = make_corm_spec(
        build_score_model({MarginalScore::gamma(1.0, 1.0), MarginalScore::gamma(1.0, 1.0)}),
        stable, kUnitBase);
    CHECK(check_corm(spec2).multivariate == Overall::WellPosed);

    auto stable03 = build_directing_measure(DirectingFamily::SigmaStable, 0.3);
    auto mixed = make_corm_spec(
        build_score_model({MarginalScore::gamma(0.2, 1.0), MarginalScore::gamma(2.0, 1.0)}),
        stable03, kUnitBase);
    CHECK(check_corm(mixed).multivariate == Overall::IllPosed);

    auto spec1 = make_corm_spec(build_score_model({MarginalScore::gamma(1.5, 1.0)}),
                                stable, kUnitBase);
    const auto v1 = check_corm(spec1);
    REQUIRE(v1.marginals.size() == 1);
    CHECK(v1.multivariate == v1.marginals[0].overall);
}

TEST_CASE("direct bivariate probe stays within the norm bound") {
    auto spec = make_corm_spec(
        build_score_model({MarginalScore::exponential(), MarginalScore::exponential()}),
        build_directing_measure(DirectingFamily::SigmaStable, 0.5), kUnitBase);
    CheckOptions opts;
    opts.direct_check = true;
    const auto v = check_corm(spec, opts);
    REQUIRE(v.multivariate == Overall::WellPosed);
    REQUIRE(v.direct.has_value());
    CHECK(v.direct->integral.verdict == quad::Verdict::Convergent);
    CHECK(v.direct->within_bound);
    CHECK(v.direct->integral.value <= v.direct->bound * 1.01);
    CHECK(v.direct->integral.value > 0.0);
    REQUIRE(v.direct->marginal_min_integrals.size() == 2);
    // identical marginals: identical min-weight integrals
    CHECK(v.direct->marginal_min_integrals[0] ==
          doctest::Approx(v.direct->marginal_min_integrals[1]).epsilon(1e-6));
}
