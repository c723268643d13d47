#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corm/core.hpp"
#include "corm/errors.hpp"
#include "corm/quad.hpp"
#include "corm/rng.hpp"

#include <cmath>

using namespace corm;

TEST_CASE("gamma(1,1) marginal is the unit exponential") {
    const auto m = MarginalScore::gamma(1.0, 1.0);
    CHECK(m.density(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(m.density(0.3) == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));
    CHECK(m.cdf(1.0) == doctest::Approx(0.6321205588285577).epsilon(1e-12));
    CHECK(m.survival(2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("beta(1,1) marginal is uniform on (0,1)") {
    const auto m = MarginalScore::beta(1.0, 1.0);
    CHECK(m.density(0.2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.density(0.9) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.density(1.5) == 0.0);
    CHECK(m.cdf(0.3) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("fractional moments: closed forms against quadrature") {
    // gamma(0.5, 2), sigma = 0.3: Gamma(0.8) / (Gamma(0.5) 2^0.3)
    const auto g = MarginalScore::gamma(0.5, 2.0);
    const double expected_g = 0.533524962807576810411030556588;
    CHECK(fractional_moment(g, 0.3) == doctest::Approx(expected_g).epsilon(1e-12));
    const auto quad_g = quad::integrate(
        [&g](double s) { return std::pow(s, 0.3) * g.density(s); },
        quad::Domain::positive_axis());
    REQUIRE(quad_g.verdict == quad::Verdict::Convergent);
    CHECK(quad_g.value == doctest::Approx(expected_g).epsilon(1e-8));

    // exponential, sigma = 0.5: Gamma(1.5) = sqrt(pi)/2
    const auto e = MarginalScore::exponential();
    const double expected_e = 0.886226925452758013649083741671;
    CHECK(fractional_moment(e, 0.5) == doctest::Approx(expected_e).epsilon(1e-12));
    const auto quad_e = quad::integrate(
        [&e](double s) { return std::sqrt(s) * e.density(s); },
        quad::Domain::positive_axis());
    CHECK(quad_e.value == doctest::Approx(expected_e).epsilon(1e-8));

    // beta(2,3), sigma = 0.5: B(2.5,3)/B(2,3) = 64/105
    const auto b = MarginalScore::beta(2.0, 3.0);
    const double expected_b = 0.609523809523809523809523809524;
    CHECK(fractional_moment(b, 0.5) == doctest::Approx(expected_b).epsilon(1e-12));
    const auto quad_b = quad::integrate(
        [&b](double s) { return std::sqrt(s) * b.density(s); },
        quad::Domain::unit());
    CHECK(quad_b.value == doctest::Approx(expected_b).epsilon(1e-8));

    // zeroth moment is exactly 1 for every family
    CHECK(fractional_moment(g, 0.0) == 1.0);
    CHECK(fractional_moment(e, 0.0) == 1.0);
    CHECK(fractional_moment(b, 0.0) == 1.0);
}

TEST_CASE("score constructors validate parameters") {
    CHECK_THROWS_AS(MarginalScore::gamma(-1.0, 1.0), NonPositiveParameter);
    CHECK_THROWS_AS(MarginalScore::gamma(1.0, 0.0), NonPositiveParameter);
    CHECK_THROWS_AS(MarginalScore::beta(0.0, 2.0), NonPositiveParameter);
    CHECK_THROWS_AS(fractional_moment(MarginalScore::exponential(), 1.5),
                    InvalidIndex);
}

TEST_CASE("build_score_model rejects a broken custom density") {
    auto half = MarginalScore::custom(
        [](double s) { return (s > 0.0 && s < 1.0) ? 0.5 : 0.0; },
        [](double s) { return std::clamp(0.5 * s, 0.0, 0.5); });
    CHECK_THROWS_AS(build_score_model({half}), IntegrabilityFailure);
}

TEST_CASE("directing measures: tails, inverses, integrability") {
    const auto ssn = build_directing_measure(DirectingFamily::SigmaStableNormalized, 0.5);
    CHECK(ssn.tail(1.0) == doctest::Approx(0.564189583547756286948079451561).epsilon(1e-12));
    CHECK(*ssn.rv_index == 0.5);

    const auto fe = build_directing_measure(DirectingFamily::FiniteExponential);
    CHECK(fe.tail(0.0) == 1.0);
    CHECK(fe.inverse_tail(2.0) == 0.0); // beyond the total mass -> no jump

    const auto gp = build_directing_measure(DirectingFamily::GammaProcess);
    // int min(1,z) z^-1 e^-z dz = (1 - e^-1) + E1(1)
    const auto eq1 = quad::integrate(
        [&gp](double z) { return std::min(1.0, z) * gp.density(z); },
        quad::Domain::positive_axis());
    REQUIRE(eq1.verdict == quad::Verdict::Convergent);
    CHECK(eq1.value == doctest::Approx(0.851504493224077952081640005299).epsilon(1e-9));

    CHECK_THROWS_AS(build_directing_measure(DirectingFamily::SigmaStable, 1.2),
                    InvalidIndex);
    CHECK_THROWS_AS(build_directing_measure(DirectingFamily::SigmaStable, 0.0),
                    InvalidIndex);
    CHECK_THROWS_AS(build_directing_measure(DirectingFamily::Custom),
                    UnsupportedFamily);
}

TEST_CASE("custom directing measures that violate integrability are rejected") {
    DirectingMeasure bad;
    bad.label = "z^-2.2";
    bad.density = [](double z) { return z <= 0.0 ? 0.0 : std::pow(z, -2.2); };
    bad.tail = [](double y) { return std::pow(y, -1.2) / 1.2; };
    bad.inverse_tail = [](double t) { return std::pow(1.2 * t, -1.0 / 1.2); };
    CHECK_THROWS_AS(validate_directing_measure(bad), IntegrabilityFailure);
}

TEST_CASE("tail monotonicity and inverse identity on a grid") {
    for (auto fam : {DirectingFamily::SigmaStable, DirectingFamily::SigmaStableNormalized,
                     DirectingFamily::GammaProcess, DirectingFamily::FiniteExponential}) {
        const auto m = build_directing_measure(fam, 0.4);
        CAPTURE(m.label);
        double prev = std::numeric_limits<double>::infinity();
        for (double y = 1e-6; y <= 32.0; y *= 2.0) {
            const double u = m.tail(y);
            CHECK(u <= prev + 1e-15);
            prev = u;
            if (u > 0.0 && std::isfinite(u))
                CHECK(m.tail(m.inverse_tail(u)) == doctest::Approx(u).epsilon(1e-8));
        }
        CHECK(m.tail(1e9) <= 1e-3);
    }
}

TEST_CASE("change of variable keeps rescaled densities normalized") {
    const auto marginals = {MarginalScore::gamma(2.0, 1.5), MarginalScore::beta(2.0, 2.0),
                            MarginalScore::exponential()};
    for (const auto& m : marginals) {
        for (double z : {0.25, 1.0, 4.0}) {
            const auto r = quad::integrate(
                [&m, z](double s) { return m.density(s / z) / z; },
                quad::Domain::positive_axis());
            CAPTURE(m.label);
            CAPTURE(z);
            REQUIRE(r.verdict == quad::Verdict::Convergent);
            CHECK(r.value == doctest::Approx(1.0).epsilon(1e-7));
        }
    }
}

TEST_CASE("joint density is the product of marginals") {
    const auto model = build_score_model(
        {MarginalScore::gamma(2.0, 1.0), MarginalScore::beta(2.0, 2.0)});
    const double s[] = {0.7, 0.4};
    CHECK(model.joint_density(s) ==
          model.marginals[0].density(0.7) * model.marginals[1].density(0.4));
    CHECK(model.all_exponential() == false);
    CHECK(build_score_model({MarginalScore::exponential()}).all_exponential());
}

TEST_CASE("samplers emit strictly positive values") {
    rng::Stream st(123);
    const auto model = build_score_model({MarginalScore::gamma(0.3, 2.0),
                                          MarginalScore::beta(0.4, 0.7),
                                          MarginalScore::exponential()});
    for (int i = 0; i < 20000; ++i)
        for (const auto& m : model.marginals) REQUIRE(m.sampler(st) > 0.0);
}

TEST_CASE("quantile inverts the cdf") {
    const auto g = MarginalScore::gamma(2.0, 1.0);
    for (double p : {0.1, 0.5, 0.99}) {
        const double q = g.quantile(p);
        CHECK(g.cdf(q) == doctest::Approx(p).epsilon(1e-9));
    }
    const auto b = MarginalScore::beta(2.0, 5.0);
    CHECK(b.cdf(b.quantile(0.7)) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("spec assembly validates the base measure") {
    auto model = build_score_model({MarginalScore::exponential()});
    auto dir = build_directing_measure(DirectingFamily::FiniteExponential);
    CHECK_THROWS_AS(make_corm_spec(model, dir, BaseMeasure{-1.0, 0.0, 1.0}),
                    NonPositiveParameter);
    CHECK_THROWS_AS(make_corm_spec(model, dir, BaseMeasure{1.0, 2.0, 1.0}), Error);
    const auto spec = make_corm_spec(model, dir, BaseMeasure{2.0, 0.0, 3.0});
    CHECK(spec.d == 1);
}
