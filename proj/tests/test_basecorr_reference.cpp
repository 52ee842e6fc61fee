#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"

#include <entropic/basecorr_reference.hpp>
#include <entropic/errors.hpp>

#include <boost/math/distributions/binomial.hpp>

#include <numeric>

using namespace entropic;

namespace {

ReferencePool homogeneous(int n, double p, double recovery = 0.4) {
    return ReferencePool{std::vector<double>(n, p), std::vector<double>(n, (1.0 - recovery) / n)};
}

} // namespace

TEST_CASE("near-zero correlation gives the binomial law") {
    const ReferencePool pool = homogeneous(10, 0.05);
    const LossDist d = one_factor_loss_dist(pool, 1e-10);
    REQUIRE(d.pmf.size() == 11);
    const boost::math::binomial_distribution<double> bin(10, 0.05);
    for (int k = 0; k <= 10; ++k)
        CHECK(std::abs(d.pmf[k] - boost::math::pdf(bin, k)) < 1e-8);
    CHECK(d.unit == doctest::Approx(0.06));
}

TEST_CASE("one-factor pool law") {
    const ReferencePool pool = homogeneous(20, 0.08);
    for (double beta : {0.1, 0.4, 0.8}) {
        const LossDist d = one_factor_loss_dist(pool, beta);
        CHECK(std::accumulate(d.pmf.begin(), d.pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(d.mean() == doctest::Approx(0.6 * 0.08).epsilon(1e-6));
        // Strikes beyond the maximum loss see the whole mean.
        CHECK(base_tranche_el(d, 0.7) == doctest::Approx(d.mean() / 0.7).epsilon(1e-13));
    }
    const LossDist safe = one_factor_loss_dist(homogeneous(5, 0.0), 0.3);
    CHECK(safe.pmf[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(base_tranche_el(safe, 0.03) == 0.0);
    CHECK_THROWS_AS(one_factor_loss_dist(pool, 0.0), Error);
    CHECK_THROWS_AS(one_factor_loss_dist(pool, 1.0), Error);
    CHECK_THROWS_AS(base_tranche_el(safe, 0.0), Error);
}

TEST_CASE("equity base-tranche EL falls with correlation") {
    const ReferencePool pool = homogeneous(50, 0.05);
    double prev = 1.0;
    for (double beta : {0.05, 0.2, 0.4, 0.6, 0.9}) {
        const double el = base_tranche_el(pool, 0.03, beta);
        CHECK(el < prev);
        prev = el;
    }
}

TEST_CASE("implied base correlation round trip") {
    const ReferencePool pool = homogeneous(40, 0.06);
    for (double k : {0.03, 0.07})
        for (double beta : {0.15, 0.3, 0.55}) {
            const double target = base_tranche_el(pool, k, beta);
            CHECK(std::abs(implied_base_correlation(pool, k, target) - beta) < 1e-6);
        }
    try {
        implied_base_correlation(pool, 0.03, 2.0);
        FAIL("expected a no-solution error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_solution);
    }
}

TEST_CASE("tranche EL from base tranches") {
    const ReferencePool pool = homogeneous(30, 0.05);
    const double flat = basecorr_tranche_el(pool, 0.03, 0.07, 0.3, 0.3);
    const LossDist d = one_factor_loss_dist(pool, 0.3);
    CHECK(flat == doctest::Approx(d.expected_tranche_loss(0.03, 0.07) / 0.04).epsilon(1e-12));
    CHECK(basecorr_tranche_el(pool, 0.0, 0.03, 0.2, 0.2) == doctest::Approx(base_tranche_el(pool, 0.03, 0.2)));
}

TEST_CASE("base correlation curve") {
    const BaseCorrCurve curve({0.03, 0.07, 0.1, 0.15, 0.3}, {0.2, 0.3, 0.35, 0.45, 0.6}, 5.0);
    CHECK(curve(0.01) == 0.2);
    CHECK(curve(0.5) == 0.6);
    CHECK(curve(0.07) == doctest::Approx(0.3).epsilon(1e-14));
    double prev = 0.0;
    for (double k = 0.0; k <= 0.35; k += 0.001) {
        const double b = curve(k);
        CHECK(b >= prev - 1e-15);
        CHECK(b >= 0.2);
        CHECK(b <= 0.6);
        prev = b;
    }
    const BaseCorrCurve single({0.05}, {0.25});
    CHECK(single(0.01) == 0.25);
    CHECK(single(0.5) == 0.25);
    CHECK_THROWS_AS(BaseCorrCurve({0.03, 0.02}, {0.2, 0.3}), Error);
    CHECK_THROWS_AS(BaseCorrCurve({0.03}, {1.2}), Error);
}

TEST_CASE("strike mapping rules") {
    const BaseCorrCurve curve({0.01, 0.03, 0.07}, {0.15, 0.25, 0.4});
    const StrikeMapping abs = map_strike(MappingRule::absolute, 0.03, 0.06, 0.04, curve);
    CHECK(abs.index_strike == 0.03);
    CHECK(abs.beta == doctest::Approx(0.25).epsilon(1e-14));
    const StrikeMapping atm = map_strike(MappingRule::atm, 0.03, 0.06, 0.04, curve);
    CHECK(atm.index_strike == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(atm.beta == doctest::Approx(curve(0.02)).epsilon(1e-14));
    CHECK_THROWS_AS(map_strike(MappingRule::atm, 0.03, 0.0, 0.04, curve), Error);
    CHECK_THROWS_AS(map_strike(MappingRule::probability_matching, 0.03, 0.06, 0.04, curve), Error);
    CHECK(parse_mapping_rule(mapping_rule_name(MappingRule::probability_matching)) ==
          MappingRule::probability_matching);
    CHECK_THROWS_AS(parse_mapping_rule("tranchelet"), Error);
}

TEST_CASE("probability matching reaches a fixed point") {
    const ReferencePool index = homogeneous(60, 0.04);
    const ReferencePool bespoke = homogeneous(40, 0.07);
    const LawAtCorrelation index_law = [&](double b) { return one_factor_loss_dist(index, b); };
    const LawAtCorrelation bespoke_law = [&](double b) { return one_factor_loss_dist(bespoke, b); };
    const BaseCorrCurve curve({0.03, 0.07, 0.1, 0.15}, {0.2, 0.3, 0.36, 0.45});
    for (double kb : {0.03, 0.07, 0.1}) {
        const StrikeMapping m = map_strike(MappingRule::probability_matching, kb, 0.0, 0.0, curve, index_law,
                                           bespoke_law);
        CHECK(m.iterations >= 1);
        CHECK(m.iterations <= 100);
        // The returned strike reproduces itself under one more matching step.
        const double b = curve(m.index_strike);
        const double again = loss_quantile(index_law(b), loss_cdf(bespoke_law(b), kb));
        CHECK(std::abs(again - m.index_strike) < 1e-7);
        CHECK(std::abs(m.matching_error) < 1e-8);
        // Riskier bespoke maps to a lower index strike.
        CHECK(m.index_strike < kb);
    }
}

TEST_CASE("piecewise-linear loss CDF and quantile") {
    const LossDist d{{0.2, 0.5, 0.3}, 0.1, 1.0};
    CHECK(loss_cdf(d, -0.1) == 0.0);
    CHECK(loss_cdf(d, 0.0) == doctest::Approx(0.2));
    CHECK(loss_cdf(d, 0.05) == doctest::Approx(0.45));
    CHECK(loss_cdf(d, 0.2) == doctest::Approx(1.0));
    for (double p : {0.2, 0.3, 0.7, 0.95})
        CHECK(loss_cdf(d, loss_quantile(d, p)) == doctest::Approx(p).epsilon(1e-14));
    CHECK_THROWS_AS(loss_quantile(d, 0.1), Error);
}

TEST_CASE("skew partials") {
    SUBCASE("flat skew") {
        const BaseCorrCurve flat({0.5, 1.0, 2.0}, {0.3, 0.3, 0.3});
        const SkewPartials p = skew_partials(flat, 0.03, 0.04);
        CHECK(p.d_strike == 0.0);
        CHECK(p.d_expected_loss == 0.0);
    }
    SUBCASE("linear skew") {
        const BaseCorrCurve linear({0.0, 1.0, 2.0, 3.0}, {0.1, 0.15, 0.2, 0.25});
        const SkewPartials p = skew_partials(linear, 0.06, 0.04);
        CHECK(p.d_strike == doctest::Approx(0.05 / 0.04).epsilon(1e-6));
        CHECK(p.d_expected_loss == doctest::Approx(-1.5 * 0.05 / 0.04).epsilon(1e-6));
    }
    SUBCASE("rising skew lowers beta as expected loss grows") {
        const BaseCorrCurve rising({0.5, 1.0, 2.0, 4.0}, {0.15, 0.2, 0.3, 0.5});
        for (double k : {0.02, 0.05, 0.1}) {
            const SkewPartials p = skew_partials(rising, k, 0.04);
            CHECK(p.d_strike >= 0.0);
            CHECK(p.d_expected_loss <= 0.0);
            // Homogeneity of degree zero in (K, L).
            CHECK(std::abs(k * p.d_strike + 0.04 * p.d_expected_loss) < 1e-12);
        }
    }
    CHECK_THROWS_AS(skew_partials(BaseCorrCurve({1.0}, {0.3}), 0.03, 0.0), Error);
}

TEST_CASE("reference pool from a portfolio") {
    const PortfolioSet set = fixtures::toy_set({{2, 3}}, 51);
    const ReferencePool pool = reference_pool(set.indices[0], 0);
    CHECK(pool.default_probs.size() == 5);
    CHECK(std::accumulate(pool.loss_fractions.begin(), pool.loss_fractions.end(), 0.0) ==
          doctest::Approx(0.6).epsilon(1e-14));
    const ReferencePool rel = reference_pool(set.indices[0].bucket_names(Bucket::relevant), 0);
    CHECK(rel.loss_fractions[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK_THROWS_AS(reference_pool(set.indices[0], 3), Error);
}
