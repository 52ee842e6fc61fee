#pragma once

#include <entropic/loss_engine.hpp>
#include <entropic/portfolio.hpp>

#include <boost/math/interpolators/cubic_hermite.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace entropic {

/// Base correlation by strike with monotone cubic (Fritsch-Carlson)
/// interpolation and flat extrapolation. The same class serves a skew
/// expressed in moneyness K / L.
class BaseCorrCurve {
  public:
    BaseCorrCurve(std::vector<double> strikes, std::vector<double> betas, double horizon = 0.0);

    double operator()(double k) const;
    double horizon() const { return horizon_; }
    std::span<const double> strikes() const { return strikes_; }
    std::span<const double> betas() const { return betas_; }

  private:
    std::vector<double> strikes_;
    std::vector<double> betas_;
    double horizon_ = 0.0;
    std::optional<boost::math::interpolators::cubic_hermite<std::vector<double>>> spline_;
};

/// Homogeneous-factor reference pool: per-name default probability at one
/// horizon and loss given default as a fraction of pool notional.
struct ReferencePool {
    std::vector<double> default_probs;
    std::vector<double> loss_fractions;
};

ReferencePool reference_pool(const std::vector<const NameSpec*>& names, std::size_t horizon_index);
ReferencePool reference_pool(const IndexPortfolio& portfolio, std::size_t horizon_index);

/// Pool loss law in the one-factor Gaussian copula with loading sqrt(beta).
LossDist one_factor_loss_dist(const ReferencePool& pool, double beta, int quadrature_points = 40);

/// E[min(X, K)] / K.
double base_tranche_el(const LossDist& dist, double k);
double base_tranche_el(const ReferencePool& pool, double k, double beta, int quadrature_points = 40);

/// Width-normalised EL of [k_low, k_high] from base tranches priced at their
/// own base correlations.
double basecorr_tranche_el(const ReferencePool& pool, double k_low, double k_high, double beta_low,
                           double beta_high, int quadrature_points = 40);

/// Flat correlation that reproduces a base-tranche EL.
double implied_base_correlation(const ReferencePool& pool, double k, double target_base_el,
                                int quadrature_points = 40);

enum class MappingRule { absolute, atm, probability_matching };

const char* mapping_rule_name(MappingRule rule) noexcept;
MappingRule parse_mapping_rule(const std::string& text);

struct MappingOptions {
    double damping = 0.5;
    double tolerance = 1e-8;
    int max_iterations = 100;
};

struct StrikeMapping {
    double index_strike = 0.0;
    double beta = 0.0;
    int iterations = 0;
    /// Pr(L_i <= K_i) - Pr(L_b <= K_b) at the returned strike.
    double matching_error = 0.0;
};

/// Loss law of a pool as a function of its flat correlation.
using LawAtCorrelation = std::function<LossDist(double beta)>;

/// Index strike equivalent to the bespoke strike `k_bespoke`. Only
/// probability matching uses the loss laws; ATM needs both ELs.
StrikeMapping map_strike(MappingRule rule, double k_bespoke, double bespoke_el, double index_el,
                         const BaseCorrCurve& index_curve, const LawAtCorrelation& index_law = {},
                         const LawAtCorrelation& bespoke_law = {}, const MappingOptions& options = {});

/// Piecewise-linear CDF of a lattice loss law and its inverse.
double loss_cdf(const LossDist& dist, double x);
double loss_quantile(const LossDist& dist, double probability);

struct SkewPartials {
    double d_strike = 0.0;
    double d_expected_loss = 0.0;
};

/// Partials of beta(K / L) for a skew given in moneyness.
SkewPartials skew_partials(const BaseCorrCurve& moneyness_curve, double k, double expected_loss);

} // namespace entropic
