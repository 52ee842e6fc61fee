#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace entropic {

/// Correlation structure of the two market factors. `rho` is the correlation
/// between the factors, `alpha` the loading on the foreign factor expressed as
/// a proportion of the domestic loading.
struct FactorParams {
    double rho = 0.0;
    double alpha = 0.0;

    /// 1 + 2*alpha*rho + alpha^2, the variance of the combined systematic term
    /// per unit of domestic loading.
    double systematic_scale() const { return 1.0 + 2.0 * alpha * rho + alpha * alpha; }

    void validate() const;
};

enum class Bucket { relevant, complement };

const char* bucket_name(Bucket bucket) noexcept;
Bucket parse_bucket(const std::string& text);

struct NameSpec {
    std::string id;
    int index_id = 1;
    Bucket bucket = Bucket::relevant;
    /// Cumulative risk-neutral default probability at each horizon.
    std::vector<double> default_prob_curve;
    double recovery = 0.4;
    double notional_weight = 0.0;
    double one_factor_loading = 0.0;

    double loss_given_default() const { return (1.0 - recovery) * notional_weight; }

    void validate() const;
};

struct TwoFactorLoadings {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double idio = 1.0;
};

TwoFactorLoadings derive_two_factor_loadings(double one_factor_loading, const FactorParams& params,
                                             int home_index);

/// Same as above, reporting the name's id when the loadings are not admissible.
TwoFactorLoadings derive_two_factor_loadings(const NameSpec& name, const FactorParams& params);

/// Asset correlation of two names implied by their two-factor loadings.
double pairwise_correlation(const TwoFactorLoadings& a, const TwoFactorLoadings& b,
                            const FactorParams& params);

struct FactorNode {
    double z1 = 0.0;
    double z2 = 0.0;
};

/// Product grid of Gauss-Hermite abscissae for the two market factors, with
/// weights g_m reflecting the factor correlation. Nodes are stored row-major:
/// m = m1 * size2() + m2.
class MarketFactorGrid {
  public:
    MarketFactorGrid() = default;
    MarketFactorGrid(std::vector<double> nodes1, std::vector<double> nodes2,
                     std::vector<double> weights);

    std::size_t size() const { return weights_.size(); }
    std::size_t size1() const { return nodes1_.size(); }
    std::size_t size2() const { return nodes2_.size(); }

    FactorNode node(std::size_t m) const {
        return {nodes1_[m / nodes2_.size()], nodes2_[m % nodes2_.size()]};
    }
    std::size_t flat_index(std::size_t m1, std::size_t m2) const { return m1 * nodes2_.size() + m2; }

    std::span<const double> nodes1() const { return nodes1_; }
    std::span<const double> nodes2() const { return nodes2_; }
    std::span<const double> weights() const { return weights_; }

    std::vector<double> marginal1() const;
    std::vector<double> marginal2() const;

  private:
    std::vector<double> nodes1_;
    std::vector<double> nodes2_;
    std::vector<double> weights_;
};

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for a standard normal variable (weights sum to one).
QuadratureRule gauss_hermite_rule(int n);

MarketFactorGrid build_market_grid(int n1, int n2, const FactorParams& params);

/// P(default by the horizon | factor node) in the two-factor Gaussian copula.
double conditional_default_prob(double unconditional_prob, const TwoFactorLoadings& loadings,
                                FactorNode node);

double conditional_default_prob(const NameSpec& name, const TwoFactorLoadings& loadings,
                                FactorNode node, std::size_t horizon_index);

} // namespace entropic
