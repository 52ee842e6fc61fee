#include <entropic/prior_model.hpp>

#include <entropic/errors.hpp>
#include <entropic/normal.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace entropic {

namespace {
constexpr double probability_clamp = 1e-12;
}

void FactorParams::validate() const {
    require(rho > -1.0 && rho < 1.0, ErrorCode::invalid_input, "factor correlation rho must lie in (-1, 1)");
    require(alpha >= 0.0, ErrorCode::invalid_input, "foreign-loading proportion alpha must be non-negative");
    require(systematic_scale() > 0.0, ErrorCode::invalid_input, "1 + 2*alpha*rho + alpha^2 must be positive");
}

const char* bucket_name(Bucket bucket) noexcept {
    return bucket == Bucket::relevant ? "relevant" : "complement";
}

Bucket parse_bucket(const std::string& text) {
    if (text == "relevant")
        return Bucket::relevant;
    if (text == "complement")
        return Bucket::complement;
    throw Error(ErrorCode::invalid_input, "unknown bucket '" + text + "'");
}

void NameSpec::validate() const {
    const std::string where = "name '" + id + "': ";
    require(index_id >= 1, ErrorCode::invalid_input, where + "index_id must be positive");
    require(recovery >= 0.0 && recovery < 1.0, ErrorCode::invalid_input, where + "recovery must lie in [0, 1)");
    require(notional_weight >= 0.0, ErrorCode::invalid_input, where + "notional weight must be non-negative");
    require(one_factor_loading >= 0.0 && one_factor_loading < 1.0, ErrorCode::invalid_loading,
            where + "one-factor loading must lie in [0, 1)");
    double previous = 0.0;
    for (double p : default_prob_curve) {
        require(p >= 0.0 && p <= 1.0, ErrorCode::invalid_input, where + "default probabilities must lie in [0, 1]");
        require(p >= previous, ErrorCode::invalid_input, where + "default probability curve must be non-decreasing");
        previous = p;
    }
}

TwoFactorLoadings derive_two_factor_loadings(double b, const FactorParams& params, int home_index) {
    params.validate();
    require(b * b < 1.0, ErrorCode::invalid_loading, "one-factor loading must satisfy b^2 < 1");
    require(home_index == 1 || home_index == 2, ErrorCode::invalid_input, "home index must be 1 or 2");

    const double domestic = b / std::sqrt(params.systematic_scale());
    const double foreign = params.alpha * domestic;
    TwoFactorLoadings out;
    out.beta1 = home_index == 1 ? domestic : foreign;
    out.beta2 = home_index == 1 ? foreign : domestic;
    const double idio2 = 1.0 - out.beta1 * out.beta1 - out.beta2 * out.beta2
                         - 2.0 * params.rho * out.beta1 * out.beta2;
    require(idio2 > 0.0, ErrorCode::invalid_loading, "idiosyncratic variance is not positive");
    out.idio = std::sqrt(idio2);
    return out;
}

TwoFactorLoadings derive_two_factor_loadings(const NameSpec& name, const FactorParams& params) {
    try {
        return derive_two_factor_loadings(name.one_factor_loading, params, name.index_id);
    } catch (const Error& e) {
        throw Error(e.code(), "name '" + name.id + "': " + e.what());
    }
}

double pairwise_correlation(const TwoFactorLoadings& a, const TwoFactorLoadings& b,
                            const FactorParams& params) {
    return a.beta1 * b.beta1 + a.beta2 * b.beta2 + params.rho * (a.beta1 * b.beta2 + a.beta2 * b.beta1);
}

MarketFactorGrid::MarketFactorGrid(std::vector<double> nodes1, std::vector<double> nodes2,
                                   std::vector<double> weights)
: nodes1_(std::move(nodes1)), nodes2_(std::move(nodes2)), weights_(std::move(weights)) {
    require(!nodes1_.empty() && !nodes2_.empty(), ErrorCode::invalid_input, "factor grid must be non-empty");
    require(weights_.size() == nodes1_.size() * nodes2_.size(), ErrorCode::invalid_input,
            "factor grid weights do not match node counts");
}

std::vector<double> MarketFactorGrid::marginal1() const {
    std::vector<double> out(size1(), 0.0);
    for (std::size_t m = 0; m < size(); ++m)
        out[m / size2()] += weights_[m];
    return out;
}

std::vector<double> MarketFactorGrid::marginal2() const {
    std::vector<double> out(size2(), 0.0);
    for (std::size_t m = 0; m < size(); ++m)
        out[m % size2()] += weights_[m];
    return out;
}

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
QuadratureRule gauss_hermite_rule(int n) {
    require(n >= 1 && n <= 64, ErrorCode::invalid_input, "quadrature size must lie in [1, 64]");
    QuadratureRule rule;
    if (n == 1) {
        rule.nodes = {0.0};
        rule.weights = {1.0};
        return rule;
    }
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;
    }
    // Symmetrise to remove eigen-solver noise around the origin.
    for (int i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (double& w : rule.weights)
        w /= total;
    return rule;
}

MarketFactorGrid build_market_grid(int n1, int n2, const FactorParams& params) {
    params.validate();
    const QuadratureRule r1 = gauss_hermite_rule(n1);
    const QuadratureRule r2 = gauss_hermite_rule(n2);

    // Product weights reweighted by the bivariate-to-product density ratio.
    std::vector<double> weights(r1.nodes.size() * r2.nodes.size());
    double total = 0.0;
    for (std::size_t a = 0; a < r1.nodes.size(); ++a) {
        for (std::size_t b = 0; b < r2.nodes.size(); ++b) {
            const double x = r1.nodes[a];
            const double y = r2.nodes[b];
            const double ratio = bivariate_normal_pdf(x, y, params.rho) / (normal_pdf(x) * normal_pdf(y));
            const double w = r1.weights[a] * r2.weights[b] * ratio;
            weights[a * r2.nodes.size() + b] = w;
            total += w;
        }
    }
    for (double& w : weights)
        w /= total;
    return MarketFactorGrid(r1.nodes, r2.nodes, std::move(weights));
}

double conditional_default_prob(double p, const TwoFactorLoadings& loadings, FactorNode node) {
    if (p <= 0.0)
        return 0.0;
    if (p >= 1.0)
        return 1.0;
    const double threshold = inverse_normal_cdf(std::clamp(p, probability_clamp, 1.0 - probability_clamp));
    return normal_cdf((threshold - loadings.beta1 * node.z1 - loadings.beta2 * node.z2) / loadings.idio);
}

double conditional_default_prob(const NameSpec& name, const TwoFactorLoadings& loadings,
                                FactorNode node, std::size_t horizon_index) {
    require(horizon_index < name.default_prob_curve.size(), ErrorCode::invalid_input,
            "name '" + name.id + "' has no default probability for the requested horizon");
    return conditional_default_prob(name.default_prob_curve[horizon_index], loadings, node);
}

} // namespace entropic
