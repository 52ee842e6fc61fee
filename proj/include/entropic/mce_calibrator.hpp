#pragma once

#include <entropic/loss_engine.hpp>
#include <entropic/newton.hpp>

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace entropic {

enum class ConstraintKind { tranche, relevant_total, complement_total };

const char* constraint_kind_name(ConstraintKind kind) noexcept;
ConstraintKind parse_constraint_kind(const std::string& text);

/// Expected-loss constraint on one index. Payoffs and targets are fractions
/// of index notional; tranche payoffs are not normalised by tranche width.
struct PricingConstraint {
    int index_id = 1;
    ConstraintKind kind = ConstraintKind::tranche;
    double k_low = 0.0;
    double k_high = 0.0;
    double horizon = 0.0;
    double target_el = 0.0;
    /// Softness of the constraint; zero enforces it exactly.
    double sigma = 0.0;

    void validate() const;
};

double payoff_eval(const PricingConstraint& constraint, double x_relevant, double x_complement);

struct CalibrationOptions {
    double tolerance = 1e-9;
    int max_iterations = 200;
    int threads = 1;
};

struct CalibrationResult {
    std::vector<PricingConstraint> constraints;
    Eigen::VectorXd lambdas;
    std::vector<double> prior_weights;
    std::vector<double> posterior_weights;
    /// Tilted conditional loss distributions, one per index.
    std::vector<ConditionalLossDist> conditionals;
    std::vector<double> model_el;
    /// model_el - target_el per constraint.
    std::vector<double> residuals;
    double objective_value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;

    const ConditionalLossDist& conditional(int index_id) const;
};

struct PosteriorWeights {
    std::vector<double> weights;
    double log_normalizer = 0.0;
};

/// log Z_i(m, lambda) per node for one index, where `lambdas` pairs with
/// `constraints` (all of which must reference the prior's index).
std::vector<double> log_partition_functions(const ConditionalLossDist& prior,
                                            std::span<const PricingConstraint> constraints,
                                            std::span<const double> lambdas);

/// h_m proportional to g_m * prod_i Z_i(m); inputs are log Z_i(m) per index.
PosteriorWeights posterior_factor_weights(std::span<const double> prior_weights,
                                          const std::vector<std::vector<double>>& log_partitions);

/// Moments of the payoffs under q(x) * exp(s(x)) / Z. Points with q = 0 are
/// ignored; `covariance` (row-major, central) is filled on request.
struct TiltMoments {
    double log_z = 0.0;
    std::vector<double> mean;
    std::vector<double> covariance;
};

TiltMoments tilt_moments(std::span<const double> q, std::span<const double> s,
                         const std::vector<std::vector<double>>& payoffs, bool with_covariance);

/// Normalised q(x) * exp(s(x)); returns log Z, or -inf for an empty q.
double tilt_pmf(std::span<const double> q, std::span<const double> s, std::span<double> out);

/// payoff(r * unit, c * unit) on a rows x cols lattice, row-major.
std::vector<double> payoff_table(const PricingConstraint& constraint, int rows, int cols, double unit);

/// The dual of the soft-constrained minimum cross-entropy problem,
/// L'(lambda) = log Z(lambda) + 1/2 sum lambda^2 sigma^2.
class DualProblem {
  public:
    DualProblem(std::vector<double> prior_weights, std::vector<ConditionalLossDist> priors,
                std::vector<PricingConstraint> constraints, int threads = 1);

    std::size_t dimension() const { return constraints_.size(); }
    const std::vector<PricingConstraint>& constraints() const { return constraints_; }
    const std::vector<ConditionalLossDist>& priors() const { return priors_; }
    std::span<const double> prior_weights() const { return prior_weights_; }

    SmoothEvaluation evaluate(const Eigen::VectorXd& lambdas, bool with_hessian = true) const;
    double objective(const Eigen::VectorXd& lambdas) const { return evaluate(lambdas, false).value; }
    Eigen::VectorXd gradient(const Eigen::VectorXd& lambdas) const { return evaluate(lambdas, false).gradient; }
    Eigen::MatrixXd hessian(const Eigen::VectorXd& lambdas) const { return evaluate(lambdas, true).hessian; }

    /// Posterior measure at the given multipliers.
    CalibrationResult solution(const Eigen::VectorXd& lambdas) const;

  private:
    struct IndexBlock {
        std::vector<std::size_t> constraint_ids;
        /// payoff[k][r * cols + c] for the block's k-th constraint.
        std::vector<std::vector<double>> payoff;
        int rows = 0;
        int cols = 0;
    };

    std::vector<double> exponent(std::size_t block, const Eigen::VectorXd& lambdas) const;

    std::vector<double> prior_weights_;
    std::vector<ConditionalLossDist> priors_;
    std::vector<PricingConstraint> constraints_;
    std::vector<IndexBlock> blocks_;
    int threads_ = 1;
};

CalibrationResult calibrate(std::span<const double> prior_weights, std::vector<ConditionalLossDist> priors,
                            std::vector<PricingConstraint> constraints, const CalibrationOptions& options = {});

/// Tilts only the factor weights: h_m proportional to
/// g_m * exp(-sum lambda (E_Q[F | m] - EL)); conditionals stay at the prior.
/// At its optimum model_el - target_el = +lambda * sigma^2.
CalibrationResult factor_only_calibrate(std::span<const double> prior_weights,
                                        std::vector<ConditionalLossDist> priors,
                                        std::vector<PricingConstraint> constraints,
                                        const CalibrationOptions& options = {});

/// KL(P || Q) of two pmfs on the same support. Throws infinite_divergence when
/// P charges a point where Q vanishes.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// KL divergence of the joint (factor, losses) posterior of `result` from the
/// prior given by `prior_weights` and `priors`.
double joint_kl_divergence(const CalibrationResult& result, std::span<const double> prior_weights,
                           const std::vector<ConditionalLossDist>& priors);

/// I(X_relevant; X_complement | Z) of a conditional joint loss law mixed over
/// the factor weights.
double conditional_mutual_information(const ConditionalLossDist& cond, std::span<const double> weights);
double conditional_mutual_information(const CalibrationResult& result, int index_id);

} // namespace entropic
