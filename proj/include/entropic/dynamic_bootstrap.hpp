#pragma once

#include <entropic/loss_engine.hpp>
#include <entropic/mce_calibrator.hpp>
#include <entropic/portfolio.hpp>

#include <Eigen/Dense>

#include <array>
#include <map>
#include <vector>

namespace entropic {

struct TimeGrid {
    std::vector<double> horizons;

    std::size_t periods() const { return horizons.size(); }
    /// Start of period n (0 for the first period).
    double start(std::size_t n) const { return n == 0 ? 0.0 : horizons[n - 1]; }
    void validate() const;
};

/// Transition matrix g(m' | m) over the flattened factor grid.
struct FactorChainPrior {
    Eigen::MatrixXd transition;

    void validate() const;
};

/// Nearest-neighbour birth-death chain on 0..n-1 that stays put with
/// probability at least `persistence` and is reversible with respect to
/// `stationary` (Metropolis-Hastings acceptance).
Eigen::MatrixXd birth_death_chain(std::span<const double> stationary, double persistence);

/// Product of the birth-death chains of the two grid marginals.
FactorChainPrior build_factor_chain_prior(const MarketFactorGrid& grid, double persistence);

/// One support point of the dynamic state. `losses` holds, per index in the
/// state's index order, the relevant then complement loss in lattice units.
/// m < 0 marks the start state before the first period.
struct StateEntry {
    int m = -1;
    std::vector<int> losses;
    double mass = 0.0;
};

struct DynamicState {
    int period = -1;
    std::vector<int> index_ids;
    LossGrid loss_grid;
    std::vector<StateEntry> entries;

    /// Deterministic no-loss start.
    static DynamicState initial(std::vector<int> index_ids, const LossGrid& loss_grid);

    double total_mass() const;
    std::size_t slot(int index_id) const;
    /// E[payoff] of a constraint under the state.
    double expected_payoff(const PricingConstraint& constraint) const;
    /// Unconditional pmf of the index's total loss in lattice units.
    Pmf total_loss_pmf(int index_id) const;
    /// Pmf of the relevant-bucket loss of the index jointly with the factor
    /// state, marginalised over everything else: out[m][x].
    std::vector<Pmf> relevant_loss_by_factor(int index_id, std::size_t nodes) const;
};

/// Prior transition law of one index's bucket losses over period n given the
/// factor node at the period end and the losses at its start. Period 0 is the
/// static name-level prior; later periods apply forward conditional default
/// probabilities to a homogenised surviving pool per bucket.
JointPmf build_conditional_loss_prior(const IndexPortfolio& portfolio, const FactorParams& params,
                                      FactorNode node, int x_relevant, int x_complement, std::size_t period,
                                      const LossGrid& loss_grid);

/// Absolute loss pmf (lattice units, length total units + 1) of one bucket
/// after period n >= 1, starting from `x_previous` units.
Pmf bucket_increment_pmf(const IndexPortfolio& portfolio, Bucket bucket, const FactorParams& params,
                         FactorNode node, int x_previous, std::size_t period, const LossGrid& loss_grid);

/// Posterior transition components of one period.
struct PeriodKernel {
    int period = 0;
    std::vector<int> index_ids;
    std::vector<PricingConstraint> constraints;
    Eigen::VectorXd lambdas;
    std::vector<double> model_el;
    std::vector<double> residuals;
    double objective_value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    std::size_t nodes = 0;

    /// h(m' | s) per support point s of the previous state.
    std::vector<std::vector<double>> factor_transition;
    /// Per index slot: posterior P_i(X' | m', x) for each distinct previous
    /// loss pair x, stored at [x_id * nodes + m'].
    std::vector<std::map<std::array<int, 2>, std::size_t>> previous_ids;
    std::vector<std::vector<JointPmf>> loss_transition;

    const JointPmf& loss_law(std::size_t slot, std::size_t m_next, std::array<int, 2> previous) const;
};

struct DynamicOptions {
    CalibrationOptions calibration;
    /// Stay probability of each factor component per year.
    double persistence = 0.9;
    /// Per-index losses beyond the first horizon are kept on multiples of
    /// this many lattice units (plus the bucket cap).
    int coarsening = 1;
};

/// Everything the period calibration needs about the prior model.
struct DynamicPrior {
    const PortfolioSet* portfolios = nullptr;
    MarketFactorGrid grid;
    LossGrid loss_grid;
    DynamicOptions options;
};

PeriodKernel calibrate_period(const DynamicState& previous, const DynamicPrior& prior,
                              const std::vector<PricingConstraint>& constraints);

/// P(m', X') = sum_s P(s) h(m' | s) prod_i P_i(X'_i | m', X_i(s)), coarsened
/// per index to the given multiple of lattice units.
DynamicState propagate_marginal(const DynamicState& previous, const PeriodKernel& kernel, int coarsening = 1);

struct BootstrapResult {
    std::vector<DynamicState> states;
    std::vector<PeriodKernel> kernels;
};

/// Calibrates period by period. `constraints` are grouped by their horizon,
/// which must be one of the portfolio horizons.
BootstrapResult bootstrap_all(const DynamicPrior& prior, const std::vector<PricingConstraint>& constraints);

} // namespace entropic
