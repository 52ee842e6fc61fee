#pragma once

#include <entropic/portfolio.hpp>
#include <entropic/prior_model.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace entropic {

using Pmf = std::vector<double>;

/// Loss lattice: a loss of k units is k * unit as a fraction of index notional.
struct LossGrid {
    double unit = 0.0;
    int max_units = 0;

    /// Integer units for a name's loss-given-default (at least one unit for
    /// any positive LGD).
    int units_for(double loss_given_default) const;
    void validate() const;

    /// Unit = smallest positive LGD over all names; cap = largest index total.
    static LossGrid from_portfolios(const PortfolioSet& set);
    static LossGrid with_unit(const PortfolioSet& set, double unit);
};

/// Joint pmf over (relevant units, complement units) of one index, row-major
/// with the relevant loss as row.
class JointPmf {
  public:
    JointPmf() = default;
    JointPmf(int rows, int cols) : rows_(rows), cols_(cols), p_(std::size_t(rows) * cols, 0.0) {}

    static JointPmf outer(std::span<const double> relevant, std::span<const double> complement);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int r, int c) { return p_[std::size_t(r) * cols_ + c]; }
    double operator()(int r, int c) const { return p_[std::size_t(r) * cols_ + c]; }
    std::span<double> values() { return p_; }
    std::span<const double> values() const { return p_; }

    Pmf relevant_marginal() const;
    Pmf complement_marginal() const;
    double total() const;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> p_;
};

/// Per factor node, the joint loss pmf of an index's two buckets.
struct ConditionalLossDist {
    int index_id = 1;
    LossGrid grid;
    std::vector<JointPmf> slices;

    std::size_t nodes() const { return slices.size(); }
};

/// Unconditional loss pmf; `unit` is the loss fraction represented by one
/// lattice step.
struct LossDist {
    Pmf pmf;
    double unit = 0.0;
    double horizon = 0.0;

    double mean() const;
    /// E[(X - low)^+ - (X - high)^+] with X = k * unit.
    double expected_tranche_loss(double low, double high) const;
};

/// Loss pmf of independent names, name i losing units[i] with probability
/// probs[i]. The result has max_units + 1 entries.
Pmf bucket_loss_pmf(std::span<const double> probs, std::span<const int> units, int max_units);

/// Unit loss of each name of the bucket on the lattice.
std::vector<int> bucket_units(const IndexPortfolio& portfolio, Bucket bucket, const LossGrid& grid);

ConditionalLossDist build_conditional_prior(const IndexPortfolio& portfolio, const FactorParams& params,
                                            const MarketFactorGrid& grid, const LossGrid& loss_grid,
                                            std::size_t horizon_index, int threads = 1);

Pmf convolve(std::span<const double> a, std::span<const double> b);
LossDist convolve(const LossDist& a, const LossDist& b);

/// p(x) = sum_m weights[m] * per_node[m](x).
Pmf mixture_unconditional(const std::vector<Pmf>& per_node, std::span<const double> weights);
LossDist mixture_unconditional(const ConditionalLossDist& cond, std::span<const double> weights,
                               double horizon = 0.0);

} // namespace entropic
