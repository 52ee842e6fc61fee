#include <entropic/loss_engine.hpp>

#include <entropic/errors.hpp>
#include <entropic/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace entropic {

int LossGrid::units_for(double lgd) const {
    if (lgd <= 0.0)
        return 0;
    return std::max(1, static_cast<int>(std::lround(lgd / unit)));
}

void LossGrid::validate() const {
    require(unit > 0.0, ErrorCode::configuration, "loss unit must be positive");
    require(max_units >= 0, ErrorCode::configuration, "loss grid cap must be non-negative");
}

LossGrid LossGrid::from_portfolios(const PortfolioSet& set) {
    double unit = std::numeric_limits<double>::infinity();
    for (const auto& index : set.indices)
        for (const auto& name : index.names)
            if (name.loss_given_default() > 0.0)
                unit = std::min(unit, name.loss_given_default());
    require(std::isfinite(unit), ErrorCode::configuration, "no name has a positive loss-given-default");
    return with_unit(set, unit);
}

LossGrid LossGrid::with_unit(const PortfolioSet& set, double unit) {
    LossGrid grid{unit, 0};
    grid.validate();
    for (const auto& index : set.indices) {
        int total = 0;
        for (const auto& name : index.names)
            total += grid.units_for(name.loss_given_default());
        grid.max_units = std::max(grid.max_units, total);
    }
    return grid;
}

JointPmf JointPmf::outer(std::span<const double> relevant, std::span<const double> complement) {
    JointPmf out(static_cast<int>(relevant.size()), static_cast<int>(complement.size()));
    for (std::size_t r = 0; r < relevant.size(); ++r)
        for (std::size_t c = 0; c < complement.size(); ++c)
            out(int(r), int(c)) = relevant[r] * complement[c];
    return out;
}

Pmf JointPmf::relevant_marginal() const {
    Pmf out(rows_, 0.0);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c)
            out[r] += (*this)(r, c);
    return out;
}

Pmf JointPmf::complement_marginal() const {
    Pmf out(cols_, 0.0);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c)
            out[c] += (*this)(r, c);
    return out;
}

double JointPmf::total() const {
    return std::accumulate(p_.begin(), p_.end(), 0.0);
}

double LossDist::mean() const {
    double total = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k)
        total += pmf[k] * double(k) * unit;
    return total;
}

double LossDist::expected_tranche_loss(double low, double high) const {
    double total = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        const double x = double(k) * unit;
        total += pmf[k] * (std::max(x - low, 0.0) - std::max(x - high, 0.0));
    }
    return total;
}

Pmf bucket_loss_pmf(std::span<const double> probs, std::span<const int> units, int max_units) {
    require(probs.size() == units.size(), ErrorCode::invalid_input, "probabilities and units differ in length");
    Pmf pmf(std::size_t(max_units) + 1, 0.0);
    pmf[0] = 1.0;
    int reach = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int u = units[i];
        const double p = probs[i];
        if (u == 0 || p == 0.0)
            continue;
        require(reach + u <= max_units, ErrorCode::configuration, "loss grid too small for bucket loss");
        for (int k = reach; k >= 0; --k) {
            const double mass = pmf[k];
            pmf[k + u] += mass * p;
            pmf[k] = mass * (1.0 - p);
        }
        reach += u;
    }
    return pmf;
}

std::vector<int> bucket_units(const IndexPortfolio& portfolio, Bucket bucket, const LossGrid& grid) {
    std::vector<int> out;
    for (const NameSpec* name : portfolio.bucket_names(bucket))
        out.push_back(grid.units_for(name->loss_given_default()));
    return out;
}

ConditionalLossDist build_conditional_prior(const IndexPortfolio& portfolio, const FactorParams& params,
                                            const MarketFactorGrid& grid, const LossGrid& loss_grid,
                                            std::size_t horizon_index, int threads) {
    loss_grid.validate();
    const auto relevant = portfolio.bucket_names(Bucket::relevant);
    const auto complement = portfolio.bucket_names(Bucket::complement);
    const auto rel_units = bucket_units(portfolio, Bucket::relevant, loss_grid);
    const auto comp_units = bucket_units(portfolio, Bucket::complement, loss_grid);
    const int rel_total = std::accumulate(rel_units.begin(), rel_units.end(), 0);
    const int comp_total = std::accumulate(comp_units.begin(), comp_units.end(), 0);
    require(rel_total + comp_total <= loss_grid.max_units, ErrorCode::configuration,
            "loss grid too small to hold the total loss-given-default of index " +
                std::to_string(portfolio.index_id));

    std::vector<TwoFactorLoadings> rel_loadings, comp_loadings;
    for (const NameSpec* n : relevant)
        rel_loadings.push_back(derive_two_factor_loadings(*n, params));
    for (const NameSpec* n : complement)
        comp_loadings.push_back(derive_two_factor_loadings(*n, params));

    ConditionalLossDist out;
    out.index_id = portfolio.index_id;
    out.grid = loss_grid;
    out.slices.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t m) {
        const FactorNode node = grid.node(m);
        std::vector<double> rel_p(relevant.size()), comp_p(complement.size());
        for (std::size_t i = 0; i < relevant.size(); ++i)
            rel_p[i] = conditional_default_prob(*relevant[i], rel_loadings[i], node, horizon_index);
        for (std::size_t i = 0; i < complement.size(); ++i)
            comp_p[i] = conditional_default_prob(*complement[i], comp_loadings[i], node, horizon_index);
        const Pmf rel = bucket_loss_pmf(rel_p, rel_units, rel_total);
        const Pmf comp = bucket_loss_pmf(comp_p, comp_units, comp_total);
        out.slices[m] = JointPmf::outer(rel, comp);
    });
    return out;
}

Pmf convolve(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        return {};
    Pmf out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0)
            continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    }
    return out;
}

LossDist convolve(const LossDist& a, const LossDist& b) {
    require(std::abs(a.unit - b.unit) <= 1e-14 * std::max(a.unit, b.unit), ErrorCode::invalid_input,
            "cannot convolve loss distributions on different lattice units");
    return LossDist{convolve(a.pmf, b.pmf), a.unit, a.horizon};
}

Pmf mixture_unconditional(const std::vector<Pmf>& per_node, std::span<const double> weights) {
    require(per_node.size() == weights.size(), ErrorCode::invalid_input,
            "mixture weights do not match the number of factor nodes");
    std::size_t width = 0;
    for (const auto& p : per_node)
        width = std::max(width, p.size());
    Pmf out(width, 0.0);
    for (std::size_t m = 0; m < per_node.size(); ++m)
        for (std::size_t k = 0; k < per_node[m].size(); ++k)
            out[k] += weights[m] * per_node[m][k];
    return out;
}

LossDist mixture_unconditional(const ConditionalLossDist& cond, std::span<const double> weights,
                               double horizon) {
    std::vector<Pmf> totals;
    totals.reserve(cond.nodes());
    for (const auto& slice : cond.slices) {
        Pmf total(std::size_t(slice.rows() + slice.cols() - 1), 0.0);
        for (int r = 0; r < slice.rows(); ++r)
            for (int c = 0; c < slice.cols(); ++c)
                total[r + c] += slice(r, c);
        totals.push_back(std::move(total));
    }
    return LossDist{mixture_unconditional(totals, weights), cond.grid.unit, horizon};
}

} // namespace entropic
