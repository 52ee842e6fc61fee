#pragma once

#include <entropic/basecorr_reference.hpp>
#include <entropic/loss_engine.hpp>
#include <entropic/mce_calibrator.hpp>
#include <entropic/portfolio.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace entropic;

struct PoolShape {
    int relevant = 3;
    int complement = 3;
};

struct ToyOptions {
    std::vector<double> horizons{5.0};
    double recovery = 0.4;
    double hazard_low = 0.01;
    double hazard_high = 0.04;
    double loading_low = 0.3;
    double loading_high = 0.6;
    /// Equal notionals give every name one lattice unit.
    bool equal_notional = true;
    FactorParams params{0.5, 0.3};
};

/// Random homogeneous-recovery portfolio set; default curves from flat hazards.
inline PortfolioSet toy_set(const std::vector<PoolShape>& shapes, unsigned seed, const ToyOptions& opt = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> hazard(opt.hazard_low, opt.hazard_high);
    std::uniform_real_distribution<double> loading(opt.loading_low, opt.loading_high);
    std::uniform_real_distribution<double> size(0.5, 1.5);
    PortfolioSet set;
    set.params = opt.params;
    set.horizons = opt.horizons;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        IndexPortfolio index;
        index.index_id = int(i) + 1;
        const int n = shapes[i].relevant + shapes[i].complement;
        std::vector<double> weights(n, 1.0);
        if (!opt.equal_notional)
            for (auto& w : weights)
                w = std::round(size(rng) * 2.0) / 2.0;
        double total = 0.0;
        for (double w : weights)
            total += w;
        for (int k = 0; k < n; ++k) {
            NameSpec name;
            name.id = "I" + std::to_string(i + 1) + "N" + std::to_string(k);
            name.index_id = index.index_id;
            name.bucket = k < shapes[i].relevant ? Bucket::relevant : Bucket::complement;
            name.recovery = opt.recovery;
            name.notional_weight = weights[k] / total;
            name.one_factor_loading = loading(rng);
            const double h = hazard(rng);
            for (double t : opt.horizons)
                name.default_prob_curve.push_back(1.0 - std::exp(-h * t));
            index.names.push_back(name);
        }
        set.indices.push_back(index);
    }
    set.validate();
    return set;
}

inline std::vector<ConditionalLossDist> priors_for(const PortfolioSet& set, const MarketFactorGrid& grid,
                                                   const LossGrid& loss_grid, std::size_t horizon_index = 0) {
    std::vector<ConditionalLossDist> out;
    for (const auto& index : set.indices)
        out.push_back(build_conditional_prior(index, set.params, grid, loss_grid, horizon_index));
    return out;
}

/// E_Q[payoff] under the prior measure.
inline double prior_expectation(const ConditionalLossDist& prior, std::span<const double> weights,
                                const PricingConstraint& c) {
    double total = 0.0;
    for (std::size_t m = 0; m < prior.nodes(); ++m) {
        const JointPmf& q = prior.slices[m];
        for (int r = 0; r < q.rows(); ++r)
            for (int k = 0; k < q.cols(); ++k)
                total += weights[m] * q(r, k) * payoff_eval(c, r * prior.grid.unit, k * prior.grid.unit);
    }
    return total;
}

inline PricingConstraint tranche(int index_id, double lo, double hi, double target, double sigma,
                                 double horizon = 5.0) {
    return PricingConstraint{index_id, ConstraintKind::tranche, lo, hi, horizon, target, sigma};
}

inline PricingConstraint total(int index_id, ConstraintKind kind, double target, double sigma,
                               double horizon = 5.0) {
    return PricingConstraint{index_id, kind, 0.0, 0.0, horizon, target, sigma};
}

/// Total-loss pmf of one index under a calibration, in lattice units.
inline Pmf total_loss(const ConditionalLossDist& cond, std::span<const double> weights) {
    return mixture_unconditional(cond, weights).pmf;
}

/// Total variation between two calibrations' joint (factor, losses) laws.
inline double joint_total_variation(const std::vector<double>& h1, const std::vector<ConditionalLossDist>& c1,
                                    const std::vector<double>& h2, const std::vector<ConditionalLossDist>& c2) {
    // Indices are conditionally independent, so enumerate the product support.
    double tv = 0.0;
    for (std::size_t m = 0; m < h1.size(); ++m) {
        std::vector<double> a{h1[m]}, b{h2[m]};
        for (std::size_t i = 0; i < c1.size(); ++i) {
            std::vector<double> na, nb;
            const auto p = c1[i].slices[m].values();
            const auto q = c2[i].slices[m].values();
            for (std::size_t x = 0; x < a.size(); ++x)
                for (std::size_t y = 0; y < p.size(); ++y) {
                    na.push_back(a[x] * p[y]);
                    nb.push_back(b[x] * q[y]);
                }
            a = std::move(na);
            b = std::move(nb);
        }
        for (std::size_t x = 0; x < a.size(); ++x)
            tv += std::abs(a[x] - b[x]);
    }
    return 0.5 * tv;
}

} // namespace fixtures
