// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "fixtures.hpp"

#include <entropic/basecorr_reference.hpp>
#include <entropic/bespoke_pricer.hpp>
#include <entropic/dynamic_bootstrap.hpp>
#include <entropic/errors.hpp>
#include <entropic/mce_calibrator.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace entropic;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

struct Toy {
    PortfolioSet set;
    MarketFactorGrid grid;
    LossGrid loss_grid;
    std::vector<ConditionalLossDist> priors;
    std::vector<double> g;
};

Toy make_toy(std::vector<fixtures::PoolShape> shapes, unsigned seed, int n1, int n2,
             const fixtures::ToyOptions& opt = {}) {
    Toy t;
    t.set = fixtures::toy_set(shapes, seed, opt);
    t.grid = build_market_grid(n1, n2, t.set.params);
    t.loss_grid = LossGrid::from_portfolios(t.set);
    t.priors = fixtures::priors_for(t.set, t.grid, t.loss_grid);
    t.g.assign(t.grid.weights().begin(), t.grid.weights().end());
    return t;
}

double prior_el(const Toy& t, const PricingConstraint& c) {
    return fixtures::prior_expectation(t.priors[std::size_t(c.index_id - 1)], t.grid.weights(), c);
}

// Full (factor, losses...) law as a flat vector: node-major, then index 1 cell, index 2 cell, ...
std::vector<double> flatten_joint(const std::vector<double>& h, const std::vector<ConditionalLossDist>& cond) {
    std::vector<double> out;
    for (std::size_t m = 0; m < h.size(); ++m) {
        std::vector<double> acc{h[m]};
        for (const auto& c : cond) {
            std::vector<double> next;
            for (double a : acc)
                for (double p : c.slices[m].values())
                    next.push_back(a * p);
            acc = std::move(next);
        }
        out.insert(out.end(), acc.begin(), acc.end());
    }
    return out;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

// ---------------------------------------------------------------------------

// Brute-force primal: mirror descent on KL(P || Q) + sum (E_P F_k - T_k)^2 / (2 sigma_k^2)
// over every lattice point of the joint law.
Verdict oracle_equivalence() {
    const auto start = Clock::now();
    const Toy t = make_toy({{3, 3}, {3, 3}}, 101, 2, 2);
    std::vector<PricingConstraint> cs;
    for (int id : {1, 2}) {
        auto eq = fixtures::tranche(id, 0.0, 0.1, 0.0, 0.1);
        eq.target_el = 1.5 * prior_el(t, eq);
        auto rel = fixtures::total(id, ConstraintKind::relevant_total, 0.0, 0.3);
        rel.target_el = 0.8 * prior_el(t, rel);
        cs.push_back(eq);
        cs.push_back(rel);
    }
    const CalibrationResult r = calibrate(t.g, t.priors, cs);
    const std::vector<double> posterior = flatten_joint(r.posterior_weights, r.conditionals);

    const std::vector<double> q = flatten_joint(t.g, t.priors);
    // Payoff of each constraint at each lattice point, decoded from the flat layout.
    const std::size_t cells1 = t.priors[0].slices[0].values().size();
    const std::size_t cells2 = t.priors[1].slices[0].values().size();
    const int cols1 = t.priors[0].slices[0].cols(), cols2 = t.priors[1].slices[0].cols();
    const double u = t.loss_grid.unit;
    std::vector<std::vector<double>> payoff(cs.size(), std::vector<double>(q.size()));
    for (std::size_t i = 0; i < q.size(); ++i) {
        const std::size_t a = (i / cells2) % cells1, b = i % cells2;
        for (std::size_t k = 0; k < cs.size(); ++k) {
            const bool first = cs[k].index_id == 1;
            const std::size_t cell = first ? a : b;
            const int cols = first ? cols1 : cols2;
            payoff[k][i] = payoff_eval(cs[k], double(cell / cols) * u, double(cell % cols) * u);
        }
    }
    std::vector<double> p = q;
    const double eta = 0.25;
    double change = 1.0;
    int iterations = 0;
    while (change > 1e-15 && iterations < 200000) {
        std::vector<double> mu(cs.size());
        for (std::size_t k = 0; k < cs.size(); ++k) {
            double e = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                e += p[i] * payoff[k][i];
            mu[k] = (e - cs[k].target_el) / (cs[k].sigma * cs[k].sigma);
        }
        std::vector<double> next(p.size());
        double z = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (q[i] == 0.0)
                continue;
            double s = 0.0;
            for (std::size_t k = 0; k < cs.size(); ++k)
                s += mu[k] * payoff[k][i];
            next[i] = std::exp((1.0 - eta) * std::log(p[i]) + eta * (std::log(q[i]) - s));
            z += next[i];
        }
        for (double& x : next)
            x /= z;
        change = total_variation(next, p);
        p = std::move(next);
        ++iterations;
    }
    const double tv = total_variation(p, posterior);
    const double prior_gap = total_variation(q, posterior);
    const double elapsed = seconds_since(start);
    return {tv < 1e-6 && elapsed < 10.0 && prior_gap > 1e-4,
            fmt("TV=%.3g vs oracle (posterior moved %.3g from prior), %.2fs", tv, prior_gap, elapsed)};
}

Verdict gradient_hessian_checks() {
    const auto start = Clock::now();
    std::mt19937_64 rng(202);
    std::normal_distribution<double> z(0.0, 1.0);
    double worst_g = 0.0, worst_h = 0.0;
    for (int instance = 0; instance < 20; ++instance) {
        const int n = 2 + instance % 3;
        const Toy t = make_toy({{n, n}, {n, n - 1}}, 300 + unsigned(instance), 3, 3);
        std::vector<PricingConstraint> cs;
        for (int id : {1, 2}) {
            auto eq = fixtures::tranche(id, 0.0, 0.1, 0.0, 0.01 * (1 + instance % 4));
            eq.target_el = (1.0 + 0.2 * z(rng)) * prior_el(t, eq);
            auto mezz = fixtures::tranche(id, 0.05, 0.2, 0.0, 0.02);
            mezz.target_el = (1.0 + 0.2 * z(rng)) * prior_el(t, mezz);
            auto comp = fixtures::total(id, ConstraintKind::complement_total, 0.0, 0.0);
            comp.target_el = prior_el(t, comp);
            cs.insert(cs.end(), {eq, mezz, comp});
        }
        const DualProblem dual(t.g, t.priors, cs);
        Eigen::VectorXd lambda(Eigen::Index(cs.size()));
        for (Eigen::Index k = 0; k < lambda.size(); ++k)
            lambda[k] = 20.0 * z(rng);
        const SmoothEvaluation e = dual.evaluate(lambda);
        const double h = 1e-4;
        Eigen::VectorXd g_fd(lambda.size());
        Eigen::MatrixXd h_fd(lambda.size(), lambda.size());
        for (Eigen::Index k = 0; k < lambda.size(); ++k) {
            Eigen::VectorXd up = lambda, down = lambda;
            up[k] += h;
            down[k] -= h;
            g_fd[k] = (dual.objective(up) - dual.objective(down)) / (2 * h);
            h_fd.col(k) = (dual.gradient(up) - dual.gradient(down)) / (2 * h);
        }
        worst_g = std::max(worst_g, (e.gradient - g_fd).norm() / e.gradient.norm());
        worst_h = std::max(worst_h, (e.hessian - h_fd).norm() / e.hessian.norm());
    }
    const double elapsed = seconds_since(start);
    return {worst_g < 1e-6 && worst_h < 1e-5 && elapsed < 30.0,
            fmt("max rel err gradient %.3g, Hessian %.3g, %.2fs", worst_g, worst_h, elapsed)};
}

Verdict exact_fit_limits() {
    const Toy t = make_toy({{3, 3}, {3, 3}}, 404, 3, 3);
    auto eq = fixtures::tranche(1, 0.0, 0.1, 0.0, 0.0);
    eq.target_el = 1.3 * prior_el(t, eq);
    const CalibrationResult exact = calibrate(t.g, t.priors, {eq});
    const double fit = std::abs(exact.model_el[0] - eq.target_el);

    std::vector<PricingConstraint> loose;
    for (int id : {1, 2}) {
        auto c = fixtures::tranche(id, 0.0, 0.1, 0.0, 1e6);
        c.target_el = 2.0 * prior_el(t, c);
        loose.push_back(c);
    }
    const CalibrationResult soft = calibrate(t.g, t.priors, loose);
    const double tv = total_variation(flatten_joint(soft.posterior_weights, soft.conditionals),
                                      flatten_joint(t.g, t.priors));
    return {fit < 1e-8 && tv < 1e-10, fmt("sigma=0 |EL-target|=%.3g; sigma=1e6 TV to prior=%.3g", fit, tv)};
}

bool concave_increasing(const Pmf& pmf) {
    // f(j) = E[min(X, j)] in lattice units.
    const std::size_t n = pmf.size();
    std::vector<double> f(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t x = 0; x < n; ++x)
            f[j] += pmf[x] * double(std::min(x, j));
    for (std::size_t j = 1; j <= n; ++j) {
        if (f[j] < f[j - 1] - 1e-15)
            return false;
        if (j + 1 <= n && f[j + 1] - f[j] > f[j] - f[j - 1] + 1e-15)
            return false;
    }
    return true;
}

Verdict strike_no_arbitrage() {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> scale(0.6, 1.6);
    int checked = 0, violations = 0;
    for (int instance = 0; instance < 50; ++instance) {
        const int n = 2 + instance % 4;
        const Toy t = make_toy({{n, n + 1}, {n + 1, n}}, 600 + unsigned(instance), 2 + instance % 3, 2 + instance % 2);
        std::vector<PricingConstraint> cs;
        for (int id : {1, 2}) {
            auto eq = fixtures::tranche(id, 0.0, 0.05 + 0.05 * (instance % 3), 0.0, 1e-3);
            eq.target_el = scale(rng) * prior_el(t, eq);
            auto rel = fixtures::total(id, ConstraintKind::relevant_total, 0.0, 1e-3);
            rel.target_el = scale(rng) * prior_el(t, rel);
            cs.insert(cs.end(), {eq, rel});
        }
        const CalibrationResult r = calibrate(t.g, t.priors, cs);
        for (const auto& cond : r.conditionals) {
            ++checked;
            if (!concave_increasing(fixtures::total_loss(cond, r.posterior_weights)))
                ++violations;
            std::vector<Pmf> rel;
            for (const auto& s : cond.slices)
                rel.push_back(s.relevant_marginal());
            ++checked;
            if (!concave_increasing(mixture_unconditional(rel, r.posterior_weights)))
                ++violations;
        }
    }
    return {violations == 0, fmt("%.0f loss laws, %.0f violations", checked, violations)};
}

Verdict time_no_arbitrage() {
    fixtures::ToyOptions opt;
    opt.horizons = {1.0, 2.0, 3.0};
    const PortfolioSet set = fixtures::toy_set({{3, 2}, {2, 2}}, 707, opt);
    DynamicPrior prior;
    prior.portfolios = &set;
    prior.grid = build_market_grid(3, 2, set.params);
    prior.loss_grid = LossGrid::from_portfolios(set);
    std::vector<PricingConstraint> cs;
    for (double t : opt.horizons)
        for (int id : {1, 2}) {
            cs.push_back(fixtures::tranche(id, 0.0, 0.12, 0.02 * t, 1e-3, t));
            cs.push_back(fixtures::tranche(id, 0.12, 0.4, 0.004 * t * t, 1e-3, t));
        }
    const BootstrapResult r = bootstrap_all(prior, cs);

    int call_violations = 0;
    for (int id : {1, 2}) {
        std::vector<Pmf> laws;
        for (const auto& s : r.states)
            laws.push_back(s.total_loss_pmf(id));
        for (std::size_t n = 1; n < laws.size(); ++n)
            for (std::size_t k = 0; k < laws[n].size(); ++k) {
                auto call = [k](const Pmf& p) {
                    double c = 0.0;
                    for (std::size_t x = k; x < p.size(); ++x)
                        c += p[x] * double(x - k);
                    return c;
                };
                if (call(laws[n]) < call(laws[n - 1]) - 1e-14)
                    ++call_violations;
            }
    }
    double decreasing_mass = 0.0;
    for (const auto& k : r.kernels)
        for (std::size_t b = 0; b < k.previous_ids.size(); ++b)
            for (const auto& [x, id] : k.previous_ids[b])
                for (std::size_t m = 0; m < k.nodes; ++m) {
                    const JointPmf& p = k.loss_transition[b][id * k.nodes + m];
                    for (int rr = 0; rr < p.rows(); ++rr)
                        for (int cc = 0; cc < p.cols(); ++cc)
                            if (rr < x[0] || cc < x[1])
                                decreasing_mass += p(rr, cc);
                }
    return {call_violations == 0 && decreasing_mass == 0.0,
            fmt("%.0f call-price decreases, mass on decreasing paths %.3g", call_violations, decreasing_mass)};
}

Verdict kl_ordering() {
    std::mt19937_64 rng(808);
    std::normal_distribution<double> z(0.0, 0.4);
    int ordered = 0, strict = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int instance = 0; instance < 20; ++instance) {
        const Toy t = make_toy({{3, 3}, {3, 2}}, 900 + unsigned(instance), 3, 3);
        // Targets from a perturbed factor law with prior conditionals: feasible for both calibrations.
        std::vector<double> h(t.g.size());
        double total = 0.0;
        for (std::size_t m = 0; m < h.size(); ++m)
            total += h[m] = t.g[m] * std::exp(z(rng));
        for (double& x : h)
            x /= total;
        std::vector<PricingConstraint> cs;
        for (int id : {1, 2}) {
            auto eq = fixtures::tranche(id, 0.0, 0.1, 0.0, 0.0);
            eq.target_el = fixtures::prior_expectation(t.priors[std::size_t(id - 1)], h, eq);
            cs.push_back(eq);
        }
        const CalibrationResult full = calibrate(t.g, t.priors, cs);
        const CalibrationResult factor = factor_only_calibrate(t.g, t.priors, cs);
        const double kl_full = joint_kl_divergence(full, t.g, t.priors);
        const double kl_factor = joint_kl_divergence(factor, t.g, t.priors);
        worst_margin = std::min(worst_margin, kl_factor - kl_full);
        if (kl_full <= kl_factor + 1e-14)
            ++ordered;
        if (kl_full < kl_factor - 1e-12)
            ++strict;
    }
    return {ordered == 20 && strict == 20,
            fmt("ordered %.0f/20, strict %.0f/20, min KL gap %.3g", ordered, strict, worst_margin)};
}

Verdict posterior_dependence() {
    double worst_prior = 0.0, weakest_tilt = std::numeric_limits<double>::infinity();
    for (unsigned seed = 0; seed < 5; ++seed) {
        const Toy t = make_toy({{3, 3}, {2, 3}}, 1000 + seed, 3, 3);
        for (const auto& p : t.priors)
            worst_prior = std::max(worst_prior, conditional_mutual_information(p, t.grid.weights()));
        for (int id : {1, 2}) {
            auto eq = fixtures::tranche(id, 0.0, 0.1, 0.0, 1e-3);
            eq.target_el = (seed % 2 ? 1.3 : 0.7) * prior_el(t, eq);
            const CalibrationResult r = calibrate(t.g, t.priors, {eq});
            if (r.lambdas[0] == 0.0)
                return {false, "equity constraint did not bind"};
            weakest_tilt = std::min(weakest_tilt, conditional_mutual_information(r, id));
        }
    }
    return {worst_prior < 1e-14 && weakest_tilt > 1e-10,
            fmt("prior CMI max %.3g, tilted CMI min %.3g", worst_prior, weakest_tilt)};
}

double mixed_mean(const std::vector<Pmf>& q, double unit, const std::vector<double>& h) {
    double s = 0.0;
    for (std::size_t m = 0; m < q.size(); ++m)
        for (std::size_t k = 0; k < q[m].size(); ++k)
            s += h[m] * q[m][k] * double(k) * unit;
    return s;
}

std::vector<Pmf> tilt(const std::vector<Pmf>& q, double unit, const std::vector<double>& lambdas) {
    std::vector<Pmf> out = q;
    for (std::size_t m = 0; m < q.size(); ++m) {
        double z = 0.0;
        for (std::size_t k = 0; k < q[m].size(); ++k)
            z += out[m][k] = q[m][k] * std::exp(-lambdas[m] * double(k) * unit);
        for (double& x : out[m])
            x /= z;
    }
    return out;
}

double mixed_kl(const std::vector<Pmf>& p, const std::vector<Pmf>& q, const std::vector<double>& h) {
    double s = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m)
        for (std::size_t k = 0; k < p[m].size(); ++k)
            if (p[m][k] > 0.0)
                s += h[m] * p[m][k] * std::log(p[m][k] / q[m][k]);
    return s;
}

// Root of g(t) = 0 for increasing g by bisection.
double bisect(const std::function<double(double)>& g, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Verdict bespoke_adjustment() {
    const Toy t = make_toy({{4, 3}, {4, 3}}, 1111, 3, 3);
    std::vector<PricingConstraint> cs;
    for (int id : {1, 2}) {
        auto eq = fixtures::tranche(id, 0.0, 0.1, 0.0, 1e-3);
        eq.target_el = 1.2 * prior_el(t, eq);
        cs.push_back(eq);
    }
    const CalibrationResult r = calibrate(t.g, t.priors, cs);
    std::vector<Pmf> q;
    for (const auto& s : r.conditional(2).slices)
        q.push_back(s.relevant_marginal());
    const double unit = t.loss_grid.unit;
    const auto& h = r.posterior_weights;
    double worst_fit = 0.0, worst_lambda = 0.0, worst_margin = std::numeric_limits<double>::infinity();
    for (double factor : {0.6, 1.25, 1.8}) {
        const double target = factor * mixed_mean(q, unit, h);
        const AdjustedBucket a = adjust_bespoke_names(q, unit, h, target);
        worst_fit = std::max(worst_fit, std::abs(mixed_mean(a.conditional, unit, h) - target));

        // Bracketing oracle on a common multiplier: the mixed mean decreases in lambda.
        const double lambda = bisect(
            [&](double l) { return target - mixed_mean(tilt(q, unit, std::vector<double>(q.size(), l)), unit, h); },
            -1e3, 1e3);
        worst_lambda = std::max(worst_lambda, std::abs(lambda - a.lambda));

        // Other node-dependent tilts that meet the same target carry more KL.
        const double kl = mixed_kl(a.conditional, q, h);
        std::mt19937_64 rng(std::uint64_t(factor * 100));
        std::normal_distribution<double> z(0.0, 5.0);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> d(q.size());
            for (double& x : d)
                x = z(rng);
            const double shift = bisect(
                [&](double s) {
                    std::vector<double> l(q.size());
                    for (std::size_t m = 0; m < q.size(); ++m)
                        l[m] = s + d[m];
                    return target - mixed_mean(tilt(q, unit, l), unit, h);
                },
                -1e3, 1e3);
            std::vector<double> l(q.size());
            for (std::size_t m = 0; m < q.size(); ++m)
                l[m] = shift + d[m];
            worst_margin = std::min(worst_margin, mixed_kl(tilt(q, unit, l), q, h) - kl);
        }
    }
    return {worst_fit < 1e-10 && worst_lambda < 1e-8 && worst_margin > 0.0,
            fmt("|EL-target| max %.3g, |lambda-oracle| max %.3g, min KL excess of alternatives %.3g", worst_fit,
                worst_lambda, worst_margin)};
}

Verdict consistency_identities() {
    std::mt19937_64 rng(1212);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_corr = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const FactorParams params{1.98 * u(rng) - 0.99, 3.0 * u(rng)};
        const double bi = 0.99 * u(rng), bj = 0.99 * u(rng);
        for (int home : {1, 2}) {
            const double c = pairwise_correlation(derive_two_factor_loadings(bi, params, home),
                                                  derive_two_factor_loadings(bj, params, home), params);
            worst_corr = std::max(worst_corr, std::abs(c - bi * bj));
        }
    }
    double worst_pd = 0.0;
    for (auto params : {FactorParams{0.5, 0.3}, FactorParams{0.75, 0.0}, FactorParams{-0.4, 1.0}}) {
        const MarketFactorGrid grid = build_market_grid(10, 10, params);
        for (int home : {1, 2})
            for (double b : {0.2, 0.5, 0.7})
                for (double p : {0.002, 0.02, 0.1, 0.3}) {
                    const TwoFactorLoadings l = derive_two_factor_loadings(b, params, home);
                    double q = 0.0;
                    for (std::size_t m = 0; m < grid.size(); ++m)
                        q += grid.weights()[m] * conditional_default_prob(p, l, grid.node(m));
                    worst_pd = std::max(worst_pd, std::abs(q - p));
                }
    }
    return {worst_corr < 1e-12 && worst_pd < 1e-3,
            fmt("same-index correlation err %.3g, quadrature PD err %.3g", worst_corr, worst_pd)};
}

// Two 125-name indices with 50 relevant names each; 7 market constraints per
// index from a one-factor Gaussian copula with a base-correlation skew.
struct MarketCase {
    fixtures::ToyOptions options;
    std::vector<PricingConstraint> constraints;
};

MarketCase market_case() {
    MarketCase mc;
    mc.options.hazard_low = 0.005;
    mc.options.hazard_high = 0.03;
    mc.options.loading_low = 0.35;
    mc.options.loading_high = 0.55;
    const PortfolioSet set = fixtures::toy_set({{50, 75}, {50, 75}}, 1313, mc.options);
    const std::vector<double> strikes{0.03, 0.07, 0.1, 0.15, 0.3};
    const std::vector<double> betas{0.18, 0.28, 0.34, 0.42, 0.6};
    for (int id : {1, 2}) {
        const IndexPortfolio& index = set.index(id);
        const ReferencePool pool = reference_pool(index, 0);
        double prev = 0.0, prev_k = 0.0;
        for (std::size_t s = 0; s < strikes.size(); ++s) {
            const double base = strikes[s] * base_tranche_el(pool, strikes[s], betas[s]);
            mc.constraints.push_back(fixtures::tranche(id, prev_k, strikes[s], base - prev, 1e-4));
            prev = base;
            prev_k = strikes[s];
        }
        mc.constraints.push_back(
            fixtures::total(id, ConstraintKind::relevant_total, index.expected_loss(Bucket::relevant, 0), 1e-4));
        mc.constraints.push_back(
            fixtures::total(id, ConstraintKind::complement_total, index.expected_loss(Bucket::complement, 0), 1e-4));
    }
    return mc;
}

struct BespokeSpreads {
    double equity = 0.0;
    double senior = 0.0;
    double seconds = 0.0;
    double gradient_norm = 0.0;
};

BespokeSpreads price_market_case(const MarketCase& mc, FactorParams params) {
    fixtures::ToyOptions opt = mc.options;
    opt.params = params;
    const auto start = Clock::now();
    const Toy t = make_toy({{50, 75}, {50, 75}}, 1313, 10, 10, opt);
    const CalibrationResult r = calibrate(t.g, t.priors, mc.constraints, {1e-9, 200, 1});
    BespokeSpreads out;
    out.seconds = seconds_since(start);
    out.gradient_norm = r.gradient_norm;
    const BespokeSpec spec{{1, 2}, std::nullopt};
    const double n0 = bespoke_notional(t.set, spec);
    const LossDist d = bespoke_loss_dist(r, spec, n0, 5.0);
    const DiscountCurve curve = DiscountCurve::flat(0.02);
    out.equity = price_tranche({d}, TrancheSpec{0.0, 0.03, 5.0}, curve).par_spread_bp;
    out.senior = price_tranche({d}, TrancheSpec{0.15, 0.3, 5.0}, curve).par_spread_bp;
    return out;
}

struct MarketRuns {
    BespokeSpreads base;
    BespokeSpreads low_cross;
    std::string error;
};

const MarketRuns& market_runs() {
    static const MarketRuns runs = [] {
        MarketRuns m;
        try {
            const MarketCase mc = market_case();
            m.base = price_market_case(mc, FactorParams{0.5, 0.3});
            m.low_cross = price_market_case(mc, FactorParams{0.75, 0.0});
        } catch (const std::exception& e) {
            m.error = e.what();
        }
        return m;
    }();
    return runs;
}

Verdict correlation_effect() {
    const MarketRuns& m = market_runs();
    if (!m.error.empty())
        return {false, m.error};
    std::ostringstream detail;
    detail.precision(4);
    detail << "0-3%: " << m.base.equity << " -> " << m.low_cross.equity << " bp; 15-30%: " << m.base.senior
           << " -> " << m.low_cross.senior << " bp";
    return {m.low_cross.equity > m.base.equity && m.low_cross.senior < m.base.senior, detail.str()};
}

Verdict performance() {
    const MarketRuns& m = market_runs();
    if (!m.error.empty())
        return {false, m.error};
    const double worst = std::max(m.base.seconds, m.low_cross.seconds);
    return {worst < 60.0, fmt("2x125 names, 10x10 grid, 14 constraints: %.2fs (slowest of two runs)", worst)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"oracle_equivalence", oracle_equivalence},
        {"gradient_hessian_fd", gradient_hessian_checks},
        {"exact_fit_limits", exact_fit_limits},
        {"no_arbitrage_strike", strike_no_arbitrage},
        {"no_arbitrage_time", time_no_arbitrage},
        {"kl_ordering", kl_ordering},
        {"posterior_dependence", posterior_dependence},
        {"bespoke_adjustment", bespoke_adjustment},
        {"consistency_identities", consistency_identities},
        {"correlation_parameter_effect", correlation_effect},
        {"performance", performance},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
