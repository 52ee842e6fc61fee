#include <entropic/dynamic_bootstrap.hpp>

#include <entropic/errors.hpp>
#include <entropic/parallel.hpp>

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace entropic {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

using LossPair = std::array<int, 2>;

int bucket_total_units(const IndexPortfolio& portfolio, Bucket bucket, const LossGrid& grid) {
    const auto units = bucket_units(portfolio, bucket, grid);
    return std::accumulate(units.begin(), units.end(), 0);
}

// Splits mass at x between the neighbouring multiples of `step` (the upper
// one capped at `cap`), preserving the mean.
void coarsen_point(int x, int step, int cap, double mass, std::vector<std::pair<int, double>>& out) {
    if (step <= 1 || x == cap || x % step == 0) {
        out.emplace_back(x, mass);
        return;
    }
    const int lo = x / step * step;
    const int hi = std::min(lo + step, cap);
    const double w_hi = double(x - lo) / double(hi - lo);
    out.emplace_back(lo, mass * (1.0 - w_hi));
    out.emplace_back(hi, mass * w_hi);
}

} // namespace

void TimeGrid::validate() const {
    require(!horizons.empty(), ErrorCode::invalid_input, "time grid needs at least one horizon");
    for (std::size_t n = 0; n < horizons.size(); ++n)
        require(horizons[n] > start(n), ErrorCode::invalid_input, "horizons must be positive and strictly increasing");
}

void FactorChainPrior::validate() const {
    for (Eigen::Index i = 0; i < transition.rows(); ++i) {
        require((transition.row(i).array() >= 0.0).all(), ErrorCode::invalid_input,
                "factor transition entries must be non-negative");
        require(std::abs(transition.row(i).sum() - 1.0) < 1e-12, ErrorCode::invalid_input,
                "factor transition rows must sum to one");
    }
}

Eigen::MatrixXd birth_death_chain(std::span<const double> stationary, double persistence) {
    require(persistence >= 0.0 && persistence <= 1.0, ErrorCode::invalid_input, "persistence must lie in [0, 1]");
    const int n = int(stationary.size());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    auto propose = [&](int i) { return (i == 0 || i == n - 1) ? 1.0 - persistence : 0.5 * (1.0 - persistence); };
    for (int i = 0; i < n; ++i) {
        double stay = 1.0;
        for (int j : {i - 1, i + 1}) {
            if (j < 0 || j >= n)
                continue;
            const double forward = stationary[i] * propose(i);
            const double backward = stationary[j] * propose(j);
            const double accept = forward > 0.0 ? std::min(1.0, backward / forward) : 1.0;
            k(i, j) = propose(i) * accept;
            stay -= k(i, j);
        }
        k(i, i) = stay;
    }
    return k;
}

FactorChainPrior build_factor_chain_prior(const MarketFactorGrid& grid, double persistence) {
    const Eigen::MatrixXd k1 = birth_death_chain(grid.marginal1(), persistence);
    const Eigen::MatrixXd k2 = birth_death_chain(grid.marginal2(), persistence);
    const Eigen::Index n1 = k1.rows(), n2 = k2.rows();
    FactorChainPrior out;
    out.transition.resize(n1 * n2, n1 * n2);
    for (Eigen::Index a = 0; a < n1; ++a)
        for (Eigen::Index b = 0; b < n2; ++b)
            for (Eigen::Index c = 0; c < n1; ++c)
                for (Eigen::Index d = 0; d < n2; ++d)
                    out.transition(a * n2 + b, c * n2 + d) = k1(a, c) * k2(b, d);
    return out;
}

DynamicState DynamicState::initial(std::vector<int> index_ids, const LossGrid& loss_grid) {
    DynamicState out;
    out.period = -1;
    out.loss_grid = loss_grid;
    out.entries.push_back(StateEntry{-1, std::vector<int>(2 * index_ids.size(), 0), 1.0});
    out.index_ids = std::move(index_ids);
    return out;
}

double DynamicState::total_mass() const {
    double total = 0.0;
    for (const auto& e : entries)
        total += e.mass;
    return total;
}

std::size_t DynamicState::slot(int index_id) const {
    for (std::size_t i = 0; i < index_ids.size(); ++i)
        if (index_ids[i] == index_id)
            return i;
    throw Error(ErrorCode::invalid_input, "dynamic state has no index " + std::to_string(index_id));
}

double DynamicState::expected_payoff(const PricingConstraint& constraint) const {
    const std::size_t b = slot(constraint.index_id);
    double total = 0.0;
    for (const auto& e : entries)
        total += e.mass * payoff_eval(constraint, e.losses[2 * b] * loss_grid.unit,
                                      e.losses[2 * b + 1] * loss_grid.unit);
    return total;
}

Pmf DynamicState::total_loss_pmf(int index_id) const {
    const std::size_t b = slot(index_id);
    int top = 0;
    for (const auto& e : entries)
        top = std::max(top, e.losses[2 * b] + e.losses[2 * b + 1]);
    Pmf out(std::size_t(top) + 1, 0.0);
    for (const auto& e : entries)
        out[std::size_t(e.losses[2 * b] + e.losses[2 * b + 1])] += e.mass;
    return out;
}

std::vector<Pmf> DynamicState::relevant_loss_by_factor(int index_id, std::size_t nodes) const {
    const std::size_t b = slot(index_id);
    int top = 0;
    for (const auto& e : entries)
        top = std::max(top, e.losses[2 * b]);
    std::vector<Pmf> out(nodes, Pmf(std::size_t(top) + 1, 0.0));
    for (const auto& e : entries) {
        require(e.m >= 0 && std::size_t(e.m) < nodes, ErrorCode::invalid_input, "state factor index out of range");
        out[std::size_t(e.m)][std::size_t(e.losses[2 * b])] += e.mass;
    }
    return out;
}

Pmf bucket_increment_pmf(const IndexPortfolio& portfolio, Bucket bucket, const FactorParams& params,
                         FactorNode node, int x_previous, std::size_t period, const LossGrid& loss_grid) {
    require(period >= 1, ErrorCode::invalid_input, "loss increments start from the second period");
    const auto names = portfolio.bucket_names(bucket);
    const auto units = bucket_units(portfolio, bucket, loss_grid);
    const int total = std::accumulate(units.begin(), units.end(), 0);
    require(x_previous >= 0 && x_previous <= total, ErrorCode::invalid_input,
            "previous loss " + std::to_string(x_previous) + " is off the bucket lattice [0, " +
                std::to_string(total) + "]");

    int slot_units = 0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (units[i] == 0)
            continue;
        slot_units = std::gcd(slot_units, units[i]);
        const TwoFactorLoadings loadings = derive_two_factor_loadings(*names[i], params);
        const double before = conditional_default_prob(*names[i], loadings, node, period - 1);
        const double after = conditional_default_prob(*names[i], loadings, node, period);
        const double forward = before < 1.0 ? std::clamp((after - before) / (1.0 - before), 0.0, 1.0) : 0.0;
        weighted += units[i] * forward;
    }

    Pmf out(std::size_t(total) + 1, 0.0);
    if (total == 0) {
        out[0] = 1.0;
        return out;
    }
    const double p = std::clamp(weighted / total, 0.0, 1.0);
    const int survivors = (total - x_previous) / slot_units;
    if (survivors == 0 || p == 0.0) {
        out[std::size_t(x_previous)] = 1.0;
        return out;
    }
    const boost::math::binomial_distribution<double> law(survivors, p);
    for (int k = 0; k <= survivors; ++k)
        out[std::size_t(x_previous + k * slot_units)] = boost::math::pdf(law, k);
    return out;
}

JointPmf build_conditional_loss_prior(const IndexPortfolio& portfolio, const FactorParams& params,
                                      FactorNode node, int x_relevant, int x_complement, std::size_t period,
                                      const LossGrid& loss_grid) {
    if (period == 0) {
        require(x_relevant == 0 && x_complement == 0, ErrorCode::invalid_input,
                "the first period starts without losses");
        const MarketFactorGrid single({node.z1}, {node.z2}, {1.0});
        return build_conditional_prior(portfolio, params, single, loss_grid, 0).slices.front();
    }
    const Pmf rel = bucket_increment_pmf(portfolio, Bucket::relevant, params, node, x_relevant, period, loss_grid);
    const Pmf comp = bucket_increment_pmf(portfolio, Bucket::complement, params, node, x_complement, period, loss_grid);
    return JointPmf::outer(rel, comp);
}

const JointPmf& PeriodKernel::loss_law(std::size_t slot, std::size_t m_next, LossPair previous) const {
    const auto it = previous_ids.at(slot).find(previous);
    require(it != previous_ids[slot].end(), ErrorCode::invalid_input, "no transition from the given losses");
    return loss_transition[slot][it->second * nodes + m_next];
}

namespace {

// Dual of the conditional cross-entropy problem of one period.
class PeriodDual {
  public:
    PeriodDual(const DynamicState& previous, const DynamicPrior& prior, const std::vector<PricingConstraint>& constraints)
    : previous_(previous), constraints_(constraints), nodes_(prior.grid.size()),
      threads_(resolve_threads(prior.options.calibration.threads)) {
        period_ = std::size_t(previous.period + 1);
        const PortfolioSet& set = *prior.portfolios;
        require(period_ < set.horizons.size(), ErrorCode::invalid_input, "no horizon left to calibrate");
        const std::size_t nb = previous.index_ids.size();

        // Distinct previous loss pairs per index.
        ids_.resize(nb);
        pairs_.resize(nb);
        entry_ids_.assign(previous.entries.size(), std::vector<std::size_t>(nb));
        for (std::size_t s = 0; s < previous.entries.size(); ++s) {
            for (std::size_t b = 0; b < nb; ++b) {
                const LossPair x{previous.entries[s].losses[2 * b], previous.entries[s].losses[2 * b + 1]};
                auto [it, fresh] = ids_[b].emplace(x, pairs_[b].size());
                if (fresh)
                    pairs_[b].push_back(x);
                entry_ids_[s][b] = it->second;
            }
        }

        // Prior loss transitions per (index, previous pair, next node).
        priors_.resize(nb);
        shapes_.resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            const IndexPortfolio& portfolio = set.index(previous.index_ids[b]);
            shapes_[b] = {bucket_total_units(portfolio, Bucket::relevant, prior.loss_grid) + 1,
                          bucket_total_units(portfolio, Bucket::complement, prior.loss_grid) + 1};
            priors_[b].resize(pairs_[b].size() * nodes_);
            parallel_for(priors_[b].size(), threads_, [&](std::size_t j) {
                const LossPair& x = pairs_[b][j / nodes_];
                priors_[b][j] = build_conditional_loss_prior(portfolio, set.params, prior.grid.node(j % nodes_), x[0],
                                                             x[1], period_, prior.loss_grid);
            });
        }

        // Factor transition prior rows.
        FactorChainPrior chain;
        if (period_ > 0) {
            const double dt = set.horizons[period_] - set.horizons[period_ - 1];
            chain = build_factor_chain_prior(prior.grid, std::pow(prior.options.persistence, dt));
        }
        log_rows_.resize(previous.entries.size());
        for (std::size_t s = 0; s < previous.entries.size(); ++s) {
            const int m = previous.entries[s].m;
            require(m < 0 || std::size_t(m) < nodes_, ErrorCode::invalid_input, "state factor index out of range");
            log_rows_[s].resize(nodes_);
            for (std::size_t mn = 0; mn < nodes_; ++mn) {
                const double g = m < 0 ? prior.grid.weights()[mn] : chain.transition(m, Eigen::Index(mn));
                log_rows_[s][mn] = g > 0.0 ? std::log(g) : neg_inf;
            }
        }

        // Constraints grouped by index with payoff tables.
        constraint_ids_.resize(nb);
        payoffs_.resize(nb);
        for (std::size_t k = 0; k < constraints_.size(); ++k) {
            constraints_[k].validate();
            const std::size_t b = previous.slot(constraints_[k].index_id);
            constraint_ids_[b].push_back(k);
            payoffs_[b].push_back(payoff_table(constraints_[k], shapes_[b][0], shapes_[b][1], prior.loss_grid.unit));
        }
    }

    std::size_t dimension() const { return constraints_.size(); }
    const std::vector<PricingConstraint>& constraints() const { return constraints_; }

    std::vector<std::vector<double>> exponents(const Eigen::VectorXd& lambdas) const {
        std::vector<std::vector<double>> out(payoffs_.size());
        for (std::size_t b = 0; b < payoffs_.size(); ++b) {
            out[b].assign(std::size_t(shapes_[b][0]) * shapes_[b][1], 0.0);
            for (std::size_t j = 0; j < constraint_ids_[b].size(); ++j) {
                const std::size_t k = constraint_ids_[b][j];
                const double lambda = lambdas[Eigen::Index(k)];
                for (std::size_t p = 0; p < out[b].size(); ++p)
                    out[b][p] += lambda * (payoffs_[b][j][p] - constraints_[k].target_el);
            }
        }
        return out;
    }

    SmoothEvaluation evaluate(const Eigen::VectorXd& lambdas, bool with_hessian,
                              std::vector<std::vector<double>>* transitions = nullptr) const {
        const std::size_t nb = payoffs_.size();
        const Eigen::Index dim = Eigen::Index(constraints_.size());
        const auto s = exponents(lambdas);

        std::vector<std::vector<TiltMoments>> moments(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            moments[b].resize(priors_[b].size());
            parallel_for(priors_[b].size(), threads_, [&](std::size_t j) {
                moments[b][j] = tilt_moments(priors_[b][j].values(), s[b], payoffs_[b], with_hessian);
            });
        }

        struct StateTerms {
            double log_z = 0.0;
            Eigen::VectorXd mean;
            Eigen::MatrixXd covariance;
            std::vector<double> h;
        };
        const std::size_t states = previous_.entries.size();
        std::vector<StateTerms> terms(states);
        parallel_for(states, threads_, [&](std::size_t st) {
            StateTerms& t = terms[st];
            std::vector<double> log_h(nodes_);
            double top = neg_inf;
            for (std::size_t mn = 0; mn < nodes_; ++mn) {
                double v = log_rows_[st][mn];
                for (std::size_t b = 0; b < nb && v != neg_inf; ++b)
                    v += moments[b][entry_ids_[st][b] * nodes_ + mn].log_z;
                log_h[mn] = v;
                top = std::max(top, v);
            }
            double z = 0.0;
            for (double v : log_h)
                if (v != neg_inf)
                    z += std::exp(v - top);
            t.log_z = top + std::log(z);
            t.h.resize(nodes_);
            for (std::size_t mn = 0; mn < nodes_; ++mn)
                t.h[mn] = log_h[mn] == neg_inf ? 0.0 : std::exp(log_h[mn] - t.log_z);

            Eigen::MatrixXd node_mean = Eigen::MatrixXd::Zero(dim, Eigen::Index(nodes_));
            for (std::size_t mn = 0; mn < nodes_; ++mn)
                for (std::size_t b = 0; b < nb; ++b)
                    for (std::size_t j = 0; j < constraint_ids_[b].size(); ++j)
                        node_mean(Eigen::Index(constraint_ids_[b][j]), Eigen::Index(mn)) =
                            moments[b][entry_ids_[st][b] * nodes_ + mn].mean[j];
            t.mean = Eigen::VectorXd::Zero(dim);
            for (std::size_t mn = 0; mn < nodes_; ++mn)
                t.mean += t.h[mn] * node_mean.col(Eigen::Index(mn));
            if (with_hessian) {
                t.covariance = Eigen::MatrixXd::Zero(dim, dim);
                for (std::size_t mn = 0; mn < nodes_; ++mn) {
                    if (t.h[mn] == 0.0)
                        continue;
                    const Eigen::VectorXd d = node_mean.col(Eigen::Index(mn)) - t.mean;
                    t.covariance.noalias() += t.h[mn] * d * d.transpose();
                    for (std::size_t b = 0; b < nb; ++b) {
                        const auto& ids = constraint_ids_[b];
                        const auto& cov = moments[b][entry_ids_[st][b] * nodes_ + mn].covariance;
                        for (std::size_t j = 0; j < ids.size(); ++j)
                            for (std::size_t l = 0; l < ids.size(); ++l)
                                t.covariance(Eigen::Index(ids[j]), Eigen::Index(ids[l])) +=
                                    t.h[mn] * cov[j * ids.size() + l];
                    }
                }
            }
        });

        SmoothEvaluation out;
        out.gradient = Eigen::VectorXd::Zero(dim);
        if (with_hessian)
            out.hessian = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t st = 0; st < states; ++st) {
            const double pi = previous_.entries[st].mass;
            out.value += pi * terms[st].log_z;
            out.gradient += pi * terms[st].mean;
            if (with_hessian)
                out.hessian += pi * terms[st].covariance;
        }
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double s2 = constraints_[k].sigma * constraints_[k].sigma;
            out.value += 0.5 * lambdas[k] * lambdas[k] * s2;
            out.gradient[k] += -constraints_[k].target_el + lambdas[k] * s2;
            if (with_hessian)
                out.hessian(k, k) += s2;
        }
        if (transitions) {
            transitions->resize(states);
            for (std::size_t st = 0; st < states; ++st)
                (*transitions)[st] = std::move(terms[st].h);
        }
        return out;
    }

    PeriodKernel kernel(const Eigen::VectorXd& lambdas) const {
        PeriodKernel out;
        out.period = int(period_);
        out.index_ids = previous_.index_ids;
        out.constraints = constraints_;
        out.lambdas = lambdas;
        out.nodes = nodes_;
        const SmoothEvaluation eval = evaluate(lambdas, false, &out.factor_transition);
        out.objective_value = eval.value;
        out.gradient_norm = eval.gradient.size() ? eval.gradient.lpNorm<Eigen::Infinity>() : 0.0;
        for (std::size_t k = 0; k < constraints_.size(); ++k) {
            const double s2 = constraints_[k].sigma * constraints_[k].sigma;
            const double model = eval.gradient[Eigen::Index(k)] + constraints_[k].target_el -
                                 lambdas[Eigen::Index(k)] * s2;
            out.model_el.push_back(model);
            out.residuals.push_back(model - constraints_[k].target_el);
        }
        const auto s = exponents(lambdas);
        out.previous_ids = ids_;
        out.loss_transition.resize(payoffs_.size());
        for (std::size_t b = 0; b < payoffs_.size(); ++b) {
            auto& laws = out.loss_transition[b];
            laws.resize(priors_[b].size());
            parallel_for(laws.size(), threads_, [&](std::size_t j) {
                JointPmf p(shapes_[b][0], shapes_[b][1]);
                tilt_pmf(priors_[b][j].values(), s[b], p.values());
                laws[j] = std::move(p);
            });
        }
        return out;
    }

  private:
    const DynamicState& previous_;
    std::vector<PricingConstraint> constraints_;
    std::size_t nodes_ = 0;
    int threads_ = 1;
    std::size_t period_ = 0;
    std::vector<std::map<LossPair, std::size_t>> ids_;
    std::vector<std::vector<LossPair>> pairs_;
    std::vector<std::vector<std::size_t>> entry_ids_;
    std::vector<std::vector<JointPmf>> priors_;
    std::vector<std::array<int, 2>> shapes_;
    std::vector<std::vector<double>> log_rows_;
    std::vector<std::vector<std::size_t>> constraint_ids_;
    std::vector<std::vector<std::vector<double>>> payoffs_;
};

} // namespace

PeriodKernel calibrate_period(const DynamicState& previous, const DynamicPrior& prior,
                              const std::vector<PricingConstraint>& constraints) {
    require(prior.portfolios != nullptr, ErrorCode::invalid_input, "dynamic prior has no portfolios");
    require(std::abs(previous.total_mass() - 1.0) < 1e-9, ErrorCode::invalid_input,
            "previous state must carry unit mass");
    PeriodDual dual(previous, prior, constraints);
    NewtonOptions newton;
    newton.gradient_tolerance = prior.options.calibration.tolerance;
    newton.max_iterations = prior.options.calibration.max_iterations;
    const NewtonOutcome outcome = newton_minimize(
        [&](const Eigen::VectorXd& x) { return dual.evaluate(x, true); },
        Eigen::VectorXd::Zero(Eigen::Index(dual.dimension())), newton);
    PeriodKernel kernel = dual.kernel(outcome.x);
    kernel.iterations = outcome.iterations;
    return kernel;
}

DynamicState propagate_marginal(const DynamicState& previous, const PeriodKernel& kernel, int coarsening) {
    require(coarsening >= 1, ErrorCode::invalid_input, "coarsening factor must be at least one");
    require(kernel.factor_transition.size() == previous.entries.size(), ErrorCode::invalid_input,
            "kernel was calibrated on a different state");
    const std::size_t nb = previous.index_ids.size();
    std::map<std::vector<int>, double> mass;
    std::vector<int> key(1 + 2 * nb);

    for (std::size_t s = 0; s < previous.entries.size(); ++s) {
        const StateEntry& e = previous.entries[s];
        for (std::size_t mn = 0; mn < kernel.nodes; ++mn) {
            const double h = e.mass * kernel.factor_transition[s][mn];
            if (h == 0.0)
                continue;
            key[0] = int(mn);
            std::vector<const JointPmf*> laws(nb);
            for (std::size_t b = 0; b < nb; ++b)
                laws[b] = &kernel.loss_law(b, mn, {e.losses[2 * b], e.losses[2 * b + 1]});
            // Depth-first product over the indices' joint loss laws.
            auto expand = [&](auto&& self, std::size_t b, double w) -> void {
                if (b == nb) {
                    mass[key] += w;
                    return;
                }
                const JointPmf& p = *laws[b];
                for (int r = 0; r < p.rows(); ++r) {
                    for (int c = 0; c < p.cols(); ++c) {
                        const double v = p(r, c);
                        if (v == 0.0)
                            continue;
                        key[1 + 2 * b] = r;
                        key[2 + 2 * b] = c;
                        self(self, b + 1, w * v);
                    }
                }
            };
            expand(expand, 0, h);
        }
    }

    if (coarsening > 1 && kernel.period >= 1) {
        std::vector<int> caps(2 * nb);
        for (std::size_t b = 0; b < nb; ++b) {
            caps[2 * b] = kernel.loss_transition[b].front().rows() - 1;
            caps[2 * b + 1] = kernel.loss_transition[b].front().cols() - 1;
        }
        std::map<std::vector<int>, double> coarse;
        for (const auto& [k, w] : mass) {
            std::vector<std::pair<std::vector<int>, double>> points{{k, w}};
            for (std::size_t d = 0; d < 2 * nb; ++d) {
                std::vector<std::pair<std::vector<int>, double>> next;
                for (const auto& [pk, pw] : points) {
                    std::vector<std::pair<int, double>> split;
                    coarsen_point(pk[1 + d], coarsening, caps[d], pw, split);
                    for (const auto& [x, sw] : split) {
                        auto nk = pk;
                        nk[1 + d] = x;
                        next.emplace_back(std::move(nk), sw);
                    }
                }
                points = std::move(next);
            }
            for (const auto& [pk, pw] : points)
                if (pw > 0.0)
                    coarse[pk] += pw;
        }
        mass = std::move(coarse);
    }

    DynamicState out;
    out.period = kernel.period;
    out.index_ids = previous.index_ids;
    out.loss_grid = previous.loss_grid;
    out.entries.reserve(mass.size());
    for (const auto& [k, w] : mass)
        out.entries.push_back(StateEntry{k[0], std::vector<int>(k.begin() + 1, k.end()), w});
    return out;
}

BootstrapResult bootstrap_all(const DynamicPrior& prior, const std::vector<PricingConstraint>& constraints) {
    require(prior.portfolios != nullptr, ErrorCode::invalid_input, "dynamic prior has no portfolios");
    const PortfolioSet& set = *prior.portfolios;
    TimeGrid{set.horizons}.validate();

    std::vector<std::vector<PricingConstraint>> by_period(set.horizons.size());
    for (const auto& c : constraints)
        by_period[set.horizon_index(c.horizon)].push_back(c);

    std::vector<int> ids;
    for (const auto& index : set.indices)
        ids.push_back(index.index_id);

    BootstrapResult out;
    DynamicState state = DynamicState::initial(ids, prior.loss_grid);
    for (std::size_t n = 0; n < set.horizons.size(); ++n) {
        PeriodKernel kernel = calibrate_period(state, prior, by_period[n]);
        state = propagate_marginal(state, kernel, prior.options.coarsening);
        out.states.push_back(state);
        out.kernels.push_back(std::move(kernel));
    }
    return out;
}

} // namespace entropic
