#include <entropic/mce_calibrator.hpp>

#include <entropic/errors.hpp>
#include <entropic/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace entropic {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> values) {
    double top = neg_inf;
    for (double v : values)
        top = std::max(top, v);
    if (top == neg_inf)
        return neg_inf;
    double total = 0.0;
    for (double v : values)
        if (v != neg_inf)
            total += std::exp(v - top);
    return top + std::log(total);
}

std::size_t block_of(const std::vector<ConditionalLossDist>& priors, int index_id) {
    for (std::size_t b = 0; b < priors.size(); ++b)
        if (priors[b].index_id == index_id)
            return b;
    throw Error(ErrorCode::invalid_input,
                "constraint references index " + std::to_string(index_id) + " with no prior distribution");
}

void check_priors(std::span<const double> prior_weights, const std::vector<ConditionalLossDist>& priors) {
    require(!priors.empty(), ErrorCode::invalid_input, "calibration needs at least one index prior");
    double total = 0.0;
    for (double g : prior_weights) {
        require(g >= 0.0 && std::isfinite(g), ErrorCode::invalid_input, "prior factor weights must be non-negative");
        total += g;
    }
    require(std::abs(total - 1.0) < 1e-9, ErrorCode::invalid_input, "prior factor weights must sum to one");
    for (const auto& prior : priors) {
        require(prior.nodes() == prior_weights.size(), ErrorCode::invalid_input,
                "conditional prior and factor grid differ in node count");
        require(std::abs(prior.grid.unit - priors.front().grid.unit) <= 1e-14, ErrorCode::invalid_input,
                "all index priors must share one loss unit");
    }
}

} // namespace

const char* constraint_kind_name(ConstraintKind kind) noexcept {
    switch (kind) {
    case ConstraintKind::tranche:
        return "tranche";
    case ConstraintKind::relevant_total:
        return "relevant";
    case ConstraintKind::complement_total:
        return "complement";
    }
    return "unknown";
}

ConstraintKind parse_constraint_kind(const std::string& text) {
    if (text == "tranche")
        return ConstraintKind::tranche;
    if (text == "relevant")
        return ConstraintKind::relevant_total;
    if (text == "complement")
        return ConstraintKind::complement_total;
    throw Error(ErrorCode::invalid_input, "unknown constraint kind '" + text + "'");
}

void PricingConstraint::validate() const {
    if (kind == ConstraintKind::tranche)
        require(k_low >= 0.0 && k_low < k_high && k_high <= 1.0, ErrorCode::invalid_input,
                "tranche strikes must satisfy 0 <= K_low < K_high <= 1");
    require(target_el >= 0.0 && std::isfinite(target_el), ErrorCode::invalid_input, "target EL must be non-negative");
    require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::invalid_input, "constraint softness must be non-negative");
}

double payoff_eval(const PricingConstraint& constraint, double x_relevant, double x_complement) {
    switch (constraint.kind) {
    case ConstraintKind::tranche: {
        const double x = x_relevant + x_complement;
        return std::max(x - constraint.k_low, 0.0) - std::max(x - constraint.k_high, 0.0);
    }
    case ConstraintKind::relevant_total:
        return x_relevant;
    case ConstraintKind::complement_total:
        return x_complement;
    }
    return 0.0;
}

const ConditionalLossDist& CalibrationResult::conditional(int index_id) const {
    for (const auto& c : conditionals)
        if (c.index_id == index_id)
            return c;
    throw Error(ErrorCode::invalid_input, "calibration has no index " + std::to_string(index_id));
}

std::vector<double> log_partition_functions(const ConditionalLossDist& prior,
                                            std::span<const PricingConstraint> constraints,
                                            std::span<const double> lambdas) {
    require(constraints.size() == lambdas.size(), ErrorCode::invalid_input, "one multiplier per constraint");
    std::vector<double> out(prior.nodes());
    const double unit = prior.grid.unit;
    for (std::size_t m = 0; m < prior.nodes(); ++m) {
        const JointPmf& q = prior.slices[m];
        std::vector<double> terms;
        terms.reserve(q.values().size());
        for (int r = 0; r < q.rows(); ++r) {
            for (int c = 0; c < q.cols(); ++c) {
                if (q(r, c) <= 0.0)
                    continue;
                double s = 0.0;
                for (std::size_t k = 0; k < constraints.size(); ++k) {
                    require(constraints[k].index_id == prior.index_id, ErrorCode::invalid_input,
                            "constraint does not reference this index");
                    s += lambdas[k] * (payoff_eval(constraints[k], r * unit, c * unit) - constraints[k].target_el);
                }
                terms.push_back(std::log(q(r, c)) + s);
            }
        }
        out[m] = log_sum_exp(terms);
    }
    return out;
}

PosteriorWeights posterior_factor_weights(std::span<const double> prior_weights,
                                          const std::vector<std::vector<double>>& log_partitions) {
    std::vector<double> log_h(prior_weights.size());
    for (std::size_t m = 0; m < prior_weights.size(); ++m) {
        log_h[m] = prior_weights[m] > 0.0 ? std::log(prior_weights[m]) : neg_inf;
        for (const auto& lz : log_partitions) {
            require(lz.size() == prior_weights.size(), ErrorCode::invalid_input,
                    "partition functions do not match the factor grid");
            if (log_h[m] != neg_inf)
                log_h[m] += lz[m];
        }
    }
    PosteriorWeights out;
    out.log_normalizer = log_sum_exp(log_h);
    out.weights.resize(log_h.size());
    for (std::size_t m = 0; m < log_h.size(); ++m)
        out.weights[m] = log_h[m] == neg_inf ? 0.0 : std::exp(log_h[m] - out.log_normalizer);
    return out;
}

TiltMoments tilt_moments(std::span<const double> q, std::span<const double> s,
                         const std::vector<std::vector<double>>& payoffs, bool with_covariance) {
    const std::size_t nk = payoffs.size();
    double top = neg_inf;
    for (std::size_t p = 0; p < q.size(); ++p)
        if (q[p] > 0.0)
            top = std::max(top, s[p]);

    TiltMoments out;
    out.mean.assign(nk, 0.0);
    if (with_covariance)
        out.covariance.assign(nk * nk, 0.0);
    if (top == neg_inf) {
        out.log_z = neg_inf;
        return out;
    }
    std::vector<double> w(q.size(), 0.0);
    double z = 0.0;
    for (std::size_t p = 0; p < q.size(); ++p) {
        if (q[p] > 0.0) {
            w[p] = q[p] * std::exp(s[p] - top);
            z += w[p];
        }
    }
    out.log_z = top + std::log(z);
    for (std::size_t j = 0; j < nk; ++j) {
        const auto& f = payoffs[j];
        double acc = 0.0;
        for (std::size_t p = 0; p < q.size(); ++p)
            acc += w[p] * f[p];
        out.mean[j] = acc / z;
    }
    if (with_covariance) {
        for (std::size_t j = 0; j < nk; ++j) {
            const auto& fj = payoffs[j];
            for (std::size_t l = 0; l <= j; ++l) {
                const auto& fl = payoffs[l];
                double acc = 0.0;
                for (std::size_t p = 0; p < q.size(); ++p)
                    acc += w[p] * (fj[p] - out.mean[j]) * (fl[p] - out.mean[l]);
                out.covariance[j * nk + l] = out.covariance[l * nk + j] = acc / z;
            }
        }
    }
    return out;
}

double tilt_pmf(std::span<const double> q, std::span<const double> s, std::span<double> out) {
    double top = neg_inf;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q[i] > 0.0)
            top = std::max(top, s[i]);
    std::fill(out.begin(), out.end(), 0.0);
    if (top == neg_inf)
        return neg_inf;
    double z = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0.0) {
            out[i] = q[i] * std::exp(s[i] - top);
            z += out[i];
        }
    }
    for (double& v : out)
        v /= z;
    return top + std::log(z);
}

std::vector<double> payoff_table(const PricingConstraint& constraint, int rows, int cols, double unit) {
    std::vector<double> table(std::size_t(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            table[std::size_t(r) * cols + c] = payoff_eval(constraint, r * unit, c * unit);
    return table;
}

DualProblem::DualProblem(std::vector<double> prior_weights, std::vector<ConditionalLossDist> priors,
                         std::vector<PricingConstraint> constraints, int threads)
: prior_weights_(std::move(prior_weights)),
  priors_(std::move(priors)),
  constraints_(std::move(constraints)),
  threads_(resolve_threads(threads)) {
    check_priors(prior_weights_, priors_);
    blocks_.resize(priors_.size());
    for (std::size_t b = 0; b < priors_.size(); ++b) {
        const auto& slices = priors_[b].slices;
        blocks_[b].rows = slices.empty() ? 0 : slices.front().rows();
        blocks_[b].cols = slices.empty() ? 0 : slices.front().cols();
        for (const auto& s : slices)
            require(s.rows() == blocks_[b].rows && s.cols() == blocks_[b].cols, ErrorCode::invalid_input,
                    "conditional slices of one index must share a shape");
    }
    for (std::size_t k = 0; k < constraints_.size(); ++k) {
        constraints_[k].validate();
        IndexBlock& block = blocks_[block_of(priors_, constraints_[k].index_id)];
        block.constraint_ids.push_back(k);
        block.payoff.push_back(payoff_table(constraints_[k], block.rows, block.cols, priors_.front().grid.unit));
    }
}

std::vector<double> DualProblem::exponent(std::size_t b, const Eigen::VectorXd& lambdas) const {
    const IndexBlock& block = blocks_[b];
    std::vector<double> s(std::size_t(block.rows) * block.cols, 0.0);
    for (std::size_t j = 0; j < block.constraint_ids.size(); ++j) {
        const std::size_t k = block.constraint_ids[j];
        const double lambda = lambdas[Eigen::Index(k)];
        if (lambda == 0.0)
            continue;
        const double target = constraints_[k].target_el;
        const auto& f = block.payoff[j];
        for (std::size_t p = 0; p < s.size(); ++p)
            s[p] += lambda * (f[p] - target);
    }
    return s;
}

SmoothEvaluation DualProblem::evaluate(const Eigen::VectorXd& lambdas, bool with_hessian) const {
    require(std::size_t(lambdas.size()) == constraints_.size(), ErrorCode::invalid_input,
            "multiplier vector has the wrong dimension");
    const std::size_t nodes = prior_weights_.size();
    const std::size_t nb = blocks_.size();
    std::vector<std::vector<double>> s(nb);
    for (std::size_t b = 0; b < nb; ++b)
        s[b] = exponent(b, lambdas);

    std::vector<std::vector<TiltMoments>> moments(nodes, std::vector<TiltMoments>(nb));
    parallel_for(nodes, threads_, [&](std::size_t m) {
        if (prior_weights_[m] <= 0.0)
            return;
        for (std::size_t b = 0; b < nb; ++b)
            moments[m][b] = tilt_moments(priors_[b].slices[m].values(), s[b], blocks_[b].payoff, with_hessian);
    });

    std::vector<std::vector<double>> log_z(nb, std::vector<double>(nodes, 0.0));
    for (std::size_t m = 0; m < nodes; ++m)
        for (std::size_t b = 0; b < nb; ++b)
            log_z[b][m] = moments[m][b].log_z;
    const PosteriorWeights h = posterior_factor_weights(prior_weights_, log_z);

    const Eigen::Index dim = Eigen::Index(constraints_.size());
    SmoothEvaluation out;
    out.value = h.log_normalizer;
    for (Eigen::Index k = 0; k < dim; ++k)
        out.value += 0.5 * lambdas[k] * lambdas[k] * constraints_[k].sigma * constraints_[k].sigma;

    // Conditional means per node, by global constraint id.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd node_mean(dim, Eigen::Index(nodes));
    node_mean.setZero();
    for (std::size_t m = 0; m < nodes; ++m) {
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t j = 0; j < blocks_[b].constraint_ids.size(); ++j)
                node_mean(Eigen::Index(blocks_[b].constraint_ids[j]), Eigen::Index(m)) = moments[m][b].mean[j];
        mean += h.weights[m] * node_mean.col(Eigen::Index(m));
    }
    out.gradient.resize(dim);
    for (Eigen::Index k = 0; k < dim; ++k)
        out.gradient[k] = mean[k] - constraints_[k].target_el +
                          lambdas[k] * constraints_[k].sigma * constraints_[k].sigma;

    if (with_hessian) {
        out.hessian = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t m = 0; m < nodes; ++m) {
            if (h.weights[m] == 0.0)
                continue;
            const Eigen::VectorXd d = node_mean.col(Eigen::Index(m)) - mean;
            out.hessian.noalias() += h.weights[m] * d * d.transpose();
            for (std::size_t b = 0; b < nb; ++b) {
                const auto& ids = blocks_[b].constraint_ids;
                const std::size_t nk = ids.size();
                for (std::size_t j = 0; j < nk; ++j)
                    for (std::size_t l = 0; l < nk; ++l)
                        out.hessian(Eigen::Index(ids[j]), Eigen::Index(ids[l])) +=
                            h.weights[m] * moments[m][b].covariance[j * nk + l];
            }
        }
        for (Eigen::Index k = 0; k < dim; ++k)
            out.hessian(k, k) += constraints_[k].sigma * constraints_[k].sigma;
    }
    return out;
}

CalibrationResult DualProblem::solution(const Eigen::VectorXd& lambdas) const {
    const SmoothEvaluation eval = evaluate(lambdas, false);
    const std::size_t nodes = prior_weights_.size();

    CalibrationResult out;
    out.constraints = constraints_;
    out.lambdas = lambdas;
    out.prior_weights = prior_weights_;
    out.objective_value = eval.value;
    out.gradient_norm = eval.gradient.size() ? eval.gradient.lpNorm<Eigen::Infinity>() : 0.0;

    std::vector<std::vector<double>> log_z(blocks_.size(), std::vector<double>(nodes, neg_inf));
    out.conditionals.resize(priors_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const std::vector<double> s = exponent(b, lambdas);
        ConditionalLossDist& tilted = out.conditionals[b];
        tilted.index_id = priors_[b].index_id;
        tilted.grid = priors_[b].grid;
        tilted.slices.resize(nodes);
        parallel_for(nodes, threads_, [&](std::size_t m) {
            JointPmf slice(blocks_[b].rows, blocks_[b].cols);
            log_z[b][m] = tilt_pmf(priors_[b].slices[m].values(), s, slice.values());
            tilted.slices[m] = std::move(slice);
        });
    }
    out.posterior_weights = posterior_factor_weights(prior_weights_, log_z).weights;

    out.model_el.resize(constraints_.size());
    out.residuals.resize(constraints_.size());
    for (std::size_t k = 0; k < constraints_.size(); ++k) {
        out.model_el[k] = eval.gradient[Eigen::Index(k)] + constraints_[k].target_el -
                          lambdas[Eigen::Index(k)] * constraints_[k].sigma * constraints_[k].sigma;
        out.residuals[k] = out.model_el[k] - constraints_[k].target_el;
    }
    return out;
}

CalibrationResult calibrate(std::span<const double> prior_weights, std::vector<ConditionalLossDist> priors,
                            std::vector<PricingConstraint> constraints, const CalibrationOptions& options) {
    DualProblem dual(std::vector<double>(prior_weights.begin(), prior_weights.end()), std::move(priors),
                     std::move(constraints), options.threads);
    NewtonOptions newton;
    newton.gradient_tolerance = options.tolerance;
    newton.max_iterations = options.max_iterations;
    const NewtonOutcome outcome = newton_minimize(
        [&](const Eigen::VectorXd& x) { return dual.evaluate(x, true); },
        Eigen::VectorXd::Zero(Eigen::Index(dual.dimension())), newton);
    CalibrationResult result = dual.solution(outcome.x);
    result.iterations = outcome.iterations;
    return result;
}

CalibrationResult factor_only_calibrate(std::span<const double> prior_weights,
                                        std::vector<ConditionalLossDist> priors,
                                        std::vector<PricingConstraint> constraints,
                                        const CalibrationOptions& options) {
    check_priors(prior_weights, priors);
    const std::size_t nodes = prior_weights.size();
    const Eigen::Index dim = Eigen::Index(constraints.size());

    // Prior conditional expected payoffs E_Q[F_k | m].
    Eigen::MatrixXd node_payoff(dim, Eigen::Index(nodes));
    for (Eigen::Index k = 0; k < dim; ++k) {
        constraints[k].validate();
        const ConditionalLossDist& prior = priors[block_of(priors, constraints[k].index_id)];
        const double unit = prior.grid.unit;
        for (std::size_t m = 0; m < nodes; ++m) {
            const JointPmf& q = prior.slices[m];
            double acc = 0.0;
            for (int r = 0; r < q.rows(); ++r)
                for (int c = 0; c < q.cols(); ++c)
                    if (q(r, c) > 0.0)
                        acc += q(r, c) * payoff_eval(constraints[k], r * unit, c * unit);
            node_payoff(k, Eigen::Index(m)) = acc;
        }
    }

    auto weights_at = [&](const Eigen::VectorXd& lambdas, double& log_norm) {
        std::vector<double> log_h(nodes);
        for (std::size_t m = 0; m < nodes; ++m) {
            if (prior_weights[m] <= 0.0) {
                log_h[m] = neg_inf;
                continue;
            }
            double e = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k)
                e -= lambdas[k] * (node_payoff(k, Eigen::Index(m)) - constraints[k].target_el);
            log_h[m] = std::log(prior_weights[m]) + e;
        }
        log_norm = log_sum_exp(log_h);
        std::vector<double> h(nodes);
        for (std::size_t m = 0; m < nodes; ++m)
            h[m] = log_h[m] == neg_inf ? 0.0 : std::exp(log_h[m] - log_norm);
        return h;
    };

    auto evaluate = [&](const Eigen::VectorXd& lambdas) {
        double log_norm = 0.0;
        const std::vector<double> h = weights_at(lambdas, log_norm);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
        for (std::size_t m = 0; m < nodes; ++m)
            mean += h[m] * node_payoff.col(Eigen::Index(m));
        SmoothEvaluation out;
        out.value = log_norm;
        out.gradient.resize(dim);
        out.hessian = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double s2 = constraints[k].sigma * constraints[k].sigma;
            out.value += 0.5 * lambdas[k] * lambdas[k] * s2;
            out.gradient[k] = -(mean[k] - constraints[k].target_el) + lambdas[k] * s2;
            out.hessian(k, k) += s2;
        }
        for (std::size_t m = 0; m < nodes; ++m) {
            const Eigen::VectorXd d = node_payoff.col(Eigen::Index(m)) - mean;
            out.hessian.noalias() += h[m] * d * d.transpose();
        }
        return out;
    };

    NewtonOptions newton;
    newton.gradient_tolerance = options.tolerance;
    newton.max_iterations = options.max_iterations;
    const NewtonOutcome outcome = newton_minimize(evaluate, Eigen::VectorXd::Zero(dim), newton);

    CalibrationResult out;
    out.constraints = constraints;
    out.lambdas = outcome.x;
    out.prior_weights.assign(prior_weights.begin(), prior_weights.end());
    double log_norm = 0.0;
    out.posterior_weights = weights_at(outcome.x, log_norm);
    out.conditionals = std::move(priors);
    out.objective_value = outcome.last.value;
    out.gradient_norm = dim ? outcome.last.gradient.lpNorm<Eigen::Infinity>() : 0.0;
    out.iterations = outcome.iterations;
    out.model_el.resize(constraints.size());
    out.residuals.resize(constraints.size());
    for (Eigen::Index k = 0; k < dim; ++k) {
        double mean = 0.0;
        for (std::size_t m = 0; m < nodes; ++m)
            mean += out.posterior_weights[m] * node_payoff(k, Eigen::Index(m));
        out.model_el[k] = mean;
        out.residuals[k] = mean - constraints[k].target_el;
    }
    return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), ErrorCode::invalid_input, "KL divergence needs pmfs on the same support");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0)
            continue;
        require(q[i] > 0.0, ErrorCode::infinite_divergence,
                "P charges a point where Q vanishes; KL divergence is infinite");
        total += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(total, 0.0);
}

double joint_kl_divergence(const CalibrationResult& result, std::span<const double> prior_weights,
                           const std::vector<ConditionalLossDist>& priors) {
    double total = kl_divergence(result.posterior_weights, prior_weights);
    for (const auto& posterior : result.conditionals) {
        const ConditionalLossDist& prior = priors[block_of(priors, posterior.index_id)];
        for (std::size_t m = 0; m < posterior.nodes(); ++m) {
            const double h = result.posterior_weights[m];
            if (h > 0.0)
                total += h * kl_divergence(posterior.slices[m].values(), prior.slices[m].values());
        }
    }
    return total;
}

double conditional_mutual_information(const ConditionalLossDist& cond, std::span<const double> weights) {
    require(weights.size() == cond.nodes(), ErrorCode::invalid_input, "weights do not match the factor grid");
    double total = 0.0;
    for (std::size_t m = 0; m < cond.nodes(); ++m) {
        if (weights[m] <= 0.0)
            continue;
        const JointPmf& p = cond.slices[m];
        const Pmf px = p.relevant_marginal();
        const Pmf py = p.complement_marginal();
        double node_total = 0.0;
        for (int r = 0; r < p.rows(); ++r)
            for (int c = 0; c < p.cols(); ++c)
                if (p(r, c) > 0.0)
                    node_total += p(r, c) * std::log(p(r, c) / (px[r] * py[c]));
        total += weights[m] * node_total;
    }
    return std::max(total, 0.0);
}

double conditional_mutual_information(const CalibrationResult& result, int index_id) {
    return conditional_mutual_information(result.conditional(index_id), result.posterior_weights);
}

} // namespace entropic
