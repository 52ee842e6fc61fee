#include <entropic/basecorr_reference.hpp>

#include <entropic/errors.hpp>
#include <entropic/prior_model.hpp>

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entropic {

namespace {

void require_correlation(double beta) {
    require(beta > 0.0 && beta < 1.0, ErrorCode::invalid_input, "base correlation must lie in (0, 1)");
}

// Fritsch-Carlson slopes: harmonic-type limiting of the three-point slopes.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> secant(n - 1), slope(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        secant[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    slope.front() = secant.front();
    slope.back() = secant.back();
    for (std::size_t i = 1; i + 1 < n; ++i)
        slope[i] = secant[i - 1] * secant[i] <= 0.0 ? 0.0 : 0.5 * (secant[i - 1] + secant[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (secant[i] == 0.0) {
            slope[i] = slope[i + 1] = 0.0;
            continue;
        }
        const double a = slope[i] / secant[i], b = slope[i + 1] / secant[i];
        const double r = a * a + b * b;
        if (r > 9.0) {
            const double t = 3.0 / std::sqrt(r);
            slope[i] = t * a * secant[i];
            slope[i + 1] = t * b * secant[i];
        }
    }
    return slope;
}

} // namespace

BaseCorrCurve::BaseCorrCurve(std::vector<double> strikes, std::vector<double> betas, double horizon)
: strikes_(std::move(strikes)), betas_(std::move(betas)), horizon_(horizon) {
    require(!strikes_.empty() && strikes_.size() == betas_.size(), ErrorCode::invalid_input,
            "base correlation curve needs matching, non-empty pillars");
    for (std::size_t i = 0; i < strikes_.size(); ++i) {
        require_correlation(betas_[i]);
        require(i == 0 || strikes_[i] > strikes_[i - 1], ErrorCode::invalid_input,
                "base correlation strikes must be increasing");
    }
    if (strikes_.size() >= 2) {
        auto x = strikes_, y = betas_;
        auto d = monotone_slopes(x, y);
        spline_.emplace(std::move(x), std::move(y), std::move(d));
    }
}

double BaseCorrCurve::operator()(double k) const {
    if (!spline_ || k <= strikes_.front())
        return betas_.front();
    if (k >= strikes_.back())
        return betas_.back();
    return (*spline_)(k);
}

ReferencePool reference_pool(const std::vector<const NameSpec*>& names, std::size_t horizon_index) {
    double notional = 0.0;
    for (const NameSpec* n : names)
        notional += n->notional_weight;
    require(notional > 0.0, ErrorCode::invalid_input, "reference pool has zero notional");
    ReferencePool pool;
    for (const NameSpec* n : names) {
        require(horizon_index < n->default_prob_curve.size(), ErrorCode::invalid_input,
                "name '" + n->id + "' has no default probability for the requested horizon");
        pool.default_probs.push_back(n->default_prob_curve[horizon_index]);
        pool.loss_fractions.push_back(n->loss_given_default() / notional);
    }
    return pool;
}

ReferencePool reference_pool(const IndexPortfolio& portfolio, std::size_t horizon_index) {
    std::vector<const NameSpec*> names;
    for (const auto& n : portfolio.names)
        names.push_back(&n);
    return reference_pool(names, horizon_index);
}

LossDist one_factor_loss_dist(const ReferencePool& pool, double beta, int quadrature_points) {
    require_correlation(beta);
    require(pool.default_probs.size() == pool.loss_fractions.size(), ErrorCode::invalid_input,
            "reference pool probabilities and losses differ in length");
    double unit = std::numeric_limits<double>::infinity();
    for (double l : pool.loss_fractions)
        if (l > 0.0)
            unit = std::min(unit, l);
    if (!std::isfinite(unit))
        return LossDist{{1.0}, 1.0, 0.0};
    LossGrid grid{unit, 0};
    std::vector<int> units;
    for (double l : pool.loss_fractions) {
        units.push_back(grid.units_for(l));
        grid.max_units += units.back();
    }
    const TwoFactorLoadings loadings{std::sqrt(beta), 0.0, std::sqrt(1.0 - beta)};
    const QuadratureRule rule = gauss_hermite_rule(quadrature_points);
    std::vector<Pmf> per_node;
    std::vector<double> probs(pool.default_probs.size());
    for (double z : rule.nodes) {
        for (std::size_t i = 0; i < probs.size(); ++i)
            probs[i] = conditional_default_prob(pool.default_probs[i], loadings, FactorNode{z, 0.0});
        per_node.push_back(bucket_loss_pmf(probs, units, grid.max_units));
    }
    return LossDist{mixture_unconditional(per_node, rule.weights), unit, 0.0};
}

double base_tranche_el(const LossDist& dist, double k) {
    require(k > 0.0, ErrorCode::invalid_input, "base tranche strike must be positive");
    return dist.expected_tranche_loss(0.0, k) / k;
}

double base_tranche_el(const ReferencePool& pool, double k, double beta, int quadrature_points) {
    return base_tranche_el(one_factor_loss_dist(pool, beta, quadrature_points), k);
}

double basecorr_tranche_el(const ReferencePool& pool, double k_low, double k_high, double beta_low,
                           double beta_high, int quadrature_points) {
    require(k_low >= 0.0 && k_low < k_high, ErrorCode::invalid_input, "tranche strikes must satisfy K_d < K_u");
    const double upper = k_high * base_tranche_el(pool, k_high, beta_high, quadrature_points);
    const double lower = k_low > 0.0 ? k_low * base_tranche_el(pool, k_low, beta_low, quadrature_points) : 0.0;
    return (upper - lower) / (k_high - k_low);
}

double implied_base_correlation(const ReferencePool& pool, double k, double target_base_el, int quadrature_points) {
    auto gap = [&](double beta) { return base_tranche_el(pool, k, beta, quadrature_points) - target_base_el; };
    const double lo = 1e-6, hi = 1.0 - 1e-6;
    const double f_lo = gap(lo), f_hi = gap(hi);
    if (f_lo == 0.0)
        return lo;
    if (f_hi == 0.0)
        return hi;
    require(f_lo * f_hi < 0.0, ErrorCode::no_solution, "base-tranche EL is not attainable by any flat correlation");
    std::uintmax_t iterations = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        gap, lo, hi, f_lo, f_hi, [](double a, double b) { return std::abs(b - a) < 1e-13; }, iterations);
    return 0.5 * (bracket.first + bracket.second);
}

const char* mapping_rule_name(MappingRule rule) noexcept {
    switch (rule) {
    case MappingRule::absolute:
        return "absolute";
    case MappingRule::atm:
        return "atm";
    case MappingRule::probability_matching:
        return "probability_matching";
    }
    return "unknown";
}

MappingRule parse_mapping_rule(const std::string& text) {
    if (text == "absolute")
        return MappingRule::absolute;
    if (text == "atm")
        return MappingRule::atm;
    if (text == "probability_matching")
        return MappingRule::probability_matching;
    throw Error(ErrorCode::invalid_input, "unknown mapping rule '" + text + "'");
}

double loss_cdf(const LossDist& dist, double x) {
    if (x < 0.0)
        return 0.0;
    const double pos = x / dist.unit;
    const std::size_t k = std::size_t(std::floor(pos));
    double cdf = 0.0;
    for (std::size_t j = 0; j <= k && j < dist.pmf.size(); ++j)
        cdf += dist.pmf[j];
    if (k + 1 < dist.pmf.size())
        cdf += (pos - double(k)) * dist.pmf[k + 1];
    return std::min(cdf, 1.0);
}

double loss_quantile(const LossDist& dist, double probability) {
    double cdf = dist.pmf.empty() ? 0.0 : dist.pmf[0];
    require(probability >= cdf && probability <= 1.0, ErrorCode::no_solution,
            "cumulative probability outside the range of the loss law");
    for (std::size_t k = 1; k < dist.pmf.size(); ++k) {
        const double next = cdf + dist.pmf[k];
        if (probability <= next && dist.pmf[k] > 0.0)
            return dist.unit * (double(k - 1) + (probability - cdf) / dist.pmf[k]);
        cdf = next;
    }
    return dist.unit * double(dist.pmf.empty() ? 0 : dist.pmf.size() - 1);
}

StrikeMapping map_strike(MappingRule rule, double k_bespoke, double bespoke_el, double index_el,
                         const BaseCorrCurve& index_curve, const LawAtCorrelation& index_law,
                         const LawAtCorrelation& bespoke_law, const MappingOptions& options) {
    require(k_bespoke > 0.0, ErrorCode::invalid_input, "bespoke strike must be positive");
    StrikeMapping out;
    switch (rule) {
    case MappingRule::absolute:
        out.index_strike = k_bespoke;
        break;
    case MappingRule::atm:
        require(index_el > 0.0 && bespoke_el > 0.0, ErrorCode::invalid_input,
                "ATM mapping needs positive index and bespoke expected losses");
        out.index_strike = k_bespoke * index_el / bespoke_el;
        break;
    case MappingRule::probability_matching: {
        require(bool(index_law) && bool(bespoke_law), ErrorCode::invalid_input,
                "probability matching needs index and bespoke loss laws");
        double k = k_bespoke;
        for (int iter = 1; iter <= options.max_iterations; ++iter) {
            const double beta = index_curve(k);
            const double target = loss_cdf(bespoke_law(beta), k_bespoke);
            const LossDist index = index_law(beta);
            const double matched = loss_quantile(index, target);
            const double step = options.damping * (matched - k);
            if (std::abs(step) < options.tolerance) {
                out.index_strike = matched;
                out.iterations = iter;
                const double b = index_curve(matched);
                out.matching_error = loss_cdf(index_law(b), matched) - loss_cdf(bespoke_law(b), k_bespoke);
                out.beta = b;
                return out;
            }
            k += step;
        }
        std::ostringstream msg;
        msg << "probability matching did not converge for bespoke strike " << k_bespoke << " within "
            << options.max_iterations << " iterations";
        throw Error(ErrorCode::no_solution, msg.str());
    }
    }
    out.beta = index_curve(out.index_strike);
    return out;
}

SkewPartials skew_partials(const BaseCorrCurve& moneyness_curve, double k, double expected_loss) {
    require(expected_loss > 0.0, ErrorCode::invalid_input, "skew partials need a positive expected loss");
    const double x = k / expected_loss;
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    const double slope = (moneyness_curve(x + h) - moneyness_curve(x - h)) / (2.0 * h);
    SkewPartials out;
    out.d_strike = slope / expected_loss;
    out.d_expected_loss = -x * out.d_strike;
    return out;
}

} // namespace entropic
