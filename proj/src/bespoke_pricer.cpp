#include <entropic/bespoke_pricer.hpp>

#include <entropic/errors.hpp>

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entropic {

namespace {

struct TiltStats {
    double log_z = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

// Moments of k * unit under q(k) exp(-lambda (k * unit - target)).
TiltStats tilt_stats(const Pmf& q, double unit, double lambda, double target) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < q.size(); ++k)
        if (q[k] > 0.0)
            top = std::max(top, -lambda * (k * unit - target));
    double z = 0.0, m1 = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q[k] <= 0.0)
            continue;
        const double w = q[k] * std::exp(-lambda * (k * unit - target) - top);
        z += w;
        m1 += w * k * unit;
    }
    TiltStats out;
    out.log_z = top + std::log(z);
    out.mean = m1 / z;
    double m2 = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q[k] <= 0.0)
            continue;
        const double d = k * unit - out.mean;
        m2 += q[k] * std::exp(-lambda * (k * unit - target) - top) * d * d;
    }
    out.variance = m2 / z;
    return out;
}

} // namespace

void BespokeSpec::validate() const {
    require(!members.empty(), ErrorCode::invalid_input, "bespoke needs at least one member bucket");
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            require(members[i] != members[j], ErrorCode::invalid_input, "bespoke member listed twice");
    if (adjustment) {
        require(std::find(members.begin(), members.end(), adjustment->index_id) != members.end(),
                ErrorCode::invalid_input, "adjusted bucket is not a bespoke member");
        for (double el : adjustment->target_el)
            require(el >= 0.0 && std::isfinite(el), ErrorCode::invalid_input, "adjustment target EL must be non-negative");
    }
}

double bespoke_notional(const PortfolioSet& portfolios, const BespokeSpec& spec) {
    spec.validate();
    double total = 0.0;
    for (int id : spec.members)
        total += portfolios.index(id).bucket_notional(Bucket::relevant);
    require(total > 0.0, ErrorCode::invalid_input, "bespoke has zero notional");
    if (spec.adjustment) {
        const double cap = portfolios.index(spec.adjustment->index_id).bucket_loss_given_default(Bucket::relevant);
        for (double el : spec.adjustment->target_el)
            require(el <= cap, ErrorCode::invalid_input, "adjustment target EL exceeds the bucket's maximum loss");
    }
    return total;
}

AdjustedBucket adjust_bespoke_names(const std::vector<Pmf>& conditional, double unit,
                                    std::span<const double> weights, double target_el) {
    require(conditional.size() == weights.size(), ErrorCode::invalid_input,
            "adjustment weights do not match the factor grid");
    double low = 0.0, high = 0.0, current = 0.0;
    for (std::size_t m = 0; m < conditional.size(); ++m) {
        if (weights[m] <= 0.0)
            continue;
        const Pmf& q = conditional[m];
        std::size_t first = q.size(), last = 0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            if (q[k] > 0.0) {
                first = std::min(first, k);
                last = k;
            }
            current += weights[m] * q[k] * k * unit;
        }
        require(first < q.size(), ErrorCode::invalid_input, "empty conditional pmf in bespoke adjustment");
        low += weights[m] * first * unit;
        high += weights[m] * last * unit;
    }

    AdjustedBucket out;
    out.conditional = conditional;
    if (std::abs(current - target_el) <= 1e-14)
        return out;
    if (!(target_el > low && target_el < high)) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "target EL " << target_el << " outside the attainable range (" << low << ", " << high << ")";
        throw Error(ErrorCode::infeasible, msg.str());
    }

    // d/dlambda sum_m h_m log Z_m = target - mixed mean, increasing in lambda.
    auto derivatives = [&](double lambda) {
        double mean = 0.0, var = 0.0;
        for (std::size_t m = 0; m < conditional.size(); ++m) {
            if (weights[m] <= 0.0)
                continue;
            const TiltStats t = tilt_stats(conditional[m], unit, lambda, target_el);
            mean += weights[m] * t.mean;
            var += weights[m] * t.variance;
        }
        return std::make_pair(target_el - mean, var);
    };
    const double direction = current > target_el ? 1.0 : -1.0;
    double far = direction;
    while (derivatives(far).first * direction < 0.0) {
        far *= 2.0;
        require(std::abs(far) < 1e15, ErrorCode::convergence, "cannot bracket the adjustment multiplier");
    }
    const double lo = std::min(0.0, far), hi = std::max(0.0, far);
    std::uintmax_t iterations = 200;
    out.lambda = boost::math::tools::newton_raphson_iterate(derivatives, 0.5 * (lo + hi), lo, hi,
                                                            std::numeric_limits<double>::digits, iterations);
    const double gap = derivatives(out.lambda).first;
    require(std::abs(gap) < 1e-10, ErrorCode::convergence, "bespoke adjustment did not reach its target EL");

    for (std::size_t m = 0; m < conditional.size(); ++m) {
        Pmf& p = out.conditional[m];
        const TiltStats t = tilt_stats(conditional[m], unit, out.lambda, target_el);
        for (std::size_t k = 0; k < p.size(); ++k)
            p[k] = conditional[m][k] > 0.0
                       ? conditional[m][k] * std::exp(-out.lambda * (k * unit - target_el) - t.log_z)
                       : 0.0;
    }
    return out;
}

LossDist bespoke_loss_dist(const CalibrationResult& calibration, const BespokeSpec& spec, double notional,
                           double horizon, std::size_t horizon_index) {
    spec.validate();
    require(notional > 0.0, ErrorCode::invalid_input, "bespoke notional must be positive");
    const auto& h = calibration.posterior_weights;
    const std::size_t nodes = h.size();

    std::vector<std::vector<Pmf>> buckets;
    double unit = 0.0;
    for (int id : spec.members) {
        const ConditionalLossDist& cond = calibration.conditional(id);
        require(cond.nodes() == nodes, ErrorCode::invalid_input,
                "member calibrations come from different factor grids");
        unit = cond.grid.unit;
        std::vector<Pmf> marginals;
        marginals.reserve(nodes);
        for (const auto& slice : cond.slices)
            marginals.push_back(slice.relevant_marginal());
        if (spec.adjustment && spec.adjustment->index_id == id) {
            require(horizon_index < spec.adjustment->target_el.size(), ErrorCode::invalid_input,
                    "adjustment has no target EL for this horizon");
            marginals = adjust_bespoke_names(marginals, unit, h, spec.adjustment->target_el[horizon_index]).conditional;
        }
        buckets.push_back(std::move(marginals));
    }

    std::vector<Pmf> per_node(nodes);
    for (std::size_t m = 0; m < nodes; ++m) {
        Pmf acc = buckets.front()[m];
        for (std::size_t b = 1; b < buckets.size(); ++b)
            acc = convolve(acc, buckets[b][m]);
        per_node[m] = std::move(acc);
    }
    return LossDist{mixture_unconditional(per_node, h), unit / notional, horizon};
}

std::vector<LossDist> bespoke_loss_dists(const std::vector<CalibrationResult>& calibrations,
                                         const std::vector<double>& horizons, const BespokeSpec& spec,
                                         double notional) {
    require(calibrations.size() == horizons.size(), ErrorCode::invalid_input, "one calibration per horizon");
    std::vector<LossDist> out;
    for (std::size_t n = 0; n < calibrations.size(); ++n) {
        require(calibrations[n].posterior_weights.size() == calibrations.front().posterior_weights.size(),
                ErrorCode::invalid_input, "calibrations come from different factor grids");
        out.push_back(bespoke_loss_dist(calibrations[n], spec, notional, horizons[n], n));
    }
    return out;
}

DiscountCurve::DiscountCurve(std::vector<double> times, std::vector<double> factors) {
    require(times.size() == factors.size() && !times.empty(), ErrorCode::invalid_input,
            "discount curve needs matching, non-empty pillars");
    times_ = {0.0};
    factors_ = {1.0};
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] == 0.0) {
            require(std::abs(factors[i] - 1.0) < 1e-12, ErrorCode::invalid_input, "discount factor at t=0 must be 1");
            continue;
        }
        require(times[i] > times_.back(), ErrorCode::invalid_input, "discount pillars must be increasing");
        require(factors[i] > 0.0 && factors[i] <= factors_.back(), ErrorCode::invalid_input,
                "discount factors must be positive and non-increasing");
        times_.push_back(times[i]);
        factors_.push_back(factors[i]);
    }
}

DiscountCurve DiscountCurve::flat(double rate) {
    require(rate >= 0.0, ErrorCode::invalid_input, "flat rate must be non-negative");
    return DiscountCurve({1.0}, {std::exp(-rate)});
}

double DiscountCurve::operator()(double t) const {
    require(t >= 0.0, ErrorCode::invalid_input, "discount factor requested at negative time");
    if (times_.size() == 1)
        return 1.0;
    std::size_t i = std::upper_bound(times_.begin(), times_.end(), t) - times_.begin();
    i = std::clamp<std::size_t>(i, 1, times_.size() - 1);
    const double t0 = times_[i - 1], t1 = times_[i];
    const double l0 = std::log(factors_[i - 1]), l1 = std::log(factors_[i]);
    return std::exp(l0 + (l1 - l0) * (t - t0) / (t1 - t0));
}

void TrancheSpec::validate() const {
    require(k_low >= 0.0 && k_low < k_high && k_high <= 1.0, ErrorCode::invalid_input,
            "tranche strikes must satisfy 0 <= K_d < K_u <= 1");
    require(maturity > 0.0, ErrorCode::invalid_input, "tranche maturity must be positive");
    require(frequency > 0, ErrorCode::invalid_input, "coupon frequency must be positive");
    require(notional > 0.0, ErrorCode::invalid_input, "tranche notional must be positive");
}

std::vector<double> TrancheSpec::coupon_dates() const {
    validate();
    const double step = 1.0 / frequency;
    std::vector<double> dates;
    for (int k = 0;; ++k) {
        const double t = maturity - k * step;
        if (t <= 1e-9)
            break;
        dates.push_back(t);
    }
    std::reverse(dates.begin(), dates.end());
    return dates;
}

std::vector<double> TrancheSpec::accruals() const {
    const auto dates = coupon_dates();
    const double scale = daycount == "ACT/360" ? 365.0 / 360.0 : 1.0;
    std::vector<double> out;
    double prev = 0.0;
    for (double t : dates) {
        out.push_back((t - prev) * scale);
        prev = t;
    }
    return out;
}

std::vector<double> tranche_el_curve(const std::vector<LossDist>& dists, const TrancheSpec& tranche) {
    tranche.validate();
    std::vector<double> out;
    for (const auto& d : dists)
        out.push_back(d.expected_tranche_loss(tranche.k_low, tranche.k_high) / (tranche.k_high - tranche.k_low));
    return out;
}

std::vector<double> interpolate_el(const std::vector<double>& horizons, const std::vector<double>& el,
                                   const std::vector<double>& dates) {
    require(horizons.size() == el.size() && !horizons.empty(), ErrorCode::invalid_input,
            "EL curve needs one value per horizon");
    std::vector<double> t{0.0}, v{0.0};
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        require(horizons[i] > t.back(), ErrorCode::invalid_input, "EL horizons must be positive and increasing");
        t.push_back(horizons[i]);
        v.push_back(el[i]);
    }
    std::vector<double> out;
    for (double d : dates) {
        require(d <= t.back() + 1e-9, ErrorCode::invalid_input, "tranche maturity beyond the last loss horizon");
        std::size_t i = std::upper_bound(t.begin(), t.end(), d) - t.begin();
        i = std::clamp<std::size_t>(i, 1, t.size() - 1);
        const double w = std::clamp((d - t[i - 1]) / (t[i] - t[i - 1]), 0.0, 1.0);
        out.push_back(v[i - 1] + w * (v[i] - v[i - 1]));
    }
    return out;
}

double default_leg(const std::vector<double>& dates, const std::vector<double>& el, const DiscountCurve& curve,
                   double notional) {
    require(dates.size() == el.size(), ErrorCode::invalid_input, "one EL per coupon date");
    double total = 0.0, prev_t = 0.0, prev_el = 0.0;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        total += 0.5 * (curve(prev_t) + curve(dates[i])) * (el[i] - prev_el);
        prev_t = dates[i];
        prev_el = el[i];
    }
    return notional * total;
}

double premium_leg(const std::vector<double>& dates, const std::vector<double>& accruals,
                   const std::vector<double>& el, const DiscountCurve& curve, double spread, double notional) {
    require(dates.size() == el.size() && dates.size() == accruals.size(), ErrorCode::invalid_input,
            "one EL and accrual per coupon date");
    double total = 0.0, prev_outstanding = 1.0;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        const double outstanding = 1.0 - el[i];
        total += accruals[i] * curve(dates[i]) * 0.5 * (prev_outstanding + outstanding);
        prev_outstanding = outstanding;
    }
    return spread * notional * total;
}

double par_spread(const std::vector<double>& dates, const std::vector<double>& accruals,
                  const std::vector<double>& el, const DiscountCurve& curve, double notional) {
    const double annuity = premium_leg(dates, accruals, el, curve, 1.0, notional);
    require(annuity > 0.0, ErrorCode::undefined_spread, "risky annuity is zero; par spread is undefined");
    return default_leg(dates, el, curve, notional) / annuity;
}

TranchePrice price_tranche(const std::vector<LossDist>& dists, const TrancheSpec& tranche,
                           const DiscountCurve& curve) {
    std::vector<double> horizons;
    for (const auto& d : dists)
        horizons.push_back(d.horizon);
    const auto dates = tranche.coupon_dates();
    const auto accruals = tranche.accruals();
    const auto el = interpolate_el(horizons, tranche_el_curve(dists, tranche), dates);

    TranchePrice out;
    for (std::size_t i = 1; i < el.size(); ++i)
        if (el[i] < el[i - 1] - 1e-14)
            out.monotone_el = false;
    const double annuity = premium_leg(dates, accruals, el, curve, 1.0, tranche.notional);
    out.default_leg = default_leg(dates, el, curve, tranche.notional) / tranche.notional;
    out.risky_annuity = annuity / tranche.notional;
    out.par_spread_bp = 1e4 * par_spread(dates, accruals, el, curve, tranche.notional);
    return out;
}

} // namespace entropic
