#pragma once

#include <entropic/loss_engine.hpp>
#include <entropic/mce_calibrator.hpp>
#include <entropic/portfolio.hpp>

#include <optional>
#include <string>
#include <vector>

namespace entropic {

/// Bespoke portfolio made of the relevant buckets of some indices. The
/// optional adjustment re-targets the expected loss of one member bucket
/// (stand-in for non-index names) at every pricing horizon.
struct BespokeSpec {
    struct Adjustment {
        int index_id = 1;
        /// Target bucket EL per horizon, as a fraction of index notional.
        std::vector<double> target_el;
    };

    std::vector<int> members;
    std::optional<Adjustment> adjustment;

    void validate() const;
};

/// Sum of member-bucket notionals, as a fraction of one index notional.
double bespoke_notional(const PortfolioSet& portfolios, const BespokeSpec& spec);

struct AdjustedBucket {
    /// Adjusted P(X | m) per node, in lattice units.
    std::vector<Pmf> conditional;
    double lambda = 0.0;
};

/// P(X | m) proportional to Q(X | m) exp(-lambda (X - target)) with X = k * unit
/// and lambda chosen so that the h-mixed mean equals `target_el`.
AdjustedBucket adjust_bespoke_names(const std::vector<Pmf>& conditional, double unit,
                                    std::span<const double> weights, double target_el);

/// Bespoke loss law at one horizon from a joint calibration. `horizon_index`
/// selects the adjustment target. The result's unit is a fraction of
/// bespoke notional.
LossDist bespoke_loss_dist(const CalibrationResult& calibration, const BespokeSpec& spec, double notional,
                           double horizon, std::size_t horizon_index = 0);

std::vector<LossDist> bespoke_loss_dists(const std::vector<CalibrationResult>& calibrations,
                                         const std::vector<double>& horizons, const BespokeSpec& spec,
                                         double notional);

/// Discount factors with log-linear interpolation between pillars, B(0) = 1
/// and flat forward rates beyond the last pillar.
class DiscountCurve {
  public:
    DiscountCurve() = default;
    DiscountCurve(std::vector<double> times, std::vector<double> factors);

    static DiscountCurve flat(double rate);

    double operator()(double t) const;
    std::span<const double> times() const { return times_; }
    std::span<const double> factors() const { return factors_; }

  private:
    std::vector<double> times_{0.0};
    std::vector<double> factors_{1.0};
};

struct TrancheSpec {
    double k_low = 0.0;
    double k_high = 1.0;
    double maturity = 5.0;
    /// Coupons per year.
    int frequency = 4;
    std::string daycount = "ACT/360";
    double notional = 1.0;

    void validate() const;
    /// Payment dates rolled back from maturity; the first period may be short.
    std::vector<double> coupon_dates() const;
    /// Accrual fraction of each coupon period.
    std::vector<double> accruals() const;
};

/// Tranche EL per horizon, normalised by tranche width.
std::vector<double> tranche_el_curve(const std::vector<LossDist>& dists, const TrancheSpec& tranche);

/// Linear interpolation of an EL term structure (with EL(0) = 0) onto dates.
std::vector<double> interpolate_el(const std::vector<double>& horizons, const std::vector<double>& el,
                                   const std::vector<double>& dates);

/// `el` holds the tranche EL at each coupon date.
double default_leg(const std::vector<double>& dates, const std::vector<double>& el, const DiscountCurve& curve,
                   double notional);
double premium_leg(const std::vector<double>& dates, const std::vector<double>& accruals,
                   const std::vector<double>& el, const DiscountCurve& curve, double spread, double notional);
double par_spread(const std::vector<double>& dates, const std::vector<double>& accruals,
                  const std::vector<double>& el, const DiscountCurve& curve, double notional);

struct TranchePrice {
    double par_spread_bp = 0.0;
    /// Premium leg per unit spread and unit notional.
    double risky_annuity = 0.0;
    /// Default leg per unit notional.
    double default_leg = 0.0;
    /// False when the interpolated EL curve decreases somewhere.
    bool monotone_el = true;
};

TranchePrice price_tranche(const std::vector<LossDist>& dists, const TrancheSpec& tranche,
                           const DiscountCurve& curve);

} // namespace entropic
