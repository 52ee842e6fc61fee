#include "run.hpp"

#include <entropic/csv.hpp>
#include <entropic/dynamic_bootstrap.hpp>
#include <entropic/errors.hpp>
#include <entropic/loss_engine.hpp>
#include <entropic/mce_calibrator.hpp>
#include <entropic/parallel.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

namespace entropic::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* tool_version = "1.0.0";

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    require(EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) == 1, ErrorCode::io,
            "SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(bool(in), ErrorCode::io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Report files are staged in memory and committed together at the end.
class OutputSet {
  public:
    std::ostringstream& file(const std::string& name) { return files_[name]; }

    void commit(const fs::path& dir) const {
        fs::path staging = dir;
        staging += ".partial";
        std::error_code ec;
        fs::remove_all(staging, ec);
        try {
            fs::create_directories(staging);
            for (const auto& [name, content] : files_) {
                std::ofstream out(staging / name, std::ios::binary);
                out << content.str();
                require(bool(out), ErrorCode::io, "cannot write " + (staging / name).string());
            }
            fs::create_directories(dir);
            for (const auto& [name, content] : files_)
                fs::rename(staging / name, dir / name);
            fs::remove_all(staging);
        } catch (const fs::filesystem_error& e) {
            fs::remove_all(staging, ec);
            throw Error(ErrorCode::io, e.what());
        } catch (...) {
            fs::remove_all(staging, ec);
            throw;
        }
    }

  private:
    std::map<std::string, std::ostringstream> files_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void log(const RunConfig& config, const std::string& message) {
    if (config.verbose)
        std::cerr << "[entropic_bespoke] " << message << '\n';
}

void warn(const std::string& message) {
    std::cerr << "warning: " << message << '\n';
}

// Tranche strikes covering [0, 1] together with both bucket totals make the
// constraint set linearly dependent.
void check_full_partitions(const std::vector<PricingConstraint>& constraints) {
    std::map<std::pair<int, double>, std::vector<const PricingConstraint*>> groups;
    for (const auto& c : constraints)
        groups[{c.index_id, c.horizon}].push_back(&c);
    for (const auto& [key, group] : groups) {
        std::vector<std::pair<double, double>> strikes;
        bool rel = false, comp = false;
        for (const auto* c : group) {
            if (c->kind == ConstraintKind::tranche)
                strikes.emplace_back(c->k_low, c->k_high);
            rel = rel || c->kind == ConstraintKind::relevant_total;
            comp = comp || c->kind == ConstraintKind::complement_total;
        }
        std::sort(strikes.begin(), strikes.end());
        double reach = 0.0;
        for (const auto& [lo, hi] : strikes)
            if (std::abs(lo - reach) < 1e-12)
                reach = hi;
        if (rel && comp && std::abs(reach - 1.0) < 1e-12)
            warn("index " + std::to_string(key.first) + " at horizon " + format_number(key.second) +
                 ": tranches partition [0, 1] and both bucket totals are constrained; the constraints are "
                 "linearly dependent");
    }
}

std::vector<std::vector<PricingConstraint>> group_by_horizon(const PortfolioSet& set,
                                                             const std::vector<PricingConstraint>& constraints) {
    std::vector<std::vector<PricingConstraint>> out(set.horizons.size());
    for (const auto& c : constraints)
        out[set.horizon_index(c.horizon)].push_back(c);
    return out;
}

struct StaticRun {
    MarketFactorGrid grid;
    LossGrid loss_grid;
    std::vector<CalibrationResult> results;
};

StaticRun calibrate_static(const RunConfig& config, const PortfolioSet& set,
                           const std::vector<PricingConstraint>& constraints) {
    StaticRun run;
    run.grid = build_market_grid(config.grid_n1, config.grid_n2, set.params);
    run.loss_grid = LossGrid::from_portfolios(set);
    const auto by_horizon = group_by_horizon(set, constraints);
    CalibrationOptions options{config.tolerance, config.max_iterations, config.threads};
    for (std::size_t n = 0; n < set.horizons.size(); ++n) {
        std::vector<ConditionalLossDist> priors;
        for (const auto& index : set.indices)
            priors.push_back(build_conditional_prior(index, set.params, run.grid, run.loss_grid, n, config.threads));
        log(config, "calibrating horizon " + format_number(set.horizons[n]) + " with " +
                        std::to_string(by_horizon[n].size()) + " constraints");
        run.results.push_back(calibrate(run.grid.weights(), std::move(priors), by_horizon[n], options));
        log(config, "  converged in " + std::to_string(run.results.back().iterations) + " iterations");
    }
    return run;
}

void write_residual_header(std::ostream& out) {
    out << "horizon,index_id,kind,K_low,K_high,target_el,model_el,residual,relative_error,lambda,sigma\n";
}

void write_residual_row(std::ostream& out, const PricingConstraint& c, double model, double residual, double lambda) {
    out << format_number(c.horizon) << ',' << c.index_id << ',' << constraint_kind_name(c.kind) << ','
        << format_number(c.k_low) << ',' << format_number(c.k_high) << ',' << format_number(c.target_el) << ','
        << format_number(model) << ',' << format_number(residual) << ','
        << (c.target_el > 0.0 ? format_number(residual / c.target_el) : std::string()) << ','
        << format_number(lambda) << ',' << format_number(c.sigma) << '\n';
}

void write_calibration_reports(OutputSet& out, const PortfolioSet& set, const StaticRun& run) {
    auto& residuals = out.file("residuals.csv");
    auto& lambdas = out.file("lambdas.csv");
    auto& factors = out.file("factor_distribution.csv");
    write_residual_header(residuals);
    lambdas << "horizon,index_id,kind,K_low,K_high,lambda\n";
    factors << "horizon,node,m1,m2,z1,z2,prior_weight,posterior_weight\n";
    for (std::size_t n = 0; n < run.results.size(); ++n) {
        const auto& r = run.results[n];
        for (std::size_t k = 0; k < r.constraints.size(); ++k) {
            const auto& c = r.constraints[k];
            write_residual_row(residuals, c, r.model_el[k], r.residuals[k], r.lambdas[Eigen::Index(k)]);
            lambdas << format_number(c.horizon) << ',' << c.index_id << ',' << constraint_kind_name(c.kind) << ','
                    << format_number(c.k_low) << ',' << format_number(c.k_high) << ','
                    << format_number(r.lambdas[Eigen::Index(k)]) << '\n';
        }
        for (std::size_t m = 0; m < run.grid.size(); ++m) {
            const FactorNode node = run.grid.node(m);
            factors << format_number(set.horizons[n]) << ',' << m << ',' << m / run.grid.size2() << ','
                    << m % run.grid.size2() << ',' << format_number(node.z1) << ',' << format_number(node.z2) << ','
                    << format_number(r.prior_weights[m]) << ',' << format_number(r.posterior_weights[m]) << '\n';
        }
    }
}

void write_posterior_dump(OutputSet& out, const PortfolioSet& set, const StaticRun& run) {
    auto& factors = out.file("posterior_factors.csv");
    auto& joint = out.file("posterior_joint.csv");
    factors << "horizon,node,posterior_weight\n";
    joint << "horizon,index_id,node,x_relevant,x_complement,probability\n";
    for (std::size_t n = 0; n < run.results.size(); ++n) {
        const auto& r = run.results[n];
        const std::string h = format_exact(set.horizons[n]);
        for (std::size_t m = 0; m < r.posterior_weights.size(); ++m)
            factors << h << ',' << m << ',' << format_exact(r.posterior_weights[m]) << '\n';
        for (const auto& cond : r.conditionals)
            for (std::size_t m = 0; m < cond.nodes(); ++m) {
                const JointPmf& p = cond.slices[m];
                for (int x = 0; x < p.rows(); ++x)
                    for (int y = 0; y < p.cols(); ++y)
                        if (p(x, y) != 0.0)
                            joint << h << ',' << cond.index_id << ',' << m << ',' << x << ',' << y << ','
                                  << format_exact(p(x, y)) << '\n';
            }
    }
}

// Rebuilds posterior measures from a dump written by write_posterior_dump.
std::vector<CalibrationResult> load_posterior_dump(const fs::path& dir, const PortfolioSet& set,
                                                   const MarketFactorGrid& grid, const LossGrid& loss_grid) {
    std::vector<CalibrationResult> out(set.horizons.size());
    for (auto& r : out) {
        r.prior_weights.assign(grid.weights().begin(), grid.weights().end());
        r.posterior_weights.assign(grid.size(), 0.0);
        for (const auto& index : set.indices) {
            ConditionalLossDist cond;
            cond.index_id = index.index_id;
            cond.grid = loss_grid;
            const auto rel = bucket_units(index, Bucket::relevant, loss_grid);
            const auto comp = bucket_units(index, Bucket::complement, loss_grid);
            const int rows = std::accumulate(rel.begin(), rel.end(), 0) + 1;
            const int cols = std::accumulate(comp.begin(), comp.end(), 0) + 1;
            cond.slices.assign(grid.size(), JointPmf(rows, cols));
            r.conditionals.push_back(std::move(cond));
        }
    }
    const CsvTable factors = read_csv(dir / "posterior_factors.csv");
    for (const auto& row : factors.rows) {
        const std::size_t n = set.horizon_index(parse_double(row[0], "horizon"));
        const std::size_t m = std::size_t(parse_double(row[1], "node"));
        require(m < grid.size(), ErrorCode::invalid_input, "posterior dump node outside the factor grid");
        out[n].posterior_weights[m] = parse_double(row[2], "posterior_weight");
    }
    const CsvTable joint = read_csv(dir / "posterior_joint.csv");
    for (const auto& row : joint.rows) {
        const std::size_t n = set.horizon_index(parse_double(row[0], "horizon"));
        const int id = int(parse_double(row[1], "index_id"));
        const std::size_t m = std::size_t(parse_double(row[2], "node"));
        const int x = int(parse_double(row[3], "x_relevant"));
        const int y = int(parse_double(row[4], "x_complement"));
        auto it = std::find_if(out[n].conditionals.begin(), out[n].conditionals.end(),
                               [&](const ConditionalLossDist& d) { return d.index_id == id; });
        require(it != out[n].conditionals.end(), ErrorCode::invalid_input, "posterior dump names an unknown index");
        ConditionalLossDist& cond = *it;
        require(m < cond.nodes() && x >= 0 && y >= 0 && x < cond.slices[m].rows() && y < cond.slices[m].cols(),
                ErrorCode::invalid_input, "posterior dump entry outside the loss lattice");
        cond.slices[m](x, y) = parse_double(row[5], "probability");
    }
    return out;
}

DiscountCurve discount_curve(const RunConfig& config) {
    if (config.discount_curve)
        return load_discount_curve(*config.discount_curve);
    return DiscountCurve::flat(config.flat_rate.value_or(0.0));
}

void write_pricing_header(std::ostream& out) {
    out << "tranche,K_d,K_u,maturity,par_spread_bp,risky_annuity,default_leg\n";
}

void write_pricing(OutputSet& out, const std::vector<TrancheSpec>& tranches,
                   const std::vector<LossDist>& dists, const DiscountCurve& curve) {
    auto& pricing = out.file("pricing.csv");
    write_pricing_header(pricing);
    for (const auto& t : tranches) {
        const TranchePrice p = price_tranche(dists, t, curve);
        const std::string label = format_number(100 * t.k_low) + "-" + format_number(100 * t.k_high) + "%";
        if (!p.monotone_el)
            warn("tranche " + label + " has a decreasing EL term structure");
        pricing << label << ',' << format_number(t.k_low) << ',' << format_number(t.k_high) << ','
                << format_number(t.maturity) << ',' << format_bp(p.par_spread_bp) << ','
                << format_number(p.risky_annuity) << ',' << format_number(p.default_leg) << '\n';
    }
}

std::vector<TrancheSpec> required_tranches(const RunConfig& config) {
    require(config.tranches.has_value(), ErrorCode::configuration, "mode needs a 'tranches' file");
    return load_tranches(*config.tranches);
}

const BespokeSpec& required_bespoke(const RunConfig& config) {
    require(config.bespoke.has_value(), ErrorCode::configuration, "mode needs a 'bespoke' section");
    return *config.bespoke;
}

void run_static(const RunConfig& config, const PortfolioSet& set, OutputSet& out) {
    require(config.constraints.has_value(), ErrorCode::configuration, "calibrate-static needs a 'constraints' file");
    const auto constraints = load_constraints(*config.constraints);
    check_full_partitions(constraints);
    const StaticRun run = calibrate_static(config, set, constraints);
    write_calibration_reports(out, set, run);
    write_posterior_dump(out, set, run);
}

void run_price_bespoke(const RunConfig& config, const PortfolioSet& set, OutputSet& out) {
    const BespokeSpec& spec = required_bespoke(config);
    const auto tranches = required_tranches(config);
    StaticRun run;
    if (config.posterior_dir) {
        run.grid = build_market_grid(config.grid_n1, config.grid_n2, set.params);
        run.loss_grid = LossGrid::from_portfolios(set);
        run.results = load_posterior_dump(*config.posterior_dir, set, run.grid, run.loss_grid);
        log(config, "loaded posterior measures from " + config.posterior_dir->string());
    } else {
        require(config.constraints.has_value(), ErrorCode::configuration,
                "price-bespoke needs a 'constraints' file or a 'posterior' dump");
        const auto constraints = load_constraints(*config.constraints);
        check_full_partitions(constraints);
        run = calibrate_static(config, set, constraints);
        write_calibration_reports(out, set, run);
        write_posterior_dump(out, set, run);
    }
    const double notional = bespoke_notional(set, spec);
    const auto dists = bespoke_loss_dists(run.results, set.horizons, spec, notional);
    write_pricing(out, tranches, dists, discount_curve(config));
}

void run_dynamic(const RunConfig& config, const PortfolioSet& set, OutputSet& out) {
    require(config.constraints.has_value(), ErrorCode::configuration, "calibrate-dynamic needs a 'constraints' file");
    const auto constraints = load_constraints(*config.constraints);
    check_full_partitions(constraints);

    DynamicPrior prior;
    prior.portfolios = &set;
    prior.grid = build_market_grid(config.grid_n1, config.grid_n2, set.params);
    prior.loss_grid = LossGrid::from_portfolios(set);
    prior.options.calibration = {config.tolerance, config.max_iterations, config.threads};
    prior.options.persistence = config.persistence;
    prior.options.coarsening = config.coarsening;
    const BootstrapResult result = bootstrap_all(prior, constraints);

    auto& residuals = out.file("residuals.csv");
    write_residual_header(residuals);
    auto& factors = out.file("factor_distribution.csv");
    factors << "horizon,node,m1,m2,z1,z2,prior_weight,posterior_weight\n";
    auto& state_csv = out.file("dynamic_state.csv");
    state_csv << "horizon,node";
    for (const auto& index : set.indices)
        state_csv << ",x_relevant_" << index.index_id << ",x_complement_" << index.index_id;
    state_csv << ",mass\n";

    for (std::size_t n = 0; n < result.kernels.size(); ++n) {
        const auto& kernel = result.kernels[n];
        const auto& state = result.states[n];
        log(config, "period " + std::to_string(n) + ": " + std::to_string(state.entries.size()) +
                        " state points, " + std::to_string(kernel.iterations) + " iterations");
        for (std::size_t k = 0; k < kernel.constraints.size(); ++k)
            write_residual_row(residuals, kernel.constraints[k], kernel.model_el[k], kernel.residuals[k],
                               kernel.lambdas[Eigen::Index(k)]);
        std::vector<double> marginal(prior.grid.size(), 0.0);
        for (const auto& e : state.entries)
            marginal[std::size_t(e.m)] += e.mass;
        for (std::size_t m = 0; m < prior.grid.size(); ++m) {
            const FactorNode node = prior.grid.node(m);
            factors << format_number(set.horizons[n]) << ',' << m << ',' << m / prior.grid.size2() << ','
                    << m % prior.grid.size2() << ',' << format_number(node.z1) << ',' << format_number(node.z2)
                    << ',' << format_number(prior.grid.weights()[m]) << ',' << format_number(marginal[m]) << '\n';
        }
        for (const auto& e : state.entries) {
            state_csv << format_number(set.horizons[n]) << ',' << e.m;
            for (int x : e.losses)
                state_csv << ',' << x;
            state_csv << ',' << format_exact(e.mass) << '\n';
        }
    }

    if (config.bespoke && config.tranches) {
        const BespokeSpec& spec = *config.bespoke;
        require(!spec.adjustment, ErrorCode::configuration,
                "the bespoke-name adjustment is only available with static calibration");
        const double notional = bespoke_notional(set, spec);
        std::vector<LossDist> dists;
        for (std::size_t n = 0; n < result.states.size(); ++n) {
            const auto& state = result.states[n];
            std::map<int, double> pmf;
            for (const auto& e : state.entries) {
                int x = 0;
                for (int id : spec.members)
                    x += e.losses[2 * state.slot(id)];
                pmf[x] += e.mass;
            }
            LossDist d{Pmf(std::size_t(pmf.empty() ? 1 : pmf.rbegin()->first + 1), 0.0),
                       prior.loss_grid.unit / notional, set.horizons[n]};
            for (const auto& [x, w] : pmf)
                d.pmf[std::size_t(x)] = w;
            dists.push_back(std::move(d));
        }
        write_pricing(out, required_tranches(config), dists, discount_curve(config));
    }
}

void run_map_basecorr(const RunConfig& config, const PortfolioSet& set, OutputSet& out) {
    require(config.basecorr.has_value(), ErrorCode::configuration, "map-basecorr needs a 'basecorr' section");
    const BasecorrConfig& bc = *config.basecorr;
    const BespokeSpec& spec = required_bespoke(config);
    const auto tranches = required_tranches(config);
    const auto curves = load_basecorr_curves(bc.curve);
    const IndexPortfolio& index = set.index(bc.reference_index);

    std::vector<const NameSpec*> bespoke_names, index_names;
    for (int id : spec.members)
        for (const NameSpec* n : set.index(id).bucket_names(Bucket::relevant))
            bespoke_names.push_back(n);
    for (const auto& n : index.names)
        index_names.push_back(&n);
    double bespoke_notional_total = 0.0, index_notional = 0.0;
    for (const NameSpec* n : bespoke_names)
        bespoke_notional_total += n->notional_weight;
    for (const NameSpec* n : index_names)
        index_notional += n->notional_weight;

    auto& mapping = out.file("basecorr_mapping.csv");
    mapping << "tranche,horizon,rule,K_bespoke,K_index,beta,iterations,matching_error\n";
    auto& pricing = out.file("pricing.csv");
    write_pricing_header(pricing);
    const DiscountCurve curve = discount_curve(config);

    for (const auto& t : tranches) {
        const std::string label = format_number(100 * t.k_low) + "-" + format_number(100 * t.k_high) + "%";
        std::vector<double> horizons, el;
        for (std::size_t n = 0; n < set.horizons.size(); ++n) {
            if (n > 0 && set.horizons[n - 1] >= t.maturity - 1e-9)
                break;
            const double horizon = set.horizons[n];
            const BaseCorrCurve* nearest = &curves.front();
            for (const auto& c : curves)
                if (std::abs(c.horizon() - horizon) < std::abs(nearest->horizon() - horizon))
                    nearest = &c;
            const ReferencePool bespoke_pool = reference_pool(bespoke_names, n);
            const ReferencePool index_pool = reference_pool(index_names, n);
            double l_b = 0.0, l_i = 0.0;
            for (const NameSpec* nm : bespoke_names)
                l_b += nm->default_prob_curve[n] * nm->loss_given_default() / bespoke_notional_total;
            for (const NameSpec* nm : index_names)
                l_i += nm->default_prob_curve[n] * nm->loss_given_default() / index_notional;
            l_b = bc.bespoke_el.value_or(l_b);
            l_i = bc.index_el.value_or(l_i);
            const int q = bc.quadrature_points;
            const LawAtCorrelation index_law = [&](double b) { return one_factor_loss_dist(index_pool, b, q); };
            const LawAtCorrelation bespoke_law = [&](double b) { return one_factor_loss_dist(bespoke_pool, b, q); };

            double betas[2] = {0.0, 0.0};
            const double strikes[2] = {t.k_low, t.k_high};
            for (int s = 0; s < 2; ++s) {
                if (strikes[s] <= 0.0)
                    continue;
                const StrikeMapping mapped =
                    map_strike(bc.rule, strikes[s], l_b, l_i, *nearest, index_law, bespoke_law);
                betas[s] = mapped.beta;
                mapping << label << ',' << format_number(horizon) << ',' << mapping_rule_name(bc.rule) << ','
                        << format_number(strikes[s]) << ',' << format_number(mapped.index_strike) << ','
                        << format_number(mapped.beta) << ',' << mapped.iterations << ','
                        << format_number(mapped.matching_error) << '\n';
            }
            horizons.push_back(horizon);
            el.push_back(basecorr_tranche_el(bespoke_pool, t.k_low, t.k_high, betas[0], betas[1], q));
        }
        const auto dates = t.coupon_dates();
        const auto accruals = t.accruals();
        const auto el_dates = interpolate_el(horizons, el, dates);
        const double annuity = premium_leg(dates, accruals, el_dates, curve, 1.0, 1.0);
        const double par = par_spread(dates, accruals, el_dates, curve, 1.0);
        pricing << label << ',' << format_number(t.k_low) << ',' << format_number(t.k_high) << ','
                << format_number(t.maturity) << ',' << format_bp(1e4 * par) << ',' << format_number(annuity) << ','
                << format_number(default_leg(dates, el_dates, curve, 1.0)) << '\n';
    }
}

json manifest(const RunConfig& config) {
    json inputs = json::array();
    std::string combined = slurp(config.config_path);
    inputs.push_back({{"role", "config"}, {"file", config.config_path.filename().string()},
                      {"sha256", sha256_hex(combined)}});
    auto add = [&](const char* role, const std::optional<fs::path>& path) {
        if (!path)
            return;
        const std::string data = slurp(*path);
        combined += data;
        inputs.push_back({{"role", role}, {"file", path->filename().string()}, {"sha256", sha256_hex(data)}});
    };
    add("portfolio", config.portfolio);
    add("constraints", config.constraints);
    add("tranches", config.tranches);
    add("discount_curve", config.discount_curve);
    if (config.basecorr)
        add("basecorr_curve", config.basecorr->curve);
    if (config.posterior_dir) {
        add("posterior_factors", *config.posterior_dir / "posterior_factors.csv");
        add("posterior_joint", *config.posterior_dir / "posterior_joint.csv");
    }
    json m;
    m["tool"] = "entropic_bespoke";
    m["version"] = tool_version;
    m["mode"] = mode_name(config.mode);
    m["inputs"] = inputs;
    m["inputs_hash"] = sha256_hex(combined);
    m["options"] = {{"grid", {config.grid_n1, config.grid_n2}},
                    {"tolerance", config.tolerance},
                    {"max_iterations", config.max_iterations},
                    {"persistence", config.persistence},
                    {"coarsening", config.coarsening}};
    m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                    "." + std::to_string(EIGEN_MINOR_VERSION)},
                      {"boost", BOOST_LIB_VERSION},
                      {"openssl", OpenSSL_version(OPENSSL_VERSION)}};
    return m;
}

} // namespace

Mode parse_mode(const std::string& text) {
    if (text == "calibrate-static")
        return Mode::calibrate_static;
    if (text == "calibrate-dynamic")
        return Mode::calibrate_dynamic;
    if (text == "price-bespoke")
        return Mode::price_bespoke;
    if (text == "map-basecorr")
        return Mode::map_basecorr;
    throw Error(ErrorCode::configuration, "unknown mode '" + text + "'");
}

const char* mode_name(Mode mode) noexcept {
    switch (mode) {
    case Mode::calibrate_static:
        return "calibrate-static";
    case Mode::calibrate_dynamic:
        return "calibrate-dynamic";
    case Mode::price_bespoke:
        return "price-bespoke";
    case Mode::map_basecorr:
        return "map-basecorr";
    }
    return "unknown";
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    require(bool(in), ErrorCode::io, "cannot open config " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::configuration, path.string() + ": " + e.what());
    }
    const fs::path base = fs::absolute(path).parent_path();
    RunConfig c;
    c.config_path = fs::absolute(path);
    try {
        if (doc.contains("mode"))
            c.mode = parse_mode(doc["mode"].get<std::string>());
        require(doc.contains("portfolio"), ErrorCode::configuration, "config needs a 'portfolio' file");
        c.portfolio = resolve(base, doc["portfolio"].get<std::string>());
        auto optional_path = [&](const char* key) -> std::optional<fs::path> {
            if (!doc.contains(key))
                return std::nullopt;
            return resolve(base, doc[key].get<std::string>());
        };
        c.constraints = optional_path("constraints");
        c.tranches = optional_path("tranches");
        c.discount_curve = optional_path("discount_curve");
        c.posterior_dir = optional_path("posterior");
        if (doc.contains("flat_rate"))
            c.flat_rate = doc["flat_rate"].get<double>();
        if (doc.contains("output_dir"))
            c.output_dir = resolve(base, doc["output_dir"].get<std::string>());
        else
            c.output_dir = base / "out";
        if (doc.contains("grid")) {
            c.grid_n1 = doc["grid"].value("n1", c.grid_n1);
            c.grid_n2 = doc["grid"].value("n2", c.grid_n2);
        }
        if (doc.contains("solver")) {
            const auto& s = doc["solver"];
            c.tolerance = s.value("tolerance", c.tolerance);
            c.max_iterations = s.value("max_iterations", c.max_iterations);
            c.threads = s.value("threads", c.threads);
        }
        if (doc.contains("dynamic")) {
            c.persistence = doc["dynamic"].value("persistence", c.persistence);
            c.coarsening = doc["dynamic"].value("coarsening", c.coarsening);
        }
        if (doc.contains("bespoke")) {
            const auto& b = doc["bespoke"];
            BespokeSpec spec;
            spec.members = b.at("members").get<std::vector<int>>();
            if (b.contains("adjustment")) {
                BespokeSpec::Adjustment adj;
                adj.index_id = b["adjustment"].at("index_id").get<int>();
                adj.target_el = b["adjustment"].at("target_el").get<std::vector<double>>();
                spec.adjustment = adj;
            }
            spec.validate();
            c.bespoke = spec;
        }
        if (doc.contains("basecorr")) {
            const auto& b = doc["basecorr"];
            BasecorrConfig bc;
            bc.curve = resolve(base, b.at("curve").get<std::string>());
            bc.reference_index = b.value("reference_index", bc.reference_index);
            if (b.contains("rule"))
                bc.rule = parse_mapping_rule(b["rule"].get<std::string>());
            bc.quadrature_points = b.value("quadrature_points", bc.quadrature_points);
            if (b.contains("bespoke_el"))
                bc.bespoke_el = b["bespoke_el"].get<double>();
            if (b.contains("index_el"))
                bc.index_el = b["index_el"].get<double>();
            c.basecorr = bc;
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::configuration, path.string() + ": " + e.what());
    }
    for (const auto& p : {std::optional<fs::path>(c.portfolio), c.constraints, c.tranches, c.discount_curve})
        if (p)
            require(fs::exists(*p), ErrorCode::io, "referenced file does not exist: " + p->string());
    require(c.grid_n1 >= 1 && c.grid_n2 >= 1, ErrorCode::configuration, "grid sizes must be positive");
    require(c.threads >= 0, ErrorCode::configuration, "thread count must be non-negative");
    return c;
}

void run(const RunConfig& config) {
    const PortfolioSet set = load_portfolio_file(config.portfolio);
    log(config, std::string("mode ") + mode_name(config.mode) + ", " + std::to_string(resolve_threads(config.threads)) +
                    " worker(s)");
    OutputSet out;
    switch (config.mode) {
    case Mode::calibrate_static:
        run_static(config, set, out);
        break;
    case Mode::calibrate_dynamic:
        run_dynamic(config, set, out);
        break;
    case Mode::price_bespoke:
        run_price_bespoke(config, set, out);
        break;
    case Mode::map_basecorr:
        run_map_basecorr(config, set, out);
        break;
    }
    out.file("manifest.json") << manifest(config).dump(2) << '\n';
    out.commit(config.output_dir);
    log(config, "wrote reports to " + config.output_dir.string());
}

} // namespace entropic::cli
