#pragma once

#include <entropic/basecorr_reference.hpp>
#include <entropic/bespoke_pricer.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace entropic::cli {

enum class Mode { calibrate_static, calibrate_dynamic, price_bespoke, map_basecorr };

Mode parse_mode(const std::string& text);
const char* mode_name(Mode mode) noexcept;

struct BasecorrConfig {
    std::filesystem::path curve;
    int reference_index = 1;
    MappingRule rule = MappingRule::atm;
    int quadrature_points = 40;
    /// Overrides of the pool expected losses used by the ATM rule.
    std::optional<double> bespoke_el;
    std::optional<double> index_el;
};

/// Paths are absolute after loading (resolved against the config directory).
struct RunConfig {
    Mode mode = Mode::calibrate_static;
    std::filesystem::path config_path;
    std::filesystem::path portfolio;
    std::optional<std::filesystem::path> constraints;
    std::optional<std::filesystem::path> tranches;
    std::optional<std::filesystem::path> discount_curve;
    std::optional<double> flat_rate;
    std::optional<std::filesystem::path> posterior_dir;
    std::filesystem::path output_dir = "out";
    int grid_n1 = 10;
    int grid_n2 = 10;
    double tolerance = 1e-9;
    int max_iterations = 200;
    int threads = 0;
    double persistence = 0.9;
    int coarsening = 1;
    std::optional<BespokeSpec> bespoke;
    std::optional<BasecorrConfig> basecorr;
    bool verbose = false;
};

RunConfig load_config(const std::filesystem::path& path);

/// Executes the run and writes every report into config.output_dir. Throws
/// entropic::Error on failure, leaving no partial outputs behind.
void run(const RunConfig& config);

} // namespace entropic::cli
