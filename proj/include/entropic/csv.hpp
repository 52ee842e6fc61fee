#pragma once

#include <entropic/basecorr_reference.hpp>
#include <entropic/bespoke_pricer.hpp>
#include <entropic/mce_calibrator.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace entropic {

/// Comma-separated table with a header row. Fields are trimmed; quoting is
/// not supported.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
double parse_double(const std::string& field, const std::string& what);

/// 10 significant digits.
std::string format_number(double value);
/// Round-trip precision (17 significant digits).
std::string format_exact(double value);
/// Basis points to one decimal.
std::string format_bp(double value);

inline constexpr double default_sigma = 1e-4;

/// Missing or empty sigma fields default to `default_sigma`.
std::vector<PricingConstraint> load_constraints(const std::filesystem::path& path);
std::vector<TrancheSpec> load_tranches(const std::filesystem::path& path);
DiscountCurve load_discount_curve(const std::filesystem::path& path);
/// One curve per distinct horizon, in increasing horizon order.
std::vector<BaseCorrCurve> load_basecorr_curves(const std::filesystem::path& path);

} // namespace entropic
