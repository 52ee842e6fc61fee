#include <entropic/csv.hpp>

#include <entropic/errors.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace entropic {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
        out.push_back(trim(field));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::string format(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    require(it != header.end(), ErrorCode::invalid_input, "missing CSV column '" + name + "'");
    return std::size_t(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(bool(in), ErrorCode::io, "cannot open " + path.string());
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty() || trim(line).front() == '#')
            continue;
        auto fields = split(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        require(fields.size() == table.header.size(), ErrorCode::invalid_input,
                path.filename().string() + ": row has " + std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
    }
    require(!table.header.empty(), ErrorCode::invalid_input, path.string() + " is empty");
    return table;
}

double parse_double(const std::string& field, const std::string& what) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    require(ec == std::errc() && ptr == field.data() + field.size(), ErrorCode::invalid_input,
            "cannot parse " + what + " '" + field + "' as a number");
    return value;
}

std::string format_number(double value) {
    return format("%.10g", value);
}

std::string format_exact(double value) {
    return format("%.17g", value);
}

std::string format_bp(double value) {
    return format("%.1f", value);
}

std::vector<PricingConstraint> load_constraints(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_index = t.column("index_id"), c_kind = t.column("kind"), c_low = t.column("K_low"),
                      c_high = t.column("K_high"), c_horizon = t.column("horizon"), c_el = t.column("target_el");
    const bool has_sigma = t.has_column("sigma");
    std::vector<PricingConstraint> out;
    for (const auto& row : t.rows) {
        PricingConstraint c;
        c.index_id = int(parse_double(row[c_index], "index_id"));
        c.kind = parse_constraint_kind(row[c_kind]);
        c.k_low = row[c_low].empty() ? 0.0 : parse_double(row[c_low], "K_low");
        c.k_high = row[c_high].empty() ? 0.0 : parse_double(row[c_high], "K_high");
        c.horizon = parse_double(row[c_horizon], "horizon");
        c.target_el = parse_double(row[c_el], "target_el");
        const std::string sigma = has_sigma ? row[t.column("sigma")] : std::string();
        c.sigma = sigma.empty() ? default_sigma : parse_double(sigma, "sigma");
        c.validate();
        out.push_back(c);
    }
    return out;
}

std::vector<TrancheSpec> load_tranches(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    std::vector<TrancheSpec> out;
    for (const auto& row : t.rows) {
        TrancheSpec s;
        s.k_low = parse_double(row[t.column("K_d")], "K_d");
        s.k_high = parse_double(row[t.column("K_u")], "K_u");
        s.maturity = parse_double(row[t.column("maturity")], "maturity");
        s.frequency = int(parse_double(row[t.column("frequency")], "frequency"));
        s.daycount = row[t.column("daycount")];
        s.validate();
        out.push_back(s);
    }
    return out;
}

DiscountCurve load_discount_curve(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    std::vector<double> times, factors;
    for (const auto& row : t.rows) {
        times.push_back(parse_double(row[t.column("t")], "t"));
        factors.push_back(parse_double(row[t.column("B")], "B"));
    }
    return DiscountCurve(std::move(times), std::move(factors));
}

std::vector<BaseCorrCurve> load_basecorr_curves(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    std::map<double, std::vector<std::pair<double, double>>> by_horizon;
    for (const auto& row : t.rows)
        by_horizon[parse_double(row[t.column("horizon")], "horizon")].emplace_back(
            parse_double(row[t.column("K")], "K"), parse_double(row[t.column("beta")], "beta"));
    std::vector<BaseCorrCurve> out;
    for (auto& [horizon, points] : by_horizon) {
        std::sort(points.begin(), points.end());
        std::vector<double> k, beta;
        for (const auto& [x, b] : points) {
            k.push_back(x);
            beta.push_back(b);
        }
        out.emplace_back(std::move(k), std::move(beta), horizon);
    }
    return out;
}

} // namespace entropic
