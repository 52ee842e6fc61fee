#include <entropic/portfolio.hpp>

#include <entropic/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace entropic {

std::vector<const NameSpec*> IndexPortfolio::bucket_names(Bucket bucket) const {
    std::vector<const NameSpec*> out;
    for (const auto& name : names)
        if (name.bucket == bucket)
            out.push_back(&name);
    return out;
}

double IndexPortfolio::bucket_notional(Bucket bucket) const {
    double total = 0.0;
    for (const auto& name : names)
        if (name.bucket == bucket)
            total += name.notional_weight;
    return total;
}

double IndexPortfolio::bucket_loss_given_default(Bucket bucket) const {
    double total = 0.0;
    for (const auto& name : names)
        if (name.bucket == bucket)
            total += name.loss_given_default();
    return total;
}

double IndexPortfolio::expected_loss(Bucket bucket, std::size_t horizon_index) const {
    double total = 0.0;
    for (const auto& name : names)
        if (name.bucket == bucket)
            total += name.default_prob_curve.at(horizon_index) * name.loss_given_default();
    return total;
}

double IndexPortfolio::expected_loss(std::size_t horizon_index) const {
    return expected_loss(Bucket::relevant, horizon_index) + expected_loss(Bucket::complement, horizon_index);
}

const IndexPortfolio& PortfolioSet::index(int index_id) const {
    for (const auto& p : indices)
        if (p.index_id == index_id)
            return p;
    throw Error(ErrorCode::invalid_input, "unknown index_id " + std::to_string(index_id));
}

std::size_t PortfolioSet::horizon_index(double horizon) const {
    for (std::size_t n = 0; n < horizons.size(); ++n)
        if (std::abs(horizons[n] - horizon) < 1e-9)
            return n;
    throw Error(ErrorCode::invalid_input, "horizon " + std::to_string(horizon) + " is not on the portfolio time grid");
}

void PortfolioSet::validate() const {
    params.validate();
    require(!horizons.empty(), ErrorCode::invalid_input, "portfolio must define at least one horizon");
    for (std::size_t n = 0; n < horizons.size(); ++n) {
        require(horizons[n] > 0.0, ErrorCode::invalid_input, "horizons must be positive");
        if (n > 0)
            require(horizons[n] > horizons[n - 1], ErrorCode::invalid_input, "horizons must be strictly increasing");
    }
    require(!indices.empty(), ErrorCode::invalid_input, "portfolio has no names");
    for (const auto& index : indices) {
        for (const auto& name : index.names) {
            name.validate();
            require(name.default_prob_curve.size() == horizons.size(), ErrorCode::invalid_input,
                    "name '" + name.id + "' must give one default probability per horizon");
            derive_two_factor_loadings(name, params);
        }
    }
}

PortfolioSet load_portfolio_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::io, "cannot open portfolio file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_input, "portfolio file " + path.string() + ": " + e.what());
    }

    PortfolioSet set;
    try {
        const auto& fp = doc.at("factor_params");
        set.params.rho = fp.at("rho").get<double>();
        set.params.alpha = fp.at("alpha").get<double>();
        set.horizons = doc.at("horizons").get<std::vector<double>>();

        std::map<int, IndexPortfolio> by_index;
        for (const auto& entry : doc.at("names")) {
            NameSpec name;
            name.id = entry.at("id").get<std::string>();
            name.index_id = entry.at("index_id").get<int>();
            name.bucket = parse_bucket(entry.at("bucket").get<std::string>());
            name.recovery = entry.at("recovery").get<double>();
            name.notional_weight = entry.at("notional_weight").get<double>();
            name.one_factor_loading = entry.at("one_factor_loading").get<double>();
            name.default_prob_curve = entry.at("default_probs").get<std::vector<double>>();
            auto& index = by_index[name.index_id];
            index.index_id = name.index_id;
            index.names.push_back(std::move(name));
        }
        for (auto& [id, index] : by_index)
            set.indices.push_back(std::move(index));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_input, "portfolio file " + path.string() + ": " + e.what());
    }
    set.validate();
    return set;
}

} // namespace entropic
