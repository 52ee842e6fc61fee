#pragma once

#include <entropic/prior_model.hpp>

#include <filesystem>
#include <vector>

namespace entropic {

/// Names of one index portfolio, split into the sub-portfolio that enters the
/// bespoke ("relevant") and the rest ("complement").
struct IndexPortfolio {
    int index_id = 1;
    std::vector<NameSpec> names;

    std::vector<const NameSpec*> bucket_names(Bucket bucket) const;
    double bucket_notional(Bucket bucket) const;
    double bucket_loss_given_default(Bucket bucket) const;
    /// Sum of p_i(T) * LGD_i over the bucket (or the whole index).
    double expected_loss(Bucket bucket, std::size_t horizon_index) const;
    double expected_loss(std::size_t horizon_index) const;
};

struct PortfolioSet {
    FactorParams params;
    std::vector<double> horizons;
    std::vector<IndexPortfolio> indices;

    const IndexPortfolio& index(int index_id) const;
    std::size_t horizon_index(double horizon) const;
    void validate() const;
};

/// Reads the JSON portfolio definition (see docs/formats.md).
PortfolioSet load_portfolio_file(const std::filesystem::path& path);

} // namespace entropic
