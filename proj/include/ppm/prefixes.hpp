#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppm/eventlog.hpp"

namespace ppm {

// Column order of encoded model inputs: categorical features first (schema
// order), then range features (schema order).
struct ColumnLayout {
    std::vector<std::string> cat_features;
    std::vector<std::string> range_features;

    static ColumnLayout from_schema(const FeatureSchema& schema);
    bool operator==(const ColumnLayout&) const = default;
};

// One bottom-aligned window: the last prefix rows are real events, everything
// above is padding (categorical 0, range 0.0).
struct PrefixMatrix {
    std::string case_id;
    int target = 0;
    std::size_t prefix_length = 0;
    std::vector<std::int32_t> cats;  // [seq_len * n_cat]
    std::vector<double> ranges;      // [seq_len * n_range]
};

struct PrefixDataset {
    std::size_t seq_len = 0;
    ColumnLayout layout;
    std::vector<PrefixMatrix> matrices;
};

std::vector<PrefixMatrix> window_case(const Case& c, const ColumnLayout& layout,
                                      std::size_t seq_len);
PrefixDataset window_log(const EventLog& log, std::size_t seq_len);
PrefixDataset truncate_to_max_prefix(const PrefixDataset& ds, std::size_t max_prefix);

// Flat binary layout plus a CSV sidecar index (case_id, prefix_length, target).
void save_dataset(const PrefixDataset& ds, std::ostream& out);
PrefixDataset load_dataset(std::istream& in);
void write_sidecar_index(const PrefixDataset& ds, std::ostream& out);

} // namespace ppm
