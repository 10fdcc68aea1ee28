#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppm/eventlog.hpp"
#include "ppm/experiments.hpp"
#include "ppm/features.hpp"
#include "ppm/models.hpp"
#include "ppm/training.hpp"

namespace ppm {

// Sectioned key=value config file; '#' starts a comment. Flag-style overrides
// use dotted keys ("model.seq_len=25").
class IniFile {
public:
    static IniFile parse_file(const std::string& path);
    static IniFile parse_text(const std::string& text);

    void set(const std::string& dotted_key, const std::string& value);
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const;

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct RunConfig {
    // paths
    std::string input_csv;
    std::string output_dir = ".";
    char delimiter = ',';

    // schema
    FeatureSchema schema;

    // label
    LabelRule label_rule;

    // split
    double test_fraction = 0.2;
    std::uint64_t master_seed = 42;

    // model / search
    ModelConfig model;
    std::vector<ModelKind> kinds; // for tune: which kinds to search
    std::size_t n_trials = 0;     // 0 = paper default (50; 100 for cnn)
    SearchGrid grid;
    bool grid_seq_lens_explicit = false;

    // analysis
    std::size_t earliness_max_prefix = 70;
    std::vector<AblationVariant> ablation_variants;
    std::size_t ablation_seeds = 3;

    // synthetic data source (used when input_csv is empty)
    std::optional<SyntheticLogSpec> synthetic;

    // Throws with every validation problem listed, not just the first.
    static RunConfig from_ini(const IniFile& ini);
};

std::vector<std::string> split_list(const std::string& text);

} // namespace ppm
