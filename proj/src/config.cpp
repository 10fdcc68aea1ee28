#include "ppm/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ppm {

static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

IniFile IniFile::parse_text(const std::string& text) {
    IniFile ini;
    std::istringstream is(text);
    std::string line, section;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            ini.sections_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: bad line: " + line);
        ini.sections_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return ini;
}

void IniFile::set(const std::string& dotted_key, const std::string& value) {
    auto dot = dotted_key.find('.');
    if (dot == std::string::npos)
        throw std::runtime_error("config: override key must be section.key: " + dotted_key);
    sections_[dotted_key.substr(0, dot)][dotted_key.substr(dot + 1)] = value;
}

std::optional<std::string> IniFile::get(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

bool IniFile::has_section(const std::string& section) const {
    return sections_.count(section) > 0;
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    auto v = get(section, key);
    return v ? *v : fallback;
}

namespace {

struct ErrorCollector {
    std::vector<std::string> errors;
    void add(const std::string& e) { errors.push_back(e); }
    void finish() const {
        if (errors.empty()) return;
        std::string msg = "config validation failed:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw std::runtime_error(msg);
    }
};

template <typename Fn>
void try_parse(ErrorCollector& ec, const std::string& what, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        ec.add(what + ": " + e.what());
    }
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& s : split_list(text)) out.push_back(std::stoul(s));
    return out;
}

} // namespace

RunConfig RunConfig::from_ini(const IniFile& ini) {
    RunConfig rc;
    ErrorCollector ec;

    rc.input_csv = ini.get_or("paths", "input_csv", "");
    rc.output_dir = ini.get_or("paths", "output_dir", ".");
    std::string delim = ini.get_or("paths", "delimiter", ",");
    if (delim == "tab" || delim == "\\t") rc.delimiter = '\t';
    else if (delim.size() == 1) rc.delimiter = delim[0];
    else ec.add("paths.delimiter: must be a single character or 'tab'");

    // schema
    rc.schema.case_id_column = ini.get_or("schema", "case_id_column", "case");
    rc.schema.timestamp_column = ini.get_or("schema", "timestamp_column", "ts");
    rc.schema.activity_column = ini.get_or("schema", "activity_column", "activity");
    rc.schema.timestamp_format = ini.get_or("schema", "timestamp_format", "%Y-%m-%d %H:%M:%S");
    for (const auto& name : split_list(ini.get_or("schema", "categorical", "")))
        rc.schema.features.push_back({name, FeatureKind::Categorical, FeatureSource::Raw});
    for (const auto& name : split_list(ini.get_or("schema", "range", "")))
        rc.schema.features.push_back({name, FeatureKind::Range, FeatureSource::Raw});
    if (!rc.schema.find(rc.schema.activity_column))
        rc.schema.features.insert(rc.schema.features.begin(),
                                  {rc.schema.activity_column, FeatureKind::Categorical,
                                   FeatureSource::Raw});
    try_parse(ec, "schema", [&] { rc.schema.validate(); });

    // label
    for (const auto& a : split_list(ini.get_or("label", "outcome", "")))
        rc.label_rule.outcome_activities.insert(a);
    for (const auto& a : split_list(ini.get_or("label", "positive", "")))
        rc.label_rule.positive_activities.insert(a);
    std::string policy = ini.get_or("label", "unlabeled_policy", "drop");
    if (policy == "drop") rc.label_rule.unlabeled_policy = LabelRule::UnlabeledPolicy::Drop;
    else if (policy == "error") rc.label_rule.unlabeled_policy = LabelRule::UnlabeledPolicy::Error;
    else ec.add("label.unlabeled_policy: must be drop or error");

    // split
    try_parse(ec, "split.test_fraction",
              [&] { rc.test_fraction = std::stod(ini.get_or("split", "test_fraction", "0.2")); });
    if (rc.test_fraction <= 0.0 || rc.test_fraction >= 1.0)
        ec.add("split.test_fraction: must be in (0,1)");
    try_parse(ec, "split.seed",
              [&] { rc.master_seed = std::stoull(ini.get_or("split", "seed", "42")); });

    // model
    try_parse(ec, "model.kind", [&] {
        for (const auto& k : split_list(ini.get_or("model", "kind", "lstm,lstm_attention,cnn")))
            rc.kinds.push_back(model_kind_from_string(k));
        if (!rc.kinds.empty()) rc.model.kind = rc.kinds.front();
    });
    try_parse(ec, "model", [&] {
        rc.model.seq_len = std::stoul(ini.get_or("model", "seq_len", "15"));
        rc.model.batch_size = std::stoul(ini.get_or("model", "batch_size", "128"));
        rc.model.size_multiplier = std::stoul(ini.get_or("model", "size_multiplier", "1"));
        rc.model.kernel_size = std::stoul(ini.get_or("model", "kernel_size", "3"));
        rc.model.max_epochs = std::stoul(ini.get_or("model", "max_epochs", "100"));
        rc.model.learning_rate = std::stod(ini.get_or("model", "learning_rate", "0.001"));
        rc.model.seed = rc.master_seed;
        rc.n_trials = std::stoul(ini.get_or("model", "n_trials", "0"));
        rc.grid.max_epochs = rc.model.max_epochs;
        rc.grid.learning_rate = rc.model.learning_rate;
        if (auto v = ini.get("model", "grid_batch_sizes")) rc.grid.batch_sizes = parse_size_list(*v);
        if (auto v = ini.get("model", "grid_seq_lens")) {
            rc.grid.seq_lens = parse_size_list(*v);
            rc.grid_seq_lens_explicit = true;
        }
        if (auto v = ini.get("model", "grid_size_multipliers"))
            rc.grid.size_multipliers = parse_size_list(*v);
        if (auto v = ini.get("model", "grid_kernel_sizes")) rc.grid.kernel_sizes = parse_size_list(*v);
    });

    // analysis
    try_parse(ec, "analysis", [&] {
        rc.earliness_max_prefix =
            std::stoul(ini.get_or("analysis", "earliness_max_prefix", "70"));
        for (const auto& v : split_list(
                 ini.get_or("analysis", "ablation_variants", "base,no_time,no_evnr,shuffled")))
            rc.ablation_variants.push_back(ablation_variant_from_string(v));
        rc.ablation_seeds = std::stoul(ini.get_or("analysis", "ablation_seeds", "3"));
    });

    // synthetic source
    if (ini.has_section("synthetic")) {
        SyntheticLogSpec spec;
        try_parse(ec, "synthetic", [&] {
            spec.n_cases = std::stoul(ini.get_or("synthetic", "n_cases", "1000"));
            spec.min_events = std::stoul(ini.get_or("synthetic", "min_events", "4"));
            spec.max_events = std::stoul(ini.get_or("synthetic", "max_events", "12"));
            spec.alphabet = std::stoul(ini.get_or("synthetic", "alphabet", "10"));
            std::string sig = ini.get_or("synthetic", "signal", "activity_within_depth");
            if (sig == "activity_within_depth")
                spec.signal = SyntheticLogSpec::Signal::ActivityWithinDepth;
            else if (sig == "activity_anywhere")
                spec.signal = SyntheticLogSpec::Signal::ActivityAnywhere;
            else if (sig == "hour_of_day")
                spec.signal = SyntheticLogSpec::Signal::HourOfDay;
            else
                throw std::runtime_error("unknown signal: " + sig);
            spec.signal_activity = ini.get_or("synthetic", "signal_activity", "SIGNAL");
            spec.signal_depth = std::stoul(ini.get_or("synthetic", "signal_depth", "3"));
            spec.hour_lo = std::stoi(ini.get_or("synthetic", "hour_lo", "8"));
            spec.hour_hi = std::stoi(ini.get_or("synthetic", "hour_hi", "16"));
            spec.positive_rate = std::stod(ini.get_or("synthetic", "positive_rate", "0.5"));
            spec.mean_interarrival_seconds =
                std::stod(ini.get_or("synthetic", "mean_interarrival_seconds", "120"));
            spec.mean_event_gap_seconds =
                std::stod(ini.get_or("synthetic", "mean_event_gap_seconds", "600"));
            spec.seed = std::stoull(ini.get_or("synthetic", "seed",
                                               std::to_string(rc.master_seed)));
            spec.validate();
        });
        rc.synthetic = spec;
    }

    if (rc.input_csv.empty() && !rc.synthetic)
        ec.add("paths.input_csv: required unless a [synthetic] section is given");
    if (!rc.synthetic && rc.label_rule.outcome_activities.empty())
        ec.add("label.outcome: at least one outcome activity required");
    if (!rc.synthetic && rc.label_rule.positive_activities.empty())
        ec.add("label.positive: at least one positive activity required");

    ec.finish();
    return rc;
}

} // namespace ppm
