#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ppm/features.hpp"
#include "ppm/metrics.hpp"
#include "ppm/models.hpp"
#include "ppm/training.hpp"

namespace ppm {

// ------------------------------------------------------------------ earliness

struct EarlinessCurve {
    struct Point {
        std::size_t prefix_length;
        std::optional<double> auc_roc; // absent when the group is single-class
        std::size_t n_examples;
    };
    std::vector<Point> points;
    // AUC over all prefixes together; by construction not the weighted mean of
    // the per-length values.
    std::optional<double> aggregate_auc;
};

EarlinessCurve earliness(Network& model, const PrefixDataset& test_ds, std::size_t max_prefix);
void write_earliness_csv(const EarlinessCurve& curve, std::ostream& out);

// ------------------------------------------------------------------ ablations

enum class AblationVariant { Base, NoTime, NoEvNr, Shuffled };
std::string to_string(AblationVariant v);
AblationVariant ablation_variant_from_string(const std::string& s);

// Features removed by a variant (Shuffled drops none).
std::vector<std::string> dropped_features(AblationVariant v);

// Full preprocessing for one variant: label/clip, optional within-case event
// shuffle, synthetic features, feature drops, chronological split, encoder
// fit on the pool, encode both sides.
struct PreparedData {
    EventLog pool;
    EventLog test;
    Encoders encoders;
    ColumnLayout layout;
    EncodedSchema encoded_schema;
};

PreparedData prepare_pipeline(const EventLog& raw, const LabelRule& rule, double test_fraction,
                              AblationVariant variant = AblationVariant::Base,
                              std::uint64_t shuffle_seed = 0);

struct AblationRow {
    AblationVariant variant;
    double mean_auc = 0.0;
    double std_auc = 0.0;
    std::vector<double> aucs; // one per seed; failed runs recorded as NaN
};

std::vector<AblationRow> ablate(const ModelConfig& best_config, const EventLog& raw,
                                const LabelRule& rule, const std::vector<AblationVariant>& variants,
                                std::size_t n_seeds, double test_fraction,
                                std::uint64_t master_seed);
void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out);

// --------------------------------------------------------------- sweep/report

struct SweepRow {
    std::string value;
    double mean_auc = 0.0;
    std::size_t count = 0;
};

// hyperparameter: batch_size | seq_len | size_multiplier | kernel_size
std::vector<SweepRow> robustness_sweep(const std::vector<TrialRecord>& trials,
                                       const std::string& hyperparameter);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& hyperparameter,
                     std::ostream& out);

struct KindResult {
    ModelKind kind;
    ModelConfig config;
    MetricsReport metrics;
    double wall_seconds = 0.0;
};

struct ReportRow {
    ModelKind kind;
    MetricsReport metrics;
    int rel_time_percent = 100; // fastest kind = 100
    ModelConfig config;
};

// Column order: model, auc_roc, f1, accuracy, auc_pr, rel_time, batch size,
// seq length, kernel size, model size.
std::vector<ReportRow> report_table(const std::vector<KindResult>& results);
void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out);
std::string render_report_text(const std::vector<ReportRow>& rows);

// ------------------------------------------------------------- synthetic logs

struct SyntheticLogSpec {
    std::size_t n_cases = 1000;
    std::size_t min_events = 4; // body length before the outcome event
    std::size_t max_events = 12;
    std::size_t alphabet = 10; // activities act00..actNN
    enum class Signal { ActivityWithinDepth, HourOfDay, ActivityAnywhere } signal =
        Signal::ActivityWithinDepth;
    std::string signal_activity = "SIGNAL";
    std::size_t signal_depth = 3;
    int hour_lo = 8, hour_hi = 16; // positive iff first event hour in [lo,hi)
    double positive_rate = 0.5;
    double mean_interarrival_seconds = 120.0; // Poisson case arrivals
    double mean_event_gap_seconds = 600.0;
    std::uint64_t seed = 0;
    std::string positive_outcome = "OUTCOME_POS";
    std::string negative_outcome = "OUTCOME_NEG";

    void validate() const;
};

struct SyntheticLog {
    EventLog log; // raw, with terminal outcome events appended
    std::unordered_map<std::string, int> truth;
    LabelRule rule; // recovers the generator's targets via label_and_clip
};

SyntheticLog generate_synthetic_log(const SyntheticLogSpec& spec);

} // namespace ppm
