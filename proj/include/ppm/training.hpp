#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppm/models.hpp"
#include "ppm/prefixes.hpp"

namespace ppm {

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_auc_roc = 0.0;
    double wall_seconds = 0.0;
};

struct TrainRun {
    ModelConfig config;
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0; // 1-based
    double best_val_auc = 0.0;
    std::unique_ptr<Network> model;
};

struct TrainOptions {
    // test hook: replaces the validation AUC computation (epoch is 1-based)
    std::function<double(std::size_t)> val_metric_override;
    bool verbose = false;
};

// Seeded case-level shuffle, then an 80/20 split; every prefix of a case lands
// on one side.
std::pair<std::vector<Case>, std::vector<Case>> shuffle_split(const std::vector<Case>& cases,
                                                              double train_fraction,
                                                              std::uint64_t seed);

TrainRun train(const ModelConfig& config, const EncodedSchema& schema,
               const PrefixDataset& train_ds, const PrefixDataset& val_ds,
               const TrainOptions& options = {});

std::vector<double> predict_dataset(Network& net, const PrefixDataset& ds);

struct SearchGrid {
    std::vector<std::size_t> batch_sizes = {128, 256, 512, 1024};
    std::vector<std::size_t> size_multipliers = {1, 2, 4, 8, 16};
    std::vector<std::size_t> seq_lens = {5, 15, 25, 35, 45}; // + 1.5x median appended by caller
    std::vector<std::size_t> kernel_sizes = {2, 3, 4, 8};    // cnn only
    std::size_t max_epochs = 100;
    double learning_rate = 1e-3;
};

struct TrialRecord {
    std::size_t trial_id = 0;
    ModelConfig config;
    double best_val_auc = 0.0;
    double wall_seconds = 0.0;
    std::string status = "ok"; // ok | failed | skipped(resume)
};

struct SearchResult {
    std::vector<TrialRecord> records; // sorted by best_val_auc descending
    std::unique_ptr<Network> best_model;
    std::size_t best_trial_id = 0;
};

// Default n_trials: 50, or 100 for cnn (pass 0 to use the default). The pool
// log must already be labeled + encoded; each trial draws a fresh case-level
// split and windows at its own sequence length. A ledger path makes trial rows
// stream to CSV and lets an interrupted search resume.
SearchResult random_search(ModelKind kind, const SearchGrid& grid, std::size_t n_trials,
                           std::uint64_t master_seed, const EventLog& pool_encoded,
                           const EncodedSchema& schema, std::size_t jobs = 1,
                           const std::string& ledger_path = "");

void write_trial_ledger_header(std::ostream& out);
void write_trial_ledger_row(const TrialRecord& r, std::ostream& out);

// Median case length helper for the default seq_len list.
std::size_t median_case_length(const EventLog& log);

} // namespace ppm
