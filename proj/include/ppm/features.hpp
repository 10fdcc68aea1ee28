#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ppm/eventlog.hpp"

namespace ppm {

struct LabelRule {
    std::set<std::string> outcome_activities;
    std::set<std::string> positive_activities; // subset of outcome_activities
    enum class UnlabeledPolicy { Drop, Error } unlabeled_policy = UnlabeledPolicy::Drop;

    void validate() const;
};

// Integer encoding for one categorical feature. Index 0 = padding, 1 = unknown,
// fitted labels from 2 up.
struct Vocabulary {
    std::string feature;
    std::unordered_map<std::string, std::int32_t> label_to_index;

    std::size_t size() const { return label_to_index.size() + 2; }
    std::int32_t index_of(const std::string& label) const;
    std::size_t embedding_dim() const; // max(1, ceil(V/5))
};

struct Standardizer {
    std::string feature;
    double mean = 0.0;
    double std = 0.0; // population std over training events

    double transform(double x) const { return std > 0.0 ? (x - mean) / std : 0.0; }
};

// Names of the eight synthetic per-event features.
namespace synth {
inline const std::string kNrOpen = "nr_open";
inline const std::string kElapsed = "elapsed";
inline const std::string kEvTime = "evTime";
inline const std::string kSinceMidnight = "sinceMidnight";
inline const std::string kMonth = "month";
inline const std::string kDay = "day";
inline const std::string kHour = "hour";
inline const std::string kEvNr = "evNr";
} // namespace synth

// Assigns targets and removes the first outcome event and everything after it.
EventLog label_and_clip(const EventLog& log, const LabelRule& rule);

// Appends the eight synthetic features; nr_open is computed against the raw
// (pre-clipping) log.
EventLog compute_synthetic(const EventLog& log, const EventLog& raw_log);

// Brute-force nr_open for verification: counts cases whose [first,last] span
// contains t.
std::size_t nr_open_bruteforce(const EventLog& raw_log, std::int64_t t);

struct Encoders {
    std::vector<Vocabulary> vocabularies;
    std::vector<Standardizer> standardizers;
    std::vector<std::string> constant_features; // std == 0 warnings

    const Vocabulary* vocab_for(const std::string& feature) const;
    const Standardizer* standardizer_for(const std::string& feature) const;
};

Encoders fit_encoders(const EventLog& train_pool);
EventLog apply_encoders(const EventLog& log, const Encoders& enc);

void save_encoders(const Encoders& enc, std::ostream& out);
Encoders load_encoders(std::istream& in);

} // namespace ppm
