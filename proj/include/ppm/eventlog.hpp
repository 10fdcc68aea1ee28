#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ppm {

enum class FeatureKind { Categorical, Range };
enum class FeatureSource { Raw, Synthetic };

struct FeatureDecl {
    std::string name;
    FeatureKind kind;
    FeatureSource source = FeatureSource::Raw;
};

struct FeatureSchema {
    std::vector<FeatureDecl> features;
    std::string case_id_column;
    std::string timestamp_column;
    std::string activity_column;
    std::string timestamp_format; // strptime-style

    const FeatureDecl* find(const std::string& name) const;
    void validate() const; // unique names, activity categorical, role columns not features
};

// Label used when a categorical cell is empty in the source file.
inline const std::string kMissingLabel = "«missing»";

// Categorical cells hold label strings before encoding and integer indices
// (stored as double) after; range cells are always doubles.
using FeatureValue = std::variant<std::string, double>;

struct Event {
    std::string case_id;
    std::int64_t timestamp = 0; // UTC epoch seconds
    std::map<std::string, FeatureValue> values;

    const std::string& label(const std::string& feature) const;
    double number(const std::string& feature) const;
};

struct Case {
    std::string case_id;
    std::vector<Event> events;
    std::optional<int> target; // 0/1 once labeled

    std::int64_t start_ts() const { return events.front().timestamp; }
    std::int64_t end_ts() const { return events.back().timestamp; }
};

struct EventLog {
    FeatureSchema schema;
    std::vector<Case> cases;

    std::size_t total_events() const;
};

// strptime + UTC epoch conversion; trailing fractional seconds are truncated.
std::int64_t parse_timestamp(const std::string& text, const std::string& format);

struct CivilTime {
    int year, month, day, hour, minute, second;
};
CivilTime civil_from_epoch(std::int64_t ts);

EventLog ingest_csv(const std::string& path, const FeatureSchema& schema, char delimiter = ',');

// Writes role columns plus raw features, timestamps rendered with the schema's
// format string. Inverse of ingest_csv for raw logs.
void write_csv(const EventLog& log, std::ostream& out, char delimiter = ',');

// Splits by case start time; the ceil(test_fraction * N) latest-starting cases
// (ties broken by case_id) form the test side.
std::pair<EventLog, EventLog> chronological_split(const EventLog& log, double test_fraction);

} // namespace ppm
