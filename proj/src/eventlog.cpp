#include "ppm/eventlog.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ppm {

const FeatureDecl* FeatureSchema::find(const std::string& name) const {
    for (const auto& f : features)
        if (f.name == name) return &f;
    return nullptr;
}

void FeatureSchema::validate() const {
    std::set<std::string> seen;
    for (const auto& f : features) {
        if (!seen.insert(f.name).second)
            throw std::invalid_argument("FeatureSchema: duplicate feature " + f.name);
        if (f.name == case_id_column || f.name == timestamp_column)
            throw std::invalid_argument("FeatureSchema: role column listed as feature: " + f.name);
    }
    const FeatureDecl* act = find(activity_column);
    if (!act || act->kind != FeatureKind::Categorical)
        throw std::invalid_argument("FeatureSchema: activity column must be a categorical feature");
    if (case_id_column.empty() || timestamp_column.empty())
        throw std::invalid_argument("FeatureSchema: case id / timestamp columns required");
}

const std::string& Event::label(const std::string& feature) const {
    return std::get<std::string>(values.at(feature));
}

double Event::number(const std::string& feature) const {
    const FeatureValue& v = values.at(feature);
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    throw std::runtime_error("Event: feature " + feature + " is not numeric");
}

std::size_t EventLog::total_events() const {
    std::size_t n = 0;
    for (const auto& c : cases) n += c.events.size();
    return n;
}

std::int64_t parse_timestamp(const std::string& text, const std::string& format) {
    std::tm tm{};
    const char* end = strptime(text.c_str(), format.c_str(), &tm);
    if (end == nullptr) throw std::runtime_error("UnparsableTimestamp: " + text);
    // tolerate trailing fractional seconds / timezone leftovers
    std::time_t t = timegm(&tm);
    if (t == static_cast<std::time_t>(-1))
        throw std::runtime_error("UnparsableTimestamp: " + text);
    return static_cast<std::int64_t>(t);
}

CivilTime civil_from_epoch(std::int64_t ts) {
    std::time_t t = static_cast<std::time_t>(ts);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return {tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec};
}

// RFC-style CSV: quoted fields may contain delimiters, doubled quotes, newlines.
static std::vector<std::string> parse_csv_record(std::istream& in, char delim, bool& ok) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false, any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == delim) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // swallow; handled with the following \n
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            ok = true;
            return fields;
        } else {
            field.push_back(c);
        }
    }
    if (any) {
        fields.push_back(std::move(field));
        ok = true;
    } else {
        ok = false;
    }
    return fields;
}

EventLog ingest_csv(const std::string& path, const FeatureSchema& schema, char delimiter) {
    schema.validate();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ingest_csv: cannot open " + path);

    bool ok = false;
    std::vector<std::string> header = parse_csv_record(in, delimiter, ok);
    if (!ok) throw std::runtime_error("EmptyFile: " + path);

    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    auto require = [&](const std::string& name) -> std::size_t {
        auto it = col.find(name);
        if (it == col.end()) throw std::runtime_error("MissingColumn: " + name);
        return it->second;
    };
    const std::size_t case_col = require(schema.case_id_column);
    const std::size_t ts_col = require(schema.timestamp_column);
    struct RawCol {
        const FeatureDecl* decl;
        std::size_t index;
    };
    std::vector<RawCol> feat_cols;
    for (const auto& f : schema.features)
        if (f.source == FeatureSource::Raw) feat_cols.push_back({&f, require(f.name)});

    EventLog log;
    log.schema = schema;
    std::unordered_map<std::string, std::size_t> case_index;
    std::size_t row_nr = 1;
    std::size_t n_rows = 0;
    while (true) {
        std::vector<std::string> row = parse_csv_record(in, delimiter, ok);
        if (!ok) break;
        ++row_nr;
        if (row.size() == 1 && row[0].empty()) continue; // blank line
        Event ev;
        ev.case_id = row.at(case_col);
        try {
            ev.timestamp = parse_timestamp(row.at(ts_col), schema.timestamp_format);
        } catch (const std::exception&) {
            throw std::runtime_error("UnparsableTimestamp: row " + std::to_string(row_nr));
        }
        for (const auto& fc : feat_cols) {
            const std::string& cell = row.at(fc.index);
            if (fc.decl->kind == FeatureKind::Categorical) {
                ev.values[fc.decl->name] = cell.empty() ? kMissingLabel : cell;
            } else {
                if (cell.empty())
                    throw std::runtime_error("NonNumericRange: row " + std::to_string(row_nr) +
                                             " feature " + fc.decl->name + " (missing)");
                try {
                    std::size_t pos = 0;
                    double v = std::stod(cell, &pos);
                    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                    if (pos != cell.size()) throw std::invalid_argument(cell);
                    ev.values[fc.decl->name] = v;
                } catch (const std::exception&) {
                    throw std::runtime_error("NonNumericRange: row " + std::to_string(row_nr) +
                                             " feature " + fc.decl->name);
                }
            }
        }
        auto it = case_index.find(ev.case_id);
        if (it == case_index.end()) {
            case_index.emplace(ev.case_id, log.cases.size());
            Case c;
            c.case_id = ev.case_id;
            c.events.push_back(std::move(ev));
            log.cases.push_back(std::move(c));
        } else {
            log.cases[it->second].events.push_back(std::move(ev));
        }
        ++n_rows;
    }
    if (n_rows == 0) throw std::runtime_error("EmptyFile: " + path);
    for (auto& c : log.cases)
        std::stable_sort(c.events.begin(), c.events.end(),
                         [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    return log;
}

static std::string csv_escape(const std::string& s, char delim) {
    if (s.find(delim) == std::string::npos && s.find('"') == std::string::npos &&
        s.find('\n') == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void write_csv(const EventLog& log, std::ostream& out, char delimiter) {
    const FeatureSchema& s = log.schema;
    out << s.case_id_column << delimiter << s.timestamp_column;
    std::vector<const FeatureDecl*> raw;
    for (const auto& f : s.features)
        if (f.source == FeatureSource::Raw) raw.push_back(&f);
    for (const auto* f : raw) out << delimiter << f->name;
    out << "\n";
    char buf[64];
    for (const Case& c : log.cases)
        for (const Event& e : c.events) {
            std::time_t t = static_cast<std::time_t>(e.timestamp);
            std::tm tm{};
            gmtime_r(&t, &tm);
            std::strftime(buf, sizeof(buf), s.timestamp_format.c_str(), &tm);
            out << csv_escape(c.case_id, delimiter) << delimiter << buf;
            for (const auto* f : raw) {
                out << delimiter;
                const FeatureValue& v = e.values.at(f->name);
                if (std::holds_alternative<std::string>(v))
                    out << csv_escape(std::get<std::string>(v), delimiter);
                else
                    out << std::get<double>(v);
            }
            out << "\n";
        }
}

std::pair<EventLog, EventLog> chronological_split(const EventLog& log, double test_fraction) {
    if (log.cases.empty()) throw std::runtime_error("chronological_split: empty log");
    const std::size_t n = log.cases.size();
    std::size_t n_test = static_cast<std::size_t>(
        std::ceil(test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test >= n) throw std::runtime_error("DegenerateSplit");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Case& ca = log.cases[a];
        const Case& cb = log.cases[b];
        if (ca.start_ts() != cb.start_ts()) return ca.start_ts() < cb.start_ts();
        return ca.case_id < cb.case_id;
    });

    EventLog pool, test;
    pool.schema = log.schema;
    test.schema = log.schema;
    for (std::size_t i = 0; i < n; ++i) {
        const Case& c = log.cases[order[i]];
        (i < n - n_test ? pool : test).cases.push_back(c);
    }
    return {std::move(pool), std::move(test)};
}

} // namespace ppm
