#include "ppm/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ppm {

void LabelRule::validate() const {
    if (outcome_activities.empty() || positive_activities.empty())
        throw std::invalid_argument("LabelRule: outcome and positive sets must be non-empty");
    for (const auto& a : positive_activities)
        if (!outcome_activities.count(a))
            throw std::invalid_argument("LabelRule: positive activity not in outcome set: " + a);
}

std::int32_t Vocabulary::index_of(const std::string& label) const {
    auto it = label_to_index.find(label);
    return it == label_to_index.end() ? 1 : it->second; // unseen -> unknown
}

std::size_t Vocabulary::embedding_dim() const {
    std::size_t v = size();
    return std::max<std::size_t>(1, (v + 4) / 5); // ceil(V/5)
}

EventLog label_and_clip(const EventLog& log, const LabelRule& rule) {
    rule.validate();
    const std::string& act_col = log.schema.activity_column;
    EventLog out;
    out.schema = log.schema;
    for (const Case& c : log.cases) {
        std::size_t cut = c.events.size();
        int target = -1;
        for (std::size_t i = 0; i < c.events.size(); ++i) {
            const std::string& a = c.events[i].label(act_col);
            if (rule.outcome_activities.count(a)) {
                cut = i;
                target = rule.positive_activities.count(a) ? 1 : 0;
                break;
            }
        }
        if (target < 0) {
            if (rule.unlabeled_policy == LabelRule::UnlabeledPolicy::Error)
                throw std::runtime_error("NoOutcomeEvent: " + c.case_id);
            continue; // drop
        }
        if (cut == 0) continue; // clipped to nothing
        Case labeled;
        labeled.case_id = c.case_id;
        labeled.target = target;
        labeled.events.assign(c.events.begin(), c.events.begin() + cut);
        out.cases.push_back(std::move(labeled));
    }
    if (out.cases.empty()) throw std::runtime_error("AllCasesDropped");
    return out;
}

std::size_t nr_open_bruteforce(const EventLog& raw_log, std::int64_t t) {
    std::size_t n = 0;
    for (const Case& c : raw_log.cases)
        if (c.start_ts() <= t && t <= c.end_ts()) ++n;
    return n;
}

static std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

EventLog compute_synthetic(const EventLog& log, const EventLog& raw_log) {
    // sweep arrays: nr_open(t) = #starts <= t  -  #ends < t
    std::vector<std::int64_t> starts, ends;
    starts.reserve(raw_log.cases.size());
    ends.reserve(raw_log.cases.size());
    for (const Case& c : raw_log.cases) {
        starts.push_back(c.start_ts());
        ends.push_back(c.end_ts());
    }
    std::sort(starts.begin(), starts.end());
    std::sort(ends.begin(), ends.end());

    EventLog out = log;
    auto add = [&](const std::string& name, FeatureKind kind) {
        if (!out.schema.find(name))
            out.schema.features.push_back({name, kind, FeatureSource::Synthetic});
    };
    add(synth::kNrOpen, FeatureKind::Range);
    add(synth::kElapsed, FeatureKind::Range);
    add(synth::kEvTime, FeatureKind::Range);
    add(synth::kSinceMidnight, FeatureKind::Range);
    add(synth::kMonth, FeatureKind::Categorical);
    add(synth::kDay, FeatureKind::Categorical);
    add(synth::kHour, FeatureKind::Categorical);
    add(synth::kEvNr, FeatureKind::Range);

    for (Case& c : out.cases) {
        std::int64_t first_ts = c.events.front().timestamp;
        std::int64_t prev_ts = first_ts;
        for (std::size_t i = 0; i < c.events.size(); ++i) {
            Event& e = c.events[i];
            std::int64_t t = e.timestamp;
            double open = static_cast<double>(
                (std::upper_bound(starts.begin(), starts.end(), t) - starts.begin()) -
                (std::lower_bound(ends.begin(), ends.end(), t) - ends.begin()));
            e.values[synth::kNrOpen] = open;
            e.values[synth::kElapsed] = static_cast<double>(t - first_ts);
            e.values[synth::kEvTime] = i == 0 ? 0.0 : static_cast<double>(t - prev_ts);
            e.values[synth::kSinceMidnight] = static_cast<double>(floor_mod(t, 86400));
            CivilTime ct = civil_from_epoch(t);
            e.values[synth::kMonth] = std::to_string(ct.month);
            e.values[synth::kDay] = std::to_string(ct.day);
            e.values[synth::kHour] = std::to_string(ct.hour);
            e.values[synth::kEvNr] = static_cast<double>(i + 1);
            prev_ts = t;
        }
    }
    return out;
}

const Vocabulary* Encoders::vocab_for(const std::string& feature) const {
    for (const auto& v : vocabularies)
        if (v.feature == feature) return &v;
    return nullptr;
}

const Standardizer* Encoders::standardizer_for(const std::string& feature) const {
    for (const auto& s : standardizers)
        if (s.feature == feature) return &s;
    return nullptr;
}

Encoders fit_encoders(const EventLog& train_pool) {
    Encoders enc;
    for (const FeatureDecl& f : train_pool.schema.features) {
        if (f.kind == FeatureKind::Categorical) {
            std::map<std::string, std::int32_t> sorted_labels;
            for (const Case& c : train_pool.cases)
                for (const Event& e : c.events) sorted_labels.emplace(e.label(f.name), 0);
            Vocabulary v;
            v.feature = f.name;
            std::int32_t next = 2;
            for (auto& [label, idx] : sorted_labels) {
                idx = next++;
                v.label_to_index.emplace(label, idx);
            }
            enc.vocabularies.push_back(std::move(v));
        } else {
            double sum = 0.0;
            std::size_t n = 0;
            for (const Case& c : train_pool.cases)
                for (const Event& e : c.events) {
                    sum += e.number(f.name);
                    ++n;
                }
            double mean = n ? sum / static_cast<double>(n) : 0.0;
            double sq = 0.0;
            for (const Case& c : train_pool.cases)
                for (const Event& e : c.events) {
                    double d = e.number(f.name) - mean;
                    sq += d * d;
                }
            double sd = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
            if (sd == 0.0) enc.constant_features.push_back(f.name);
            enc.standardizers.push_back({f.name, mean, sd});
        }
    }
    return enc;
}

EventLog apply_encoders(const EventLog& log, const Encoders& enc) {
    EventLog out = log;
    for (Case& c : out.cases)
        for (Event& e : c.events)
            for (const FeatureDecl& f : out.schema.features) {
                if (f.kind == FeatureKind::Categorical) {
                    const Vocabulary* v = enc.vocab_for(f.name);
                    if (!v) throw std::runtime_error("apply_encoders: no vocabulary for " + f.name);
                    e.values[f.name] = static_cast<double>(v->index_of(e.label(f.name)));
                } else {
                    const Standardizer* s = enc.standardizer_for(f.name);
                    if (!s) throw std::runtime_error("apply_encoders: no standardizer for " + f.name);
                    e.values[f.name] = s->transform(e.number(f.name));
                }
            }
    return out;
}

void save_encoders(const Encoders& enc, std::ostream& out) {
    out.precision(17);
    for (const auto& v : enc.vocabularies) {
        out << "vocab " << v.feature << " " << v.label_to_index.size() << "\n";
        // deterministic order
        std::map<std::int32_t, std::string> by_index;
        for (const auto& [label, idx] : v.label_to_index) by_index[idx] = label;
        for (const auto& [idx, label] : by_index) out << idx << "\t" << label << "\n";
    }
    for (const auto& s : enc.standardizers)
        out << "std " << s.feature << " " << s.mean << " " << s.std << "\n";
}

Encoders load_encoders(std::istream& in) {
    Encoders enc;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "vocab") {
            Vocabulary v;
            std::size_t n;
            ls >> v.feature >> n;
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::getline(in, line)) throw std::runtime_error("load_encoders: truncated");
                auto tab = line.find('\t');
                v.label_to_index[line.substr(tab + 1)] =
                    static_cast<std::int32_t>(std::stol(line.substr(0, tab)));
            }
            enc.vocabularies.push_back(std::move(v));
        } else if (tag == "std") {
            Standardizer s;
            ls >> s.feature >> s.mean >> s.std;
            if (s.std == 0.0) enc.constant_features.push_back(s.feature);
            enc.standardizers.push_back(std::move(s));
        } else {
            throw std::runtime_error("load_encoders: bad line: " + line);
        }
    }
    return enc;
}

} // namespace ppm
