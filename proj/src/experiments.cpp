#include "ppm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ppm/rng.hpp"

namespace ppm {

// ------------------------------------------------------------------ earliness

EarlinessCurve earliness(Network& model, const PrefixDataset& test_ds, std::size_t max_prefix) {
    PrefixDataset capped = truncate_to_max_prefix(test_ds, max_prefix);
    std::vector<double> scores = predict_dataset(model, capped);
    std::vector<int> labels;
    for (const auto& m : capped.matrices) labels.push_back(m.target);

    std::map<std::size_t, std::pair<std::vector<double>, std::vector<int>>> groups;
    for (std::size_t i = 0; i < capped.matrices.size(); ++i) {
        auto& g = groups[capped.matrices[i].prefix_length];
        g.first.push_back(scores[i]);
        g.second.push_back(labels[i]);
    }
    EarlinessCurve curve;
    for (const auto& [len, g] : groups)
        curve.points.push_back({len, auc_roc(g.first, g.second), g.first.size()});
    curve.aggregate_auc = auc_roc(scores, labels);
    return curve;
}

void write_earliness_csv(const EarlinessCurve& curve, std::ostream& out) {
    out << "prefix_length,auc_roc,n\n";
    for (const auto& p : curve.points) {
        out << p.prefix_length << ",";
        if (p.auc_roc) out << *p.auc_roc;
        out << "," << p.n_examples << "\n";
    }
    out << "aggregate,";
    if (curve.aggregate_auc) out << *curve.aggregate_auc;
    std::size_t total = 0;
    for (const auto& p : curve.points) total += p.n_examples;
    out << "," << total << "\n";
}

// ------------------------------------------------------------------ ablations

std::string to_string(AblationVariant v) {
    switch (v) {
        case AblationVariant::Base: return "base";
        case AblationVariant::NoTime: return "no_time";
        case AblationVariant::NoEvNr: return "no_evnr";
        case AblationVariant::Shuffled: return "shuffled";
    }
    return "?";
}

AblationVariant ablation_variant_from_string(const std::string& s) {
    if (s == "base") return AblationVariant::Base;
    if (s == "no_time") return AblationVariant::NoTime;
    if (s == "no_evnr") return AblationVariant::NoEvNr;
    if (s == "shuffled") return AblationVariant::Shuffled;
    throw std::invalid_argument("unknown ablation variant: " + s);
}

std::vector<std::string> dropped_features(AblationVariant v) {
    switch (v) {
        case AblationVariant::NoTime:
            // nr_open is load, not time; it stays
            return {synth::kElapsed, synth::kEvTime, synth::kSinceMidnight,
                    synth::kMonth, synth::kDay, synth::kHour};
        case AblationVariant::NoEvNr:
            return {synth::kEvNr};
        default:
            return {};
    }
}

PreparedData prepare_pipeline(const EventLog& raw, const LabelRule& rule, double test_fraction,
                              AblationVariant variant, std::uint64_t shuffle_seed) {
    EventLog labeled = label_and_clip(raw, rule);
    if (variant == AblationVariant::Shuffled) {
        Rng rng(mix_seed(shuffle_seed, 0xABBAu));
        for (Case& c : labeled.cases) std::shuffle(c.events.begin(), c.events.end(), rng);
    }
    EventLog enriched = compute_synthetic(labeled, raw);
    for (const std::string& name : dropped_features(variant)) {
        auto& fs = enriched.schema.features;
        fs.erase(std::remove_if(fs.begin(), fs.end(),
                                [&](const FeatureDecl& f) { return f.name == name; }),
                 fs.end());
    }
    auto [pool, test] = chronological_split(enriched, test_fraction);
    PreparedData prep;
    prep.encoders = fit_encoders(pool);
    prep.layout = ColumnLayout::from_schema(pool.schema);
    prep.encoded_schema = EncodedSchema::from(prep.layout, prep.encoders);
    prep.pool = apply_encoders(pool, prep.encoders);
    prep.test = apply_encoders(test, prep.encoders);
    return prep;
}

std::vector<AblationRow> ablate(const ModelConfig& best_config, const EventLog& raw,
                                const LabelRule& rule, const std::vector<AblationVariant>& variants,
                                std::size_t n_seeds, double test_fraction,
                                std::uint64_t master_seed) {
    if (n_seeds < 1) throw std::invalid_argument("ablate: n_seeds >= 1 required");
    std::vector<AblationRow> rows;
    for (AblationVariant v : variants) {
        AblationRow row;
        row.variant = v;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            std::uint64_t seed =
                mix_seed(master_seed, static_cast<std::uint64_t>(v) * 1000 + s);
            double auc = std::numeric_limits<double>::quiet_NaN();
            try {
                PreparedData prep = prepare_pipeline(raw, rule, test_fraction, v, seed);
                ModelConfig cfg = best_config;
                cfg.seed = seed;
                auto [train_cases, val_cases] =
                    shuffle_split(prep.pool.cases, 0.8, mix_seed(seed, 0x51u));
                EventLog train_log{prep.pool.schema, std::move(train_cases)};
                EventLog val_log{prep.pool.schema, std::move(val_cases)};
                TrainRun run = train(cfg, prep.encoded_schema,
                                     window_log(train_log, cfg.seq_len),
                                     window_log(val_log, cfg.seq_len));
                PrefixDataset test_ds = window_log(prep.test, cfg.seq_len);
                std::vector<double> scores = predict_dataset(*run.model, test_ds);
                std::vector<int> labels;
                for (const auto& m : test_ds.matrices) labels.push_back(m.target);
                auto a = auc_roc(scores, labels);
                if (a) auc = *a;
            } catch (const std::exception&) {
                // failed run recorded as NaN
            }
            row.aucs.push_back(auc);
        }
        double sum = 0.0;
        std::size_t n = 0;
        for (double a : row.aucs)
            if (std::isfinite(a)) {
                sum += a;
                ++n;
            }
        row.mean_auc = n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
        double sq = 0.0;
        for (double a : row.aucs)
            if (std::isfinite(a)) sq += (a - row.mean_auc) * (a - row.mean_auc);
        row.std_auc = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out) {
    out << "variant,mean_auc_roc,std_auc_roc,n_seeds\n";
    for (const auto& r : rows)
        out << to_string(r.variant) << "," << r.mean_auc << "," << r.std_auc << ","
            << r.aucs.size() << "\n";
}

// --------------------------------------------------------------- sweep/report

static std::string hyper_value(const ModelConfig& c, const std::string& name) {
    if (name == "batch_size") return std::to_string(c.batch_size);
    if (name == "seq_len") return std::to_string(c.seq_len);
    if (name == "size_multiplier") return std::to_string(c.size_multiplier);
    if (name == "kernel_size") return std::to_string(c.kernel_size);
    throw std::invalid_argument("robustness_sweep: unknown hyperparameter " + name);
}

std::vector<SweepRow> robustness_sweep(const std::vector<TrialRecord>& trials,
                                       const std::string& hyperparameter) {
    std::map<long, std::pair<double, std::size_t>> agg; // value -> (sum, count)
    for (const auto& t : trials) {
        if (t.status != "ok") continue;
        long v = std::stol(hyper_value(t.config, hyperparameter));
        agg[v].first += t.best_val_auc;
        agg[v].second += 1;
    }
    std::vector<SweepRow> rows;
    for (const auto& [v, sc] : agg)
        rows.push_back({std::to_string(v), sc.first / static_cast<double>(sc.second), sc.second});
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& hyperparameter,
                     std::ostream& out) {
    out << hyperparameter << ",mean_auc_roc,count\n";
    for (const auto& r : rows) out << r.value << "," << r.mean_auc << "," << r.count << "\n";
}

std::vector<ReportRow> report_table(const std::vector<KindResult>& results) {
    if (results.empty()) return {};
    double fastest = results[0].wall_seconds;
    for (const auto& r : results) fastest = std::min(fastest, r.wall_seconds);
    std::vector<ReportRow> rows;
    for (const auto& r : results) {
        ReportRow row;
        row.kind = r.kind;
        row.metrics = r.metrics;
        row.config = r.config;
        row.rel_time_percent =
            fastest > 0.0 ? static_cast<int>(std::llround(r.wall_seconds / fastest * 100.0)) : 100;
        rows.push_back(row);
    }
    return rows;
}

static std::string opt_str(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << *v;
    return os.str();
}

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    out << "model,auc_roc,f1,accuracy,auc_pr,rel_time,batch_size,seq_len,kernel_size,"
           "size_multiplier\n";
    for (const auto& r : rows) {
        out << to_string(r.kind) << "," << opt_str(r.metrics.auc_roc) << ","
            << opt_str(r.metrics.f1) << "," << r.metrics.accuracy << ","
            << opt_str(r.metrics.auc_pr) << "," << r.rel_time_percent << "%,"
            << r.config.batch_size << "," << r.config.seq_len << ","
            << (r.kind == ModelKind::Cnn ? std::to_string(r.config.kernel_size) : "") << ","
            << r.config.size_multiplier << "\n";
    }
}

std::string render_report_text(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(16) << "model" << std::setw(9) << "auc_roc" << std::setw(9)
       << "f1" << std::setw(10) << "accuracy" << std::setw(9) << "auc_pr" << std::setw(10)
       << "rel_time" << "\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(16) << to_string(r.kind) << std::setw(9)
           << opt_str(r.metrics.auc_roc) << std::setw(9) << opt_str(r.metrics.f1) << std::setw(10)
           << std::fixed << std::setprecision(4) << r.metrics.accuracy << std::setw(9)
           << opt_str(r.metrics.auc_pr) << r.rel_time_percent << "%\n";
    }
    return os.str();
}

// ------------------------------------------------------------- synthetic logs

void SyntheticLogSpec::validate() const {
    if (n_cases < 2) throw std::invalid_argument("InvalidSpec: n_cases >= 2");
    if (min_events < 1 || max_events < min_events)
        throw std::invalid_argument("InvalidSpec: bad event-count bounds");
    if (alphabet < 2) throw std::invalid_argument("InvalidSpec: alphabet >= 2");
    if (positive_rate < 0.0 || positive_rate > 1.0)
        throw std::invalid_argument("InvalidSpec: positive_rate in [0,1]");
    if (signal == Signal::ActivityWithinDepth && signal_depth < 1)
        throw std::invalid_argument("InvalidSpec: signal_depth >= 1");
    if (signal == Signal::HourOfDay && !(0 <= hour_lo && hour_lo < hour_hi && hour_hi <= 24))
        throw std::invalid_argument("InvalidSpec: bad hour window");
}

SyntheticLog generate_synthetic_log(const SyntheticLogSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    SyntheticLog out;
    out.rule.outcome_activities = {spec.positive_outcome, spec.negative_outcome};
    out.rule.positive_activities = {spec.positive_outcome};
    FeatureSchema schema;
    schema.case_id_column = "case";
    schema.timestamp_column = "ts";
    schema.activity_column = "activity";
    schema.timestamp_format = "%Y-%m-%d %H:%M:%S";
    schema.features = {{"activity", FeatureKind::Categorical, FeatureSource::Raw}};
    out.log.schema = schema;

    // exact positive count so the measured rate matches the spec
    std::vector<int> targets(spec.n_cases, 0);
    std::size_t n_pos = static_cast<std::size_t>(
        std::llround(spec.positive_rate * static_cast<double>(spec.n_cases)));
    std::fill(targets.begin(), targets.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
    std::shuffle(targets.begin(), targets.end(), rng);

    std::exponential_distribution<double> arrival(1.0 / spec.mean_interarrival_seconds);
    std::exponential_distribution<double> gap(1.0 / spec.mean_event_gap_seconds);
    std::uniform_int_distribution<std::size_t> len_dist(spec.min_events, spec.max_events);
    std::uniform_int_distribution<std::size_t> act_dist(0, spec.alphabet - 1);

    double arrival_clock = 0.0;
    for (std::size_t ci = 0; ci < spec.n_cases; ++ci) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "case%06zu", ci);
        Case c;
        c.case_id = buf;
        int target = targets[ci];
        out.truth[c.case_id] = target;

        std::size_t body = len_dist(rng);
        arrival_clock += arrival(rng);
        std::int64_t start;
        if (spec.signal == SyntheticLogSpec::Signal::HourOfDay) {
            // pick the day from the arrival process, force the hour per target
            std::int64_t day = static_cast<std::int64_t>(arrival_clock / 86400.0);
            int hour;
            if (target) {
                std::uniform_int_distribution<int> hd(spec.hour_lo, spec.hour_hi - 1);
                hour = hd(rng);
            } else {
                int span = 24 - (spec.hour_hi - spec.hour_lo);
                std::uniform_int_distribution<int> hd(0, span - 1);
                int h = hd(rng);
                hour = h < spec.hour_lo ? h : h + (spec.hour_hi - spec.hour_lo);
            }
            std::uniform_int_distribution<int> sec(0, 3599);
            start = day * 86400 + static_cast<std::int64_t>(hour) * 3600 + sec(rng);
        } else {
            start = static_cast<std::int64_t>(arrival_clock);
        }

        // activities; the signal activity is reserved for positive cases
        std::vector<std::string> acts(body);
        for (std::size_t i = 0; i < body; ++i) {
            char ab[16];
            std::snprintf(ab, sizeof(ab), "act%02zu", act_dist(rng));
            acts[i] = ab;
        }
        if (spec.signal == SyntheticLogSpec::Signal::ActivityWithinDepth && target) {
            std::uniform_int_distribution<std::size_t> pos(
                0, std::min(spec.signal_depth, body) - 1);
            acts[pos(rng)] = spec.signal_activity;
        } else if (spec.signal == SyntheticLogSpec::Signal::ActivityAnywhere && target) {
            std::uniform_int_distribution<std::size_t> pos(0, body - 1);
            acts[pos(rng)] = spec.signal_activity;
        }

        std::int64_t ts = start;
        for (std::size_t i = 0; i < body; ++i) {
            Event e;
            e.case_id = c.case_id;
            e.timestamp = ts;
            e.values["activity"] = acts[i];
            c.events.push_back(std::move(e));
            ts += static_cast<std::int64_t>(gap(rng)) + 1;
        }
        Event outcome;
        outcome.case_id = c.case_id;
        outcome.timestamp = ts;
        outcome.values["activity"] = target ? spec.positive_outcome : spec.negative_outcome;
        c.events.push_back(std::move(outcome));
        out.log.cases.push_back(std::move(c));
    }
    return out;
}

} // namespace ppm
