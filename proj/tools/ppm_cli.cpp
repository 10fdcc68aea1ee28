// ppm command-line entry point: binds the preprocessing, training, and
// analysis pipeline end to end around a single sectioned config file.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppm/config.hpp"
#include "ppm/experiments.hpp"
#include "ppm/metrics.hpp"
#include "ppm/models.hpp"
#include "ppm/prefixes.hpp"
#include "ppm/training.hpp"

namespace fs = std::filesystem;
using namespace ppm;

namespace {

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    IniFile ini = IniFile::parse_file(path);
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--set expects section.key=value, got: " + kv);
        ini.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    RunConfig rc = RunConfig::from_ini(ini);
    if (const char* env = std::getenv("PPM_OUTPUT_DIR"); env && *env) rc.output_dir = env;
    fs::create_directories(rc.output_dir);
    return rc;
}

struct Source {
    EventLog raw;
    LabelRule rule;
};

Source load_source(const RunConfig& rc) {
    Source s;
    if (rc.synthetic) {
        SyntheticLog gen = generate_synthetic_log(*rc.synthetic);
        s.raw = std::move(gen.log);
        // the generator's own rule recovers its ground truth; an explicit
        // [label] section wins if present
        s.rule = rc.label_rule.outcome_activities.empty() ? gen.rule : rc.label_rule;
    } else {
        s.raw = ingest_csv(rc.input_csv, rc.schema, rc.delimiter);
        s.rule = rc.label_rule;
    }
    return s;
}

std::string out_path(const RunConfig& rc, const std::string& file) {
    return (fs::path(rc.output_dir) / file).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::string model_file(const RunConfig& rc, ModelKind kind) {
    return out_path(rc, "model_" + to_string(kind) + ".bin");
}

std::unique_ptr<Network> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file " + path);
    return Network::load(in);
}

void write_split_stats(const std::string& name, const EventLog& log, std::ostream& out) {
    std::vector<std::size_t> lens;
    std::size_t events = 0, positives = 0;
    for (const Case& c : log.cases) {
        lens.push_back(c.events.size());
        events += c.events.size();
        positives += static_cast<std::size_t>(c.target.value_or(0));
    }
    std::sort(lens.begin(), lens.end());
    const std::size_t n = lens.size();
    double mean = n ? static_cast<double>(events) / n : 0.0;
    double median = 0.0;
    if (n) median = n % 2 ? lens[n / 2] : (lens[n / 2 - 1] + lens[n / 2]) / 2.0;
    out << name << "," << n << "," << events << "," << (n ? lens.front() : 0) << ","
        << (n ? lens.back() : 0) << "," << mean << "," << median << ","
        << (n ? static_cast<double>(positives) / n : 0.0) << "\n";
}

PrefixDataset window_at(const EventLog& encoded, std::size_t seq_len) {
    return window_log(encoded, seq_len);
}

std::vector<int> dataset_targets(const PrefixDataset& ds) {
    std::vector<int> t;
    t.reserve(ds.matrices.size());
    for (const PrefixMatrix& m : ds.matrices) t.push_back(m.target);
    return t;
}

// ------------------------------------------------------------------ commands

int cmd_prepare(const RunConfig& rc) {
    Source src = load_source(rc);
    PreparedData pd = prepare_pipeline(src.raw, src.rule, rc.test_fraction);

    {
        auto out = open_out(out_path(rc, "stats.csv"));
        out << "split,cases,events,min_events,max_events,mean_events,median_events,pos_ratio\n";
        write_split_stats("train_pool", pd.pool, out);
        write_split_stats("test", pd.test, out);
    }
    {
        auto out = open_out(out_path(rc, "encoders.bin"));
        save_encoders(pd.encoders, out);
    }
    PrefixDataset pool_ds = window_at(pd.pool, rc.model.seq_len);
    PrefixDataset test_ds = window_at(pd.test, rc.model.seq_len);
    {
        std::ofstream out(out_path(rc, "train_pool.ds"), std::ios::binary);
        save_dataset(pool_ds, out);
        auto idx = open_out(out_path(rc, "train_pool_index.csv"));
        write_sidecar_index(pool_ds, idx);
    }
    {
        std::ofstream out(out_path(rc, "test.ds"), std::ios::binary);
        save_dataset(test_ds, out);
        auto idx = open_out(out_path(rc, "test_index.csv"));
        write_sidecar_index(test_ds, idx);
    }
    std::printf("prepare: pool %zu cases / %zu prefixes, test %zu cases / %zu prefixes -> %s\n",
                pd.pool.cases.size(), pool_ds.matrices.size(), pd.test.cases.size(),
                test_ds.matrices.size(), rc.output_dir.c_str());
    return 0;
}

int cmd_tune(const RunConfig& rc, std::size_t jobs) {
    Source src = load_source(rc);
    PreparedData pd = prepare_pipeline(src.raw, src.rule, rc.test_fraction);
    for (ModelKind kind : rc.kinds) {
        SearchGrid grid = rc.grid;
        if (!rc.grid_seq_lens_explicit) {
            std::size_t extra = static_cast<std::size_t>(1.5 * median_case_length(pd.pool));
            if (extra > 0 &&
                std::find(grid.seq_lens.begin(), grid.seq_lens.end(), extra) ==
                    grid.seq_lens.end())
                grid.seq_lens.push_back(extra);
        }
        std::string ledger = out_path(rc, "ledger_" + to_string(kind) + ".csv");
        SearchResult res = random_search(kind, grid, rc.n_trials, rc.master_seed, pd.pool,
                                         pd.encoded_schema, jobs, ledger);
        if (res.best_model) {
            std::ofstream out(model_file(rc, kind), std::ios::binary);
            res.best_model->save(out);
            auto cfg = open_out(out_path(rc, "config_" + to_string(kind) + ".txt"));
            cfg << res.best_model->config().to_text();
        }
        for (const char* hp : {"batch_size", "seq_len", "size_multiplier", "kernel_size"}) {
            if (std::string(hp) == "kernel_size" && kind != ModelKind::Cnn) continue;
            auto rows = robustness_sweep(res.records, hp);
            auto out = open_out(out_path(rc, "sweep_" + to_string(kind) + "_" + hp + ".csv"));
            write_sweep_csv(rows, hp, out);
        }
        double best = res.records.empty() ? 0.0 : res.records.front().best_val_auc;
        std::printf("tune(%s): %zu trials, best val AUC_ROC %.4f (trial %zu) -> %s\n",
                    to_string(kind).c_str(), res.records.size(), best, res.best_trial_id,
                    ledger.c_str());
    }
    return 0;
}

int cmd_train(const RunConfig& rc) {
    Source src = load_source(rc);
    PreparedData pd = prepare_pipeline(src.raw, src.rule, rc.test_fraction);
    auto [train_cases, val_cases] = shuffle_split(pd.pool.cases, 0.8, rc.master_seed);
    EventLog train_log{pd.pool.schema, std::move(train_cases)};
    EventLog val_log{pd.pool.schema, std::move(val_cases)};
    PrefixDataset train_ds = window_at(train_log, rc.model.seq_len);
    PrefixDataset val_ds = window_at(val_log, rc.model.seq_len);

    TrainRun run = train(rc.model, pd.encoded_schema, train_ds, val_ds);
    {
        std::ofstream out(model_file(rc, rc.model.kind), std::ios::binary);
        run.model->save(out);
    }
    {
        auto out = open_out(out_path(rc, "history_" + to_string(rc.model.kind) + ".csv"));
        out << "epoch,train_loss,train_accuracy,val_auc_roc,wall_seconds\n";
        for (std::size_t e = 0; e < run.history.size(); ++e)
            out << e + 1 << "," << run.history[e].train_loss << ","
                << run.history[e].train_accuracy << "," << run.history[e].val_auc_roc << ","
                << run.history[e].wall_seconds << "\n";
    }
    std::printf("train(%s): %zu epochs, best epoch %zu, best val AUC_ROC %.4f -> %s\n",
                to_string(rc.model.kind).c_str(), run.history.size(), run.best_epoch,
                run.best_val_auc, model_file(rc, rc.model.kind).c_str());
    return 0;
}

// wall seconds of the best trial in a tune ledger, if one exists
double ledger_best_seconds(const std::string& path) {
    std::ifstream in(path);
    if (!in) return 0.0;
    std::string line;
    std::getline(in, line); // header
    double best_auc = -1.0, best_secs = 0.0;
    while (std::getline(in, line)) {
        auto cols = split_list(line);
        if (cols.size() < 10 || cols[9] != "ok") continue;
        double auc = std::stod(cols[7]);
        if (auc > best_auc) {
            best_auc = auc;
            best_secs = std::stod(cols[8]);
        }
    }
    return best_secs;
}

int cmd_evaluate(const RunConfig& rc) {
    Source src = load_source(rc);
    PreparedData pd = prepare_pipeline(src.raw, src.rule, rc.test_fraction);
    std::vector<KindResult> results;
    for (ModelKind kind : rc.kinds) {
        const std::string path = model_file(rc, kind);
        if (!fs::exists(path)) continue;
        auto net = load_model(path);
        PrefixDataset test_ds = window_at(pd.test, net->config().seq_len);
        auto scores = predict_dataset(*net, test_ds);
        KindResult r;
        r.kind = kind;
        r.config = net->config();
        r.metrics = evaluate_scores(scores, dataset_targets(test_ds));
        r.wall_seconds = ledger_best_seconds(out_path(rc, "ledger_" + to_string(kind) + ".csv"));
        results.push_back(std::move(r));
    }
    if (results.empty())
        throw std::runtime_error("evaluate: no trained model files found in " + rc.output_dir);
    auto rows = report_table(results);
    {
        auto out = open_out(out_path(rc, "report.csv"));
        write_report_csv(rows, out);
    }
    std::string text = render_report_text(rows);
    {
        auto out = open_out(out_path(rc, "report.txt"));
        out << text;
    }
    std::fputs(text.c_str(), stdout);
    std::printf("evaluate: %zu model(s) on %zu test prefixes -> %s\n", results.size(),
                window_at(pd.test, results.front().config.seq_len).matrices.size(),
                out_path(rc, "report.csv").c_str());
    return 0;
}

int cmd_earliness(const RunConfig& rc) {
    Source src = load_source(rc);
    PreparedData pd = prepare_pipeline(src.raw, src.rule, rc.test_fraction);
    auto net = load_model(model_file(rc, rc.model.kind));
    PrefixDataset test_ds = window_at(pd.test, net->config().seq_len);
    EarlinessCurve curve = earliness(*net, test_ds, rc.earliness_max_prefix);
    auto out = open_out(out_path(rc, "earliness_" + to_string(rc.model.kind) + ".csv"));
    write_earliness_csv(curve, out);
    std::printf("earliness(%s): %zu prefix-length groups, aggregate AUC_ROC %.4f -> %s\n",
                to_string(rc.model.kind).c_str(), curve.points.size(),
                curve.aggregate_auc.value_or(0.0),
                out_path(rc, "earliness_" + to_string(rc.model.kind) + ".csv").c_str());
    return 0;
}

int cmd_ablate(const RunConfig& rc) {
    Source src = load_source(rc);
    auto rows = ablate(rc.model, src.raw, src.rule, rc.ablation_variants, rc.ablation_seeds,
                       rc.test_fraction, rc.master_seed);
    auto out = open_out(out_path(rc, "ablation.csv"));
    write_ablation_csv(rows, out);
    std::string summary;
    for (const auto& r : rows) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s %.4f±%.4f  ", to_string(r.variant).c_str(),
                      r.mean_auc, r.std_auc);
        summary += buf;
    }
    std::printf("ablate(%s, %zu seeds): %s-> %s\n", to_string(rc.model.kind).c_str(),
                rc.ablation_seeds, summary.c_str(), out_path(rc, "ablation.csv").c_str());
    return 0;
}

int cmd_gradcheck() {
    EncodedSchema schema;
    schema.cat_cols.push_back({"activity", 9, 2});
    schema.n_range = 2;
    std::mt19937_64 rng(102);
    bool ok = true;
    for (ModelKind kind : {ModelKind::Lstm, ModelKind::LstmAttention, ModelKind::Cnn}) {
        ModelConfig cfg;
        cfg.kind = kind;
        cfg.seq_len = 6;
        cfg.kernel_size = 3;
        cfg.size_multiplier = 1;
        cfg.seed = rng();
        Network net(cfg, schema);
        std::vector<PrefixMatrix> store;
        std::vector<int> targets;
        std::uniform_real_distribution<double> rd(-1.5, 1.5);
        for (int i = 0; i < 3; ++i) {
            PrefixMatrix m;
            m.case_id = "c";
            m.prefix_length = 1 + rng() % cfg.seq_len;
            m.target = static_cast<int>(rng() % 2);
            std::size_t pad = cfg.seq_len - m.prefix_length;
            for (std::size_t r = 0; r < cfg.seq_len; ++r) {
                m.cats.push_back(r < pad ? 0 : static_cast<std::int32_t>(1 + rng() % 8));
                for (int j = 0; j < 2; ++j) m.ranges.push_back(r < pad ? 0.0 : rd(rng));
            }
            store.push_back(std::move(m));
            targets.push_back(store.back().target);
        }
        std::vector<const PrefixMatrix*> batch;
        for (auto& m : store) batch.push_back(&m);
        // move off the relu/pooling ties of the freshly initialized biases
        jitter_parameters(net, 0.1, 7);
        double err = grad_check(net, batch, targets);
        std::printf("gradcheck %-14s max relative error %.3e %s\n", to_string(kind).c_str(),
                    err, err < 1e-5 ? "ok" : "FAIL");
        if (err >= 1e-5) ok = false;
    }
    if (!ok) throw std::runtime_error("gradcheck: max relative error >= 1e-5");
    return 0;
}

int cmd_synth(const RunConfig& rc) {
    if (!rc.synthetic) throw std::runtime_error("synth: config needs a [synthetic] section");
    SyntheticLog gen = generate_synthetic_log(*rc.synthetic);
    {
        auto out = open_out(out_path(rc, "synthetic.csv"));
        write_csv(gen.log, out);
    }
    {
        auto out = open_out(out_path(rc, "synthetic_truth.csv"));
        out << "case_id,target\n";
        std::vector<std::pair<std::string, int>> rows(gen.truth.begin(), gen.truth.end());
        std::sort(rows.begin(), rows.end());
        for (const auto& [id, t] : rows) out << id << "," << t << "\n";
    }
    std::size_t pos = 0;
    for (const auto& [id, t] : gen.truth) pos += static_cast<std::size_t>(t);
    std::printf("synth: %zu cases (%zu positive), %zu events -> %s\n", gen.log.cases.size(),
                pos, gen.log.total_events(), out_path(rc, "synthetic.csv").c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ppm: process-outcome prediction pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::size_t jobs = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* opt = cmd->add_option("-c,--config", config_path, "run config file (ini)");
        if (needs_config) opt->required();
        cmd->add_option("-s,--set", overrides, "override a config key (section.key=value)");
        cmd->add_option("-j,--jobs", jobs, "parallel trial bound");
        return cmd;
    };

    auto* prepare = add_common(app.add_subcommand("prepare", "ingest, label, encode, window"));
    auto* tune = add_common(app.add_subcommand("tune", "random hyperparameter search"));
    auto* train = add_common(app.add_subcommand("train", "train one configuration"));
    auto* evaluate = add_common(app.add_subcommand("evaluate", "test-set report table"));
    auto* earliness_cmd =
        add_common(app.add_subcommand("earliness", "per-prefix-length AUC curve"));
    auto* ablate_cmd = add_common(app.add_subcommand("ablate", "feature-ablation study"));
    auto* gradcheck_cmd = add_common(
        app.add_subcommand("gradcheck", "finite-difference gradient verification"), false);
    auto* synth = add_common(app.add_subcommand("synth", "generate a synthetic event log"));

    CLI11_PARSE(app, argc, argv);

    try {
        if (gradcheck_cmd->parsed()) return cmd_gradcheck();
        RunConfig rc = load_config(config_path, overrides);
        if (prepare->parsed()) return cmd_prepare(rc);
        if (tune->parsed()) return cmd_tune(rc, jobs);
        if (train->parsed()) return cmd_train(rc);
        if (evaluate->parsed()) return cmd_evaluate(rc);
        if (earliness_cmd->parsed()) return cmd_earliness(rc);
        if (ablate_cmd->parsed()) return cmd_ablate(rc);
        if (synth->parsed()) return cmd_synth(rc);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ';');
        std::fprintf(stderr, "ERROR %s\n", msg.c_str());
        return 1;
    }
    return 0;
}
