#include "ppm/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ppm/adam.hpp"
#include "ppm/metrics.hpp"
#include "ppm/rng.hpp"

namespace ppm {

std::pair<std::vector<Case>, std::vector<Case>> shuffle_split(const std::vector<Case>& cases,
                                                              double train_fraction,
                                                              std::uint64_t seed) {
    if (cases.size() < 2) throw std::runtime_error("DegenerateSplit");
    std::vector<std::size_t> order(cases.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(cases.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, cases.size() - 1);
    std::vector<Case> train, val;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_train ? train : val).push_back(cases[order[i]]);
    return {std::move(train), std::move(val)};
}

std::vector<double> predict_dataset(Network& net, const PrefixDataset& ds) {
    std::vector<double> scores;
    scores.reserve(ds.matrices.size());
    const std::size_t bs = net.config().batch_size;
    for (std::size_t i = 0; i < ds.matrices.size(); i += bs) {
        std::vector<const PrefixMatrix*> batch;
        for (std::size_t j = i; j < std::min(i + bs, ds.matrices.size()); ++j)
            batch.push_back(&ds.matrices[j]);
        auto p = net.forward(batch);
        scores.insert(scores.end(), p.begin(), p.end());
    }
    return scores;
}

TrainRun train(const ModelConfig& config, const EncodedSchema& schema,
               const PrefixDataset& train_ds, const PrefixDataset& val_ds,
               const TrainOptions& options) {
    if (train_ds.matrices.empty() || val_ds.matrices.empty())
        throw std::runtime_error("EmptyDataset");
    if (train_ds.seq_len != config.seq_len || val_ds.seq_len != config.seq_len)
        throw std::runtime_error("train: dataset seq_len does not match config");

    TrainRun run;
    run.config = config;
    run.model = std::make_unique<Network>(config, schema);
    Adam opt(run.model->parameters(), config.learning_rate);
    Rng shuffle_rng(mix_seed(config.seed, 0x5EU));

    std::vector<int> val_labels;
    for (const auto& m : val_ds.matrices) val_labels.push_back(m.target);

    std::vector<std::size_t> order(train_ds.matrices.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<Tensor> best_snapshot;
    std::size_t stagnant = 0;
    bool have_best = false;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < order.size(); i += config.batch_size) {
            std::vector<const PrefixMatrix*> batch;
            std::vector<int> targets;
            for (std::size_t j = i; j < std::min(i + config.batch_size, order.size()); ++j) {
                batch.push_back(&train_ds.matrices[order[j]]);
                targets.push_back(train_ds.matrices[order[j]].target);
            }
            run.model->zero_grad();
            auto probs = run.model->forward(batch);
            auto [loss, dprob] = bce_loss(probs, targets);
            if (!std::isfinite(loss))
                throw std::runtime_error("NonFiniteLoss: epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(i / config.batch_size));
            run.model->backward(dprob);
            opt.step();
            loss_sum += loss * static_cast<double>(batch.size());
            for (std::size_t j = 0; j < probs.size(); ++j)
                if ((probs[j] >= 0.5) == (targets[j] == 1)) ++correct;
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(order.size());
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        if (options.val_metric_override) {
            stats.val_auc_roc = options.val_metric_override(epoch);
        } else {
            auto scores = predict_dataset(*run.model, val_ds);
            auto auc = auc_roc(scores, val_labels);
            stats.val_auc_roc = auc ? *auc : std::numeric_limits<double>::quiet_NaN();
        }
        stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        run.history.push_back(stats);
        if (options.verbose)
            std::cerr << "epoch " << epoch << " loss " << stats.train_loss << " acc "
                      << stats.train_accuracy << " val_auc " << stats.val_auc_roc << "\n";

        // strict improvement over the best seen so far
        if (!have_best || stats.val_auc_roc > run.best_val_auc) {
            run.best_val_auc = stats.val_auc_roc;
            run.best_epoch = epoch;
            best_snapshot = run.model->snapshot();
            have_best = true;
            stagnant = 0;
        } else {
            ++stagnant;
            if (stagnant >= config.patience) break;
        }
    }
    if (have_best) run.model->restore(best_snapshot);
    return run;
}

void write_trial_ledger_header(std::ostream& out) {
    out << "trial_id,kind,batch_size,seq_len,kernel_size,size_multiplier,seed,"
           "best_val_auc,wall_seconds,status\n";
}

void write_trial_ledger_row(const TrialRecord& r, std::ostream& out) {
    out << r.trial_id << "," << to_string(r.config.kind) << "," << r.config.batch_size << ","
        << r.config.seq_len << ","
        << (r.config.kind == ModelKind::Cnn ? std::to_string(r.config.kernel_size) : "") << ","
        << r.config.size_multiplier << "," << r.config.seed << "," << r.best_val_auc << ","
        << r.wall_seconds << "," << r.status << "\n";
}

std::size_t median_case_length(const EventLog& log) {
    std::vector<std::size_t> lens;
    for (const auto& c : log.cases) lens.push_back(c.events.size());
    if (lens.empty()) return 0;
    std::sort(lens.begin(), lens.end());
    return lens[lens.size() / 2];
}

static std::set<std::size_t> completed_trials(const std::string& ledger_path) {
    std::set<std::size_t> done;
    std::ifstream in(ledger_path);
    if (!in) return done;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        auto comma = line.find(',');
        if (comma != std::string::npos) {
            try {
                done.insert(std::stoul(line.substr(0, comma)));
            } catch (const std::exception&) {
            }
        }
    }
    return done;
}

SearchResult random_search(ModelKind kind, const SearchGrid& grid, std::size_t n_trials,
                           std::uint64_t master_seed, const EventLog& pool_encoded,
                           const EncodedSchema& schema, std::size_t jobs,
                           const std::string& ledger_path) {
    if (n_trials == 0) n_trials = (kind == ModelKind::Cnn) ? 100 : 50;

    // enumerate the full grid, then draw without replacement when possible
    std::vector<ModelConfig> combos;
    for (std::size_t bs : grid.batch_sizes)
        for (std::size_t sl : grid.seq_lens)
            for (std::size_t sm : grid.size_multipliers) {
                if (kind == ModelKind::Cnn) {
                    for (std::size_t ks : grid.kernel_sizes) {
                        if (ks > sl) continue; // geometry cannot fit
                        ModelConfig c;
                        c.kind = kind;
                        c.batch_size = bs;
                        c.seq_len = sl;
                        c.size_multiplier = sm;
                        c.kernel_size = ks;
                        combos.push_back(c);
                    }
                } else {
                    ModelConfig c;
                    c.kind = kind;
                    c.batch_size = bs;
                    c.seq_len = sl;
                    c.size_multiplier = sm;
                    combos.push_back(c);
                }
            }
    if (combos.empty()) throw std::runtime_error("random_search: empty grid");

    Rng rng(mix_seed(master_seed, 0xA11Au));
    std::vector<ModelConfig> picks;
    if (combos.size() >= n_trials) {
        std::shuffle(combos.begin(), combos.end(), rng);
        picks.assign(combos.begin(), combos.begin() + static_cast<std::ptrdiff_t>(n_trials));
    } else {
        std::uniform_int_distribution<std::size_t> dist(0, combos.size() - 1);
        for (std::size_t i = 0; i < n_trials; ++i) picks.push_back(combos[dist(rng)]);
    }

    std::set<std::size_t> done = ledger_path.empty() ? std::set<std::size_t>{}
                                                     : completed_trials(ledger_path);
    std::ofstream ledger;
    if (!ledger_path.empty()) {
        bool fresh = done.empty();
        ledger.open(ledger_path, fresh ? std::ios::trunc : std::ios::app);
        if (fresh) write_trial_ledger_header(ledger);
    }

    struct TrialOutput {
        TrialRecord record;
        std::unique_ptr<Network> model;
    };
    std::vector<TrialOutput> outputs(n_trials);
    std::mutex ledger_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            std::size_t id = next.fetch_add(1);
            if (id >= n_trials) return;
            TrialOutput& out = outputs[id];
            out.record.trial_id = id;
            ModelConfig cfg = picks[id];
            cfg.seed = mix_seed(master_seed, id);
            cfg.max_epochs = grid.max_epochs;
            cfg.learning_rate = grid.learning_rate;
            out.record.config = cfg;
            if (done.count(id)) {
                out.record.status = "skipped";
                continue;
            }
            auto t0 = std::chrono::steady_clock::now();
            try {
                auto [train_cases, val_cases] =
                    shuffle_split(pool_encoded.cases, 0.8, mix_seed(cfg.seed, 0x51u));
                EventLog train_log{pool_encoded.schema, std::move(train_cases)};
                EventLog val_log{pool_encoded.schema, std::move(val_cases)};
                PrefixDataset train_ds = window_log(train_log, cfg.seq_len);
                PrefixDataset val_ds = window_log(val_log, cfg.seq_len);
                TrainRun run = train(cfg, schema, train_ds, val_ds);
                out.record.best_val_auc = run.best_val_auc;
                out.record.status = "ok";
                out.model = std::move(run.model);
            } catch (const std::exception& e) {
                out.record.status = std::string("failed: ") + e.what();
                out.record.best_val_auc = 0.0;
            }
            out.record.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (ledger.is_open()) {
                std::lock_guard<std::mutex> lock(ledger_mutex);
                write_trial_ledger_row(out.record, ledger);
                ledger.flush();
            }
        }
    };

    jobs = std::max<std::size_t>(1, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < jobs; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    // NaN val auc (single-class validation split) sorts below everything
    auto key = [](double v) {
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };
    SearchResult result;
    std::size_t best = n_trials;
    for (std::size_t i = 0; i < n_trials; ++i) {
        if (outputs[i].record.status == "ok" &&
            (best == n_trials ||
             key(outputs[i].record.best_val_auc) > key(outputs[best].record.best_val_auc)))
            best = i;
        result.records.push_back(outputs[i].record);
    }
    std::stable_sort(result.records.begin(), result.records.end(),
                     [&](const TrialRecord& a, const TrialRecord& b) {
                         return key(a.best_val_auc) > key(b.best_val_auc);
                     });
    if (best < n_trials) {
        result.best_model = std::move(outputs[best].model);
        result.best_trial_id = best;
    }
    return result;
}

} // namespace ppm
