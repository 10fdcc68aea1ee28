// Benchmarks the serial reference kernels against the OpenMP versions, checks
// that both produce identical results, and times one training epoch of the
// CNN vs the LSTM on a synthetic dataset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "ppm/experiments.hpp"
#include "ppm/kernels.hpp"
#include "ppm/training.hpp"

using namespace ppm;

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::vector<double> rand_vec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        double t0 = now();
        fn();
        best = std::min(best, now() - t0);
    }
    return best;
}

void bench_dense(std::size_t B, std::size_t in, std::size_t out) {
    std::mt19937_64 rng(1);
    auto x = rand_vec(B * in, rng), w = rand_vec(in * out, rng), bias = rand_vec(out, rng);
    std::vector<double> ys(B * out), yp(B * out);

    double ts = time_best_of(5, [&] {
        kernels::serial::dense_forward(x.data(), w.data(), bias.data(), ys.data(), B, in, out);
    });
    double tp = time_best_of(5, [&] {
        kernels::par::dense_forward(x.data(), w.data(), bias.data(), yp.data(), B, in, out);
    });
    std::printf("dense_forward   B=%-5zu in=%-4zu out=%-4zu  serial %8.3f ms  omp %8.3f ms  "
                "speedup %5.2fx  max|diff| %g\n",
                B, in, out, ts * 1e3, tp * 1e3, ts / tp, max_abs_diff(ys, yp));

    auto dy = rand_vec(B * out, rng);
    std::vector<double> dxs(B * in), dws(in * out), dbs(out);
    std::vector<double> dxp(B * in), dwp(in * out), dbp(out);
    ts = time_best_of(5, [&] {
        std::fill(dxs.begin(), dxs.end(), 0.0);
        std::fill(dws.begin(), dws.end(), 0.0);
        std::fill(dbs.begin(), dbs.end(), 0.0);
        kernels::serial::dense_backward(x.data(), w.data(), dy.data(), dxs.data(), dws.data(),
                                        dbs.data(), B, in, out);
    });
    tp = time_best_of(5, [&] {
        std::fill(dxp.begin(), dxp.end(), 0.0);
        std::fill(dwp.begin(), dwp.end(), 0.0);
        std::fill(dbp.begin(), dbp.end(), 0.0);
        kernels::par::dense_backward(x.data(), w.data(), dy.data(), dxp.data(), dwp.data(),
                                     dbp.data(), B, in, out);
    });
    std::printf("dense_backward  B=%-5zu in=%-4zu out=%-4zu  serial %8.3f ms  omp %8.3f ms  "
                "speedup %5.2fx  max|diff| %g\n",
                B, in, out, ts * 1e3, tp * 1e3, ts / tp,
                std::max({max_abs_diff(dxs, dxp), max_abs_diff(dws, dwp),
                          max_abs_diff(dbs, dbp)}));
}

void bench_conv(std::size_t B, std::size_t S, std::size_t in, std::size_t k, std::size_t f) {
    std::mt19937_64 rng(2);
    const std::size_t So = S - k + 1;
    auto x = rand_vec(B * S * in, rng), ker = rand_vec(k * in * f, rng), bias = rand_vec(f, rng);
    std::vector<double> ys(B * So * f), yp(B * So * f);

    double ts = time_best_of(5, [&] {
        kernels::serial::conv1d_forward(x.data(), ker.data(), bias.data(), ys.data(), B, S, in,
                                        k, f);
    });
    double tp = time_best_of(5, [&] {
        kernels::par::conv1d_forward(x.data(), ker.data(), bias.data(), yp.data(), B, S, in, k,
                                     f);
    });
    std::printf("conv1d_forward  B=%-5zu S=%-3zu in=%-3zu k=%zu f=%-4zu serial %8.3f ms  "
                "omp %8.3f ms  speedup %5.2fx  max|diff| %g\n",
                B, S, in, k, f, ts * 1e3, tp * 1e3, ts / tp, max_abs_diff(ys, yp));

    auto dy = rand_vec(B * So * f, rng);
    std::vector<double> dxs(B * S * in), dks(k * in * f), dbs(f);
    std::vector<double> dxp(B * S * in), dkp(k * in * f), dbp(f);
    ts = time_best_of(5, [&] {
        std::fill(dxs.begin(), dxs.end(), 0.0);
        std::fill(dks.begin(), dks.end(), 0.0);
        std::fill(dbs.begin(), dbs.end(), 0.0);
        kernels::serial::conv1d_backward(x.data(), ker.data(), dy.data(), dxs.data(),
                                         dks.data(), dbs.data(), B, S, in, k, f);
    });
    tp = time_best_of(5, [&] {
        std::fill(dxp.begin(), dxp.end(), 0.0);
        std::fill(dkp.begin(), dkp.end(), 0.0);
        std::fill(dbp.begin(), dbp.end(), 0.0);
        kernels::par::conv1d_backward(x.data(), ker.data(), dy.data(), dxp.data(), dkp.data(),
                                      dbp.data(), B, S, in, k, f);
    });
    std::printf("conv1d_backward B=%-5zu S=%-3zu in=%-3zu k=%zu f=%-4zu serial %8.3f ms  "
                "omp %8.3f ms  speedup %5.2fx  max|diff| %g\n",
                B, S, in, k, f, ts * 1e3, tp * 1e3, ts / tp,
                std::max({max_abs_diff(dxs, dxp), max_abs_diff(dks, dkp),
                          max_abs_diff(dbs, dbp)}));
}

// one full training epoch per architecture on a shared synthetic dataset
void bench_epoch() {
    SyntheticLogSpec spec;
    spec.n_cases = 500;
    spec.min_events = 8;
    spec.max_events = 20;
    spec.alphabet = 12;
    spec.positive_rate = 0.4;
    spec.seed = 3;
    SyntheticLog gen = generate_synthetic_log(spec);
    PreparedData pd = prepare_pipeline(gen.log, gen.rule, 0.2);
    auto [trc, vac] = shuffle_split(pd.pool.cases, 0.8, 7);
    EventLog trl{pd.pool.schema, std::move(trc)}, val{pd.pool.schema, std::move(vac)};
    PrefixDataset tds = window_log(trl, 15), vds = window_log(val, 15);

    std::printf("\nepoch benchmark: %zu training prefixes, seq_len 15, multiplier 2\n",
                tds.matrices.size());
    for (ModelKind kind : {ModelKind::Cnn, ModelKind::Lstm, ModelKind::LstmAttention}) {
        ModelConfig cfg;
        cfg.kind = kind;
        cfg.seq_len = 15;
        cfg.batch_size = 128;
        cfg.size_multiplier = 2;
        cfg.seed = 11;
        cfg.max_epochs = 2; // warm-up epoch + measured epoch
        TrainOptions opt;
        opt.val_metric_override = [](std::size_t) { return 0.5; }; // no early stop
        TrainRun run = train(cfg, pd.encoded_schema, tds, vds, opt);
        std::printf("  %-14s epoch %8.3f s\n", to_string(kind).c_str(),
                    run.history.back().wall_seconds);
    }
}

} // namespace

int main() {
    std::printf("kernel benchmark (serial reference vs OpenMP)\n");
    bench_dense(4096, 64, 64);
    bench_dense(16384, 128, 128);
    bench_conv(2048, 25, 32, 4, 32);
    bench_conv(8192, 35, 16, 8, 64);
    bench_epoch();
    return 0;
}
