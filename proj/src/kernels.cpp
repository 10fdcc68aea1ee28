#include "ppm/kernels.hpp"

#include <cstdint>

namespace ppm::kernels {

namespace serial {

void dense_forward(const double* x, const double* w, const double* bias,
                   double* y, std::size_t B, std::size_t in, std::size_t out) {
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t o = 0; o < out; ++o) {
            double acc = bias ? bias[o] : 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += x[b * in + i] * w[i * out + o];
            y[b * out + o] = acc;
        }
    }
}

void dense_backward(const double* x, const double* w, const double* dy,
                    double* dx, double* dw, double* db,
                    std::size_t B, std::size_t in, std::size_t out) {
    if (dx) {
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t i = 0; i < in; ++i) {
                double acc = 0.0;
                for (std::size_t o = 0; o < out; ++o) acc += dy[b * out + o] * w[i * out + o];
                dx[b * in + i] += acc;
            }
    }
    if (dw) {
        for (std::size_t i = 0; i < in; ++i)
            for (std::size_t o = 0; o < out; ++o) {
                double acc = 0.0;
                for (std::size_t b = 0; b < B; ++b) acc += x[b * in + i] * dy[b * out + o];
                dw[i * out + o] += acc;
            }
    }
    if (db) {
        for (std::size_t o = 0; o < out; ++o) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b) acc += dy[b * out + o];
            db[o] += acc;
        }
    }
}

void conv1d_forward(const double* x, const double* ker, const double* bias,
                    double* y, std::size_t B, std::size_t S, std::size_t in,
                    std::size_t k, std::size_t f) {
    const std::size_t L = S - k + 1;
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t j = 0; j < f; ++j) {
                double acc = bias ? bias[j] : 0.0;
                for (std::size_t tau = 0; tau < k; ++tau)
                    for (std::size_t i = 0; i < in; ++i)
                        acc += x[(b * S + t + tau) * in + i] * ker[(tau * in + i) * f + j];
                y[(b * L + t) * f + j] = acc;
            }
}

void conv1d_backward(const double* x, const double* ker, const double* dy,
                     double* dx, double* dker, double* dbias,
                     std::size_t B, std::size_t S, std::size_t in,
                     std::size_t k, std::size_t f) {
    const std::size_t L = S - k + 1;
    if (dx) {
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t t = 0; t < L; ++t)
                for (std::size_t tau = 0; tau < k; ++tau)
                    for (std::size_t i = 0; i < in; ++i) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < f; ++j)
                            acc += dy[(b * L + t) * f + j] * ker[(tau * in + i) * f + j];
                        dx[(b * S + t + tau) * in + i] += acc;
                    }
    }
    if (dker) {
        for (std::size_t tau = 0; tau < k; ++tau)
            for (std::size_t i = 0; i < in; ++i)
                for (std::size_t j = 0; j < f; ++j) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < B; ++b)
                        for (std::size_t t = 0; t < L; ++t)
                            acc += x[(b * S + t + tau) * in + i] * dy[(b * L + t) * f + j];
                    dker[(tau * in + i) * f + j] += acc;
                }
    }
    if (dbias) {
        for (std::size_t j = 0; j < f; ++j) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t t = 0; t < L; ++t) acc += dy[(b * L + t) * f + j];
            dbias[j] += acc;
        }
    }
}

} // namespace serial

namespace par {

void dense_forward(const double* x, const double* w, const double* bias,
                   double* y, std::size_t B, std::size_t in, std::size_t out) {
    const std::int64_t n = static_cast<std::int64_t>(B);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < n; ++b) {
        for (std::size_t o = 0; o < out; ++o) {
            double acc = bias ? bias[o] : 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += x[b * in + i] * w[i * out + o];
            y[b * out + o] = acc;
        }
    }
}

void dense_backward(const double* x, const double* w, const double* dy,
                    double* dx, double* dw, double* db,
                    std::size_t B, std::size_t in, std::size_t out) {
    if (dx) {
        const std::int64_t n = static_cast<std::int64_t>(B);
#pragma omp parallel for schedule(static)
        for (std::int64_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < in; ++i) {
                double acc = 0.0;
                for (std::size_t o = 0; o < out; ++o) acc += dy[b * out + o] * w[i * out + o];
                dx[b * in + i] += acc;
            }
    }
    if (dw) {
        // each (i,o) slot owned by one thread: batch sum order stays serial
        const std::int64_t n = static_cast<std::int64_t>(in);
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < out; ++o) {
                double acc = 0.0;
                for (std::size_t b = 0; b < B; ++b) acc += x[b * in + i] * dy[b * out + o];
                dw[i * out + o] += acc;
            }
    }
    if (db) {
        for (std::size_t o = 0; o < out; ++o) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b) acc += dy[b * out + o];
            db[o] += acc;
        }
    }
}

void conv1d_forward(const double* x, const double* ker, const double* bias,
                    double* y, std::size_t B, std::size_t S, std::size_t in,
                    std::size_t k, std::size_t f) {
    const std::size_t L = S - k + 1;
    const std::int64_t n = static_cast<std::int64_t>(B);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < n; ++b)
        for (std::size_t t = 0; t < L; ++t)
            for (std::size_t j = 0; j < f; ++j) {
                double acc = bias ? bias[j] : 0.0;
                for (std::size_t tau = 0; tau < k; ++tau)
                    for (std::size_t i = 0; i < in; ++i)
                        acc += x[(b * S + t + tau) * in + i] * ker[(tau * in + i) * f + j];
                y[(b * L + t) * f + j] = acc;
            }
}

void conv1d_backward(const double* x, const double* ker, const double* dy,
                     double* dx, double* dker, double* dbias,
                     std::size_t B, std::size_t S, std::size_t in,
                     std::size_t k, std::size_t f) {
    const std::size_t L = S - k + 1;
    if (dx) {
        const std::int64_t n = static_cast<std::int64_t>(B);
#pragma omp parallel for schedule(static)
        for (std::int64_t b = 0; b < n; ++b)
            for (std::size_t t = 0; t < L; ++t)
                for (std::size_t tau = 0; tau < k; ++tau)
                    for (std::size_t i = 0; i < in; ++i) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < f; ++j)
                            acc += dy[(b * L + t) * f + j] * ker[(tau * in + i) * f + j];
                        dx[(b * S + t + tau) * in + i] += acc;
                    }
    }
    if (dker) {
        const std::int64_t n = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static)
        for (std::int64_t tau = 0; tau < n; ++tau)
            for (std::size_t i = 0; i < in; ++i)
                for (std::size_t j = 0; j < f; ++j) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < B; ++b)
                        for (std::size_t t = 0; t < L; ++t)
                            acc += x[(b * S + t + tau) * in + i] * dy[(b * L + t) * f + j];
                    dker[(tau * in + i) * f + j] += acc;
                }
    }
    if (dbias) {
        for (std::size_t j = 0; j < f; ++j) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t t = 0; t < L; ++t) acc += dy[(b * L + t) * f + j];
            dbias[j] += acc;
        }
    }
}

} // namespace par

} // namespace ppm::kernels
