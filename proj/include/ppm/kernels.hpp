#pragma once

#include <cstddef>

// Hot inner loops shared by the layers. Each kernel has a serial reference
// implementation under kernels::serial and an OpenMP version under
// kernels::par; the default entry points dispatch to the parallel ones.
// Parallelization is over independent output slices only, so results are
// identical to the serial path bit for bit.
namespace ppm::kernels {

namespace serial {

// y[b,o] = bias[o] + sum_i x[b,i] * w[i,o]   (bias may be null)
void dense_forward(const double* x, const double* w, const double* bias,
                   double* y, std::size_t B, std::size_t in, std::size_t out);

// dx[b,i] += sum_o dy[b,o] * w[i,o]
// dw[i,o] += sum_b x[b,i] * dy[b,o]
// db[o]   += sum_b dy[b,o]
// any of dx/dw/db may be null to skip
void dense_backward(const double* x, const double* w, const double* dy,
                    double* dx, double* dw, double* db,
                    std::size_t B, std::size_t in, std::size_t out);

// y[b,t,j] = bias[j] + sum_{tau<k,i} x[b,t+tau,i] * ker[tau,i,j]
// x: [B,S,in], ker: [k,in,f], y: [B,S-k+1,f]
void conv1d_forward(const double* x, const double* ker, const double* bias,
                    double* y, std::size_t B, std::size_t S, std::size_t in,
                    std::size_t k, std::size_t f);

void conv1d_backward(const double* x, const double* ker, const double* dy,
                     double* dx, double* dker, double* dbias,
                     std::size_t B, std::size_t S, std::size_t in,
                     std::size_t k, std::size_t f);

} // namespace serial

namespace par {

void dense_forward(const double* x, const double* w, const double* bias,
                   double* y, std::size_t B, std::size_t in, std::size_t out);
void dense_backward(const double* x, const double* w, const double* dy,
                    double* dx, double* dw, double* db,
                    std::size_t B, std::size_t in, std::size_t out);
void conv1d_forward(const double* x, const double* ker, const double* bias,
                    double* y, std::size_t B, std::size_t S, std::size_t in,
                    std::size_t k, std::size_t f);
void conv1d_backward(const double* x, const double* ker, const double* dy,
                     double* dx, double* dker, double* dbias,
                     std::size_t B, std::size_t S, std::size_t in,
                     std::size_t k, std::size_t f);

} // namespace par

using par::conv1d_backward;
using par::conv1d_forward;
using par::dense_backward;
using par::dense_forward;

} // namespace ppm::kernels
