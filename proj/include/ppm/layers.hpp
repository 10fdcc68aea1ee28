#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ppm/rng.hpp"
#include "ppm/tensor.hpp"

namespace ppm {

double sigmoid(double x);
std::vector<double> softmax(const std::vector<double>& z);

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Binary cross-entropy on probabilities; clamps p to [eps, 1-eps].
// Returns (mean loss, dL/dp per element).
std::pair<double, std::vector<double>> bce_loss(const std::vector<double>& p,
                                                const std::vector<int>& y);

// Lookup layer for one categorical column. Row 0 is the padding row: held at
// zero and never updated.
class Embedding {
public:
    Embedding(std::string name, std::size_t vocab, std::size_t dim, Rng& rng);

    Tensor forward(const std::vector<std::int32_t>& idx, std::size_t B, std::size_t S);
    void backward(const Tensor& dy);

    Parameter& param() { return table_; }
    std::size_t dim() const { return dim_; }
    std::size_t vocab() const { return vocab_; }

private:
    Parameter table_; // [V, d]
    std::size_t vocab_, dim_;
    std::vector<std::int32_t> idx_;
    std::size_t B_ = 0, S_ = 0;
};

enum class Activation { None, ReLU, Tanh, Sigmoid };

class Dense {
public:
    Dense(std::string name, std::size_t in, std::size_t out, Activation act, Rng& rng);

    Tensor forward(const Tensor& x); // [B,in] -> [B,out]
    Tensor backward(const Tensor& dy);

    Parameter& weight() { return w_; }
    Parameter& bias() { return b_; }
    std::size_t in_dim() const { return in_; }
    std::size_t out_dim() const { return out_; }

private:
    Parameter w_; // [in,out]
    Parameter b_; // [out]
    std::size_t in_, out_;
    Activation act_;
    Tensor x_, y_;
};

// Single-layer LSTM; gate order in packed parameters is (input, forget,
// candidate, output). Forget-gate bias starts at 1.
class Lstm {
public:
    Lstm(std::string name, std::size_t in, std::size_t hidden, Rng& rng);

    // x: [B,S,in] -> all hidden states [B,S,h]
    Tensor forward(const Tensor& x);
    // d_states: [B,S,h] (zero rows for unused timesteps) -> dx [B,S,in]
    Tensor backward(const Tensor& d_states);

    Parameter& input_kernel() { return wx_; }
    Parameter& recurrent_kernel() { return wh_; }
    Parameter& gate_bias() { return b_; }
    std::size_t hidden() const { return h_; }

private:
    Parameter wx_; // [in, 4h]
    Parameter wh_; // [h, 4h]
    Parameter b_;  // [4h]
    std::size_t in_, h_;
    Tensor x_, gates_; // gates_: [B,S,4h] post-activation
    Tensor cells_;     // [B,S,h]
    Tensor states_;    // [B,S,h]
};

// Additive (Bahdanau-style) attention with a single learned query vector.
class AdditiveAttention {
public:
    AdditiveAttention(std::string name, std::size_t hidden, std::size_t attn, Rng& rng);

    // states: [B,S,h] -> context [B,h]; attention weights cached per call
    Tensor forward(const Tensor& states);
    Tensor backward(const Tensor& dy);

    const Tensor& weights() const { return alpha_; } // [B,S]
    Parameter& score_kernel() { return w_; }
    Parameter& score_query() { return v_; }

private:
    Parameter w_; // [h,a]
    Parameter v_; // [a]
    std::size_t h_, a_;
    Tensor states_, u_, alpha_;
};

class Conv1D {
public:
    Conv1D(std::string name, std::size_t in, std::size_t filters, std::size_t ksize,
           Activation act, Rng& rng);

    Tensor forward(const Tensor& x); // [B,S,in] -> [B,S-k+1,f]
    Tensor backward(const Tensor& dy);

    Parameter& kernel() { return ker_; }
    Parameter& bias() { return b_; }
    std::size_t ksize() const { return k_; }
    std::size_t filters() const { return f_; }

private:
    Parameter ker_; // [k,in,f]
    Parameter b_;   // [f]
    std::size_t in_, f_, k_;
    Activation act_;
    Tensor x_, y_;
};

// Window-2 stride-2 max pooling over the time axis; trailing odd element is
// dropped, gradient goes to the first element of a tied window.
class MaxPool1D {
public:
    Tensor forward(const Tensor& x); // [B,L,f] -> [B,L/2,f]
    Tensor backward(const Tensor& dy);

private:
    std::vector<std::size_t> argmax_;
    std::vector<std::size_t> in_shape_;
};

} // namespace ppm
