#include "ppm/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppm/kernels.hpp"

namespace ppm {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> softmax(const std::vector<double>& z) {
    double m = *std::max_element(z.begin(), z.end());
    std::vector<double> out(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
}

std::pair<double, std::vector<double>> bce_loss(const std::vector<double>& p,
                                                const std::vector<int>& y) {
    if (p.size() != y.size()) throw std::invalid_argument("bce_loss: size mismatch");
    constexpr double eps = 1e-12;
    const double n = static_cast<double>(p.size());
    double loss = 0.0;
    std::vector<double> grad(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        double pc = std::clamp(p[i], eps, 1.0 - eps);
        loss += y[i] ? -std::log(pc) : -std::log(1.0 - pc);
        grad[i] = (y[i] ? -1.0 / pc : 1.0 / (1.0 - pc)) / n;
    }
    return {loss / n, grad};
}

static void apply_activation(Tensor& y, Activation act) {
    switch (act) {
        case Activation::None: break;
        case Activation::ReLU:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(0.0, y[i]);
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = sigmoid(y[i]);
            break;
    }
}

// dy := dy * act'(z) expressed through the post-activation output y
static void chain_activation(Tensor& dy, const Tensor& y, Activation act) {
    switch (act) {
        case Activation::None: break;
        case Activation::ReLU:
            for (std::size_t i = 0; i < dy.size(); ++i)
                if (y[i] <= 0.0) dy[i] = 0.0;
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < dy.size(); ++i) dy[i] *= 1.0 - y[i] * y[i];
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < dy.size(); ++i) dy[i] *= y[i] * (1.0 - y[i]);
            break;
    }
}

// ---------------------------------------------------------------- Embedding

Embedding::Embedding(std::string name, std::size_t vocab, std::size_t dim, Rng& rng)
    : table_(std::move(name), Tensor({vocab, dim})), vocab_(vocab), dim_(dim) {
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    for (std::size_t r = 1; r < vocab; ++r)
        for (std::size_t c = 0; c < dim; ++c) table_.value.at(r, c) = dist(rng);
    // row 0 stays zero (padding)
}

Tensor Embedding::forward(const std::vector<std::int32_t>& idx, std::size_t B, std::size_t S) {
    if (idx.size() != B * S) throw std::invalid_argument("Embedding: ShapeMismatch");
    for (std::int32_t i : idx)
        if (i < 0 || static_cast<std::size_t>(i) >= vocab_)
            throw std::out_of_range("Embedding: IndexOutOfVocabulary");
    idx_ = idx;
    B_ = B;
    S_ = S;
    Tensor y({B, S, dim_});
    for (std::size_t n = 0; n < idx.size(); ++n) {
        const double* row = table_.value.data() + static_cast<std::size_t>(idx[n]) * dim_;
        std::copy(row, row + dim_, y.data() + n * dim_);
    }
    return y;
}

void Embedding::backward(const Tensor& dy) {
    for (std::size_t n = 0; n < idx_.size(); ++n) {
        std::size_t r = static_cast<std::size_t>(idx_[n]);
        if (r == 0) continue; // padding row receives no gradient
        double* g = table_.grad.data() + r * dim_;
        const double* d = dy.data() + n * dim_;
        for (std::size_t c = 0; c < dim_; ++c) g[c] += d[c];
    }
}

// -------------------------------------------------------------------- Dense

Dense::Dense(std::string name, std::size_t in, std::size_t out, Activation act, Rng& rng)
    : w_(name + ".w", Tensor({in, out})), b_(name + ".b", Tensor({out})),
      in_(in), out_(out), act_(act) {
    glorot_uniform(w_.value, in, out, rng);
}

Tensor Dense::forward(const Tensor& x) {
    if (x.shape().size() != 2 || x.dim(1) != in_)
        throw std::invalid_argument("Dense: ShapeMismatch");
    x_ = x;
    std::size_t B = x.dim(0);
    Tensor y({B, out_});
    kernels::dense_forward(x.data(), w_.value.data(), b_.value.data(), y.data(), B, in_, out_);
    apply_activation(y, act_);
    y_ = y;
    return y;
}

Tensor Dense::backward(const Tensor& dy_in) {
    Tensor dy = dy_in;
    chain_activation(dy, y_, act_);
    std::size_t B = x_.dim(0);
    Tensor dx({B, in_});
    kernels::dense_backward(x_.data(), w_.value.data(), dy.data(), dx.data(),
                            w_.grad.data(), b_.grad.data(), B, in_, out_);
    return dx;
}

// --------------------------------------------------------------------- LSTM

Lstm::Lstm(std::string name, std::size_t in, std::size_t hidden, Rng& rng)
    : wx_(name + ".wx", Tensor({in, 4 * hidden})),
      wh_(name + ".wh", Tensor({hidden, 4 * hidden})),
      b_(name + ".b", Tensor({4 * hidden})), in_(in), h_(hidden) {
    glorot_uniform(wx_.value, in, hidden, rng);
    glorot_uniform(wh_.value, hidden, hidden, rng);
    // forget-gate bias 1
    for (std::size_t j = h_; j < 2 * h_; ++j) b_.value[j] = 1.0;
}

Tensor Lstm::forward(const Tensor& x) {
    if (x.shape().size() != 3 || x.dim(2) != in_)
        throw std::invalid_argument("Lstm: ShapeMismatch");
    const std::size_t B = x.dim(0), S = x.dim(1);
    x_ = x;
    gates_ = Tensor({B, S, 4 * h_});
    cells_ = Tensor({B, S, h_});
    states_ = Tensor({B, S, h_});

    std::vector<double> z(B * 4 * h_);
    std::vector<double> h_prev(B * h_, 0.0), c_prev(B * h_, 0.0);
    std::vector<double> xt(B * in_);
    for (std::size_t t = 0; t < S; ++t) {
        for (std::size_t b = 0; b < B; ++b)
            std::copy(x.data() + (b * S + t) * in_, x.data() + (b * S + t) * in_ + in_,
                      xt.begin() + b * in_);
        // z = xt*Wx + h_prev*Wh + b
        for (std::size_t b = 0; b < B; ++b)
            std::copy(b_.value.data(), b_.value.data() + 4 * h_, z.begin() + b * 4 * h_);
        {
            Tensor tmp({B, 4 * h_});
            kernels::dense_forward(xt.data(), wx_.value.data(), nullptr, tmp.data(), B, in_, 4 * h_);
            for (std::size_t i = 0; i < z.size(); ++i) z[i] += tmp[i];
            kernels::dense_forward(h_prev.data(), wh_.value.data(), nullptr, tmp.data(), B, h_, 4 * h_);
            for (std::size_t i = 0; i < z.size(); ++i) z[i] += tmp[i];
        }
        for (std::size_t b = 0; b < B; ++b) {
            double* g = gates_.data() + (b * S + t) * 4 * h_;
            const double* zb = z.data() + b * 4 * h_;
            for (std::size_t j = 0; j < h_; ++j) {
                double ig = sigmoid(zb[j]);
                double fg = sigmoid(zb[h_ + j]);
                double cg = std::tanh(zb[2 * h_ + j]);
                double og = sigmoid(zb[3 * h_ + j]);
                g[j] = ig;
                g[h_ + j] = fg;
                g[2 * h_ + j] = cg;
                g[3 * h_ + j] = og;
                double c = fg * c_prev[b * h_ + j] + ig * cg;
                cells_.at(b, t, j) = c;
                double hv = og * std::tanh(c);
                states_.at(b, t, j) = hv;
                c_prev[b * h_ + j] = c;
                h_prev[b * h_ + j] = hv;
            }
        }
    }
    return states_;
}

Tensor Lstm::backward(const Tensor& d_states) {
    const std::size_t B = x_.dim(0), S = x_.dim(1);
    Tensor dx({B, S, in_});
    std::vector<double> dh(B * h_, 0.0), dc(B * h_, 0.0);
    std::vector<double> dz(B * 4 * h_);
    std::vector<double> xt(B * in_), hprev(B * h_);

    for (std::size_t t = S; t-- > 0;) {
        for (std::size_t b = 0; b < B; ++b) {
            const double* g = gates_.data() + (b * S + t) * 4 * h_;
            for (std::size_t j = 0; j < h_; ++j) {
                double dhv = dh[b * h_ + j] + d_states.at(b, t, j);
                double c = cells_.at(b, t, j);
                double tc = std::tanh(c);
                double ig = g[j], fg = g[h_ + j], cg = g[2 * h_ + j], og = g[3 * h_ + j];
                double dcv = dc[b * h_ + j] + dhv * og * (1.0 - tc * tc);
                double c_prev = (t > 0) ? cells_.at(b, t - 1, j) : 0.0;
                double dzi = dcv * cg * ig * (1.0 - ig);
                double dzf = dcv * c_prev * fg * (1.0 - fg);
                double dzg = dcv * ig * (1.0 - cg * cg);
                double dzo = dhv * tc * og * (1.0 - og);
                double* zb = dz.data() + b * 4 * h_;
                zb[j] = dzi;
                zb[h_ + j] = dzf;
                zb[2 * h_ + j] = dzg;
                zb[3 * h_ + j] = dzo;
                dc[b * h_ + j] = dcv * fg;
            }
        }
        for (std::size_t b = 0; b < B; ++b) {
            std::copy(x_.data() + (b * S + t) * in_, x_.data() + (b * S + t) * in_ + in_,
                      xt.begin() + b * in_);
            if (t > 0)
                for (std::size_t j = 0; j < h_; ++j) hprev[b * h_ + j] = states_.at(b, t - 1, j);
            else
                std::fill(hprev.begin() + b * h_, hprev.begin() + (b + 1) * h_, 0.0);
        }
        // parameter grads and upstream grads
        Tensor dxt({B, in_});
        kernels::dense_backward(xt.data(), wx_.value.data(), dz.data(), dxt.data(),
                                wx_.grad.data(), b_.grad.data(), B, in_, 4 * h_);
        std::fill(dh.begin(), dh.end(), 0.0);
        kernels::dense_backward(hprev.data(), wh_.value.data(), dz.data(), dh.data(),
                                wh_.grad.data(), nullptr, B, h_, 4 * h_);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t i = 0; i < in_; ++i) dx.at(b, t, i) = dxt.at(b, i);
    }
    return dx;
}

// ---------------------------------------------------------------- Attention

AdditiveAttention::AdditiveAttention(std::string name, std::size_t hidden, std::size_t attn,
                                     Rng& rng)
    : w_(name + ".w", Tensor({hidden, attn})), v_(name + ".v", Tensor({attn})),
      h_(hidden), a_(attn) {
    glorot_uniform(w_.value, hidden, attn, rng);
    glorot_uniform(v_.value, attn, 1, rng);
}

Tensor AdditiveAttention::forward(const Tensor& states) {
    if (states.shape().size() != 3 || states.dim(2) != h_)
        throw std::invalid_argument("AdditiveAttention: ShapeMismatch");
    const std::size_t B = states.dim(0), S = states.dim(1);
    states_ = states;
    u_ = Tensor({B, S, a_});
    kernels::dense_forward(states.data(), w_.value.data(), nullptr, u_.data(), B * S, h_, a_);
    apply_activation(u_, Activation::Tanh);
    alpha_ = Tensor({B, S});
    Tensor out({B, h_});
    std::vector<double> e(S);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t t = 0; t < S; ++t) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a_; ++k) acc += v_.value[k] * u_.at(b, t, k);
            e[t] = acc;
        }
        auto al = softmax(e);
        for (std::size_t t = 0; t < S; ++t) {
            alpha_.at(b, t) = al[t];
            for (std::size_t j = 0; j < h_; ++j) out.at(b, j) += al[t] * states.at(b, t, j);
        }
    }
    return out;
}

Tensor AdditiveAttention::backward(const Tensor& dy) {
    const std::size_t B = states_.dim(0), S = states_.dim(1);
    Tensor dstates({B, S, h_});
    Tensor du({B, S, a_});
    for (std::size_t b = 0; b < B; ++b) {
        std::vector<double> dalpha(S, 0.0);
        for (std::size_t t = 0; t < S; ++t) {
            double acc = 0.0;
            for (std::size_t j = 0; j < h_; ++j) {
                acc += dy.at(b, j) * states_.at(b, t, j);
                dstates.at(b, t, j) += alpha_.at(b, t) * dy.at(b, j);
            }
            dalpha[t] = acc;
        }
        double dot = 0.0;
        for (std::size_t t = 0; t < S; ++t) dot += alpha_.at(b, t) * dalpha[t];
        for (std::size_t t = 0; t < S; ++t) {
            double de = alpha_.at(b, t) * (dalpha[t] - dot);
            for (std::size_t k = 0; k < a_; ++k) {
                v_.grad[k] += de * u_.at(b, t, k);
                du.at(b, t, k) = de * v_.value[k];
            }
        }
    }
    chain_activation(du, u_, Activation::Tanh);
    Tensor ds2({B * S, h_});
    kernels::dense_backward(states_.data(), w_.value.data(), du.data(), ds2.data(),
                            w_.grad.data(), nullptr, B * S, h_, a_);
    for (std::size_t i = 0; i < dstates.size(); ++i) dstates[i] += ds2[i];
    return dstates;
}

// ------------------------------------------------------------------- Conv1D

Conv1D::Conv1D(std::string name, std::size_t in, std::size_t filters, std::size_t ksize,
               Activation act, Rng& rng)
    : ker_(name + ".k", Tensor({ksize, in, filters})), b_(name + ".b", Tensor({filters})),
      in_(in), f_(filters), k_(ksize), act_(act) {
    glorot_uniform(ker_.value, ksize * in, filters, rng);
}

Tensor Conv1D::forward(const Tensor& x) {
    if (x.shape().size() != 3 || x.dim(2) != in_)
        throw std::invalid_argument("Conv1D: ShapeMismatch");
    const std::size_t B = x.dim(0), S = x.dim(1);
    if (k_ > S) throw std::invalid_argument("Conv1D: KernelLargerThanInput");
    x_ = x;
    Tensor y({B, S - k_ + 1, f_});
    kernels::conv1d_forward(x.data(), ker_.value.data(), b_.value.data(), y.data(),
                            B, S, in_, k_, f_);
    apply_activation(y, act_);
    y_ = y;
    return y;
}

Tensor Conv1D::backward(const Tensor& dy_in) {
    Tensor dy = dy_in;
    chain_activation(dy, y_, act_);
    const std::size_t B = x_.dim(0), S = x_.dim(1);
    Tensor dx({B, S, in_});
    kernels::conv1d_backward(x_.data(), ker_.value.data(), dy.data(), dx.data(),
                             ker_.grad.data(), b_.grad.data(), B, S, in_, k_, f_);
    return dx;
}

// ---------------------------------------------------------------- MaxPool1D

Tensor MaxPool1D::forward(const Tensor& x) {
    const std::size_t B = x.dim(0), L = x.dim(1), f = x.dim(2);
    if (L < 2) throw std::invalid_argument("MaxPool1D: InputTooShort");
    const std::size_t Lo = L / 2;
    in_shape_ = x.shape();
    argmax_.assign(B * Lo * f, 0);
    Tensor y({B, Lo, f});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < Lo; ++t)
            for (std::size_t j = 0; j < f; ++j) {
                double a = x.at(b, 2 * t, j);
                double c = x.at(b, 2 * t + 1, j);
                // first index wins ties
                std::size_t src = (c > a) ? 2 * t + 1 : 2 * t;
                y.at(b, t, j) = (c > a) ? c : a;
                argmax_[(b * Lo + t) * f + j] = src;
            }
    return y;
}

Tensor MaxPool1D::backward(const Tensor& dy) {
    Tensor dx(in_shape_);
    const std::size_t B = dy.dim(0), Lo = dy.dim(1), f = dy.dim(2);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < Lo; ++t)
            for (std::size_t j = 0; j < f; ++j)
                dx.at(b, argmax_[(b * Lo + t) * f + j], j) += dy.at(b, t, j);
    return dx;
}

} // namespace ppm
