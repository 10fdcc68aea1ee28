#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ppm/adam.hpp"
#include "ppm/layers.hpp"

using namespace ppm;

namespace {

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

Tensor rand_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> d(-scale, scale);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = d(rng);
    return t;
}

// max relative error between analytic parameter gradients and central finite
// differences of loss(x) = sum(coef .* layer.forward(x))
template <typename Forward>
double fd_check_param(Parameter& p, const Tensor& coef, Forward forward, double h = 1e-6) {
    Tensor out = forward();
    double max_err = 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
        double orig = p.value[i];
        p.value[i] = orig + h;
        Tensor yp = forward();
        p.value[i] = orig - h;
        Tensor ym = forward();
        p.value[i] = orig;
        double lp = 0.0, lm = 0.0;
        for (std::size_t j = 0; j < yp.size(); ++j) {
            lp += coef[j] * yp[j];
            lm += coef[j] * ym[j];
        }
        double numeric = (lp - lm) / (2.0 * h);
        max_err = std::max(max_err, rel_err(p.grad[i], numeric));
    }
    return max_err;
}

} // namespace

TEST_CASE("sigmoid and softmax basics") {
    CHECK(sigmoid(0.0) == doctest::Approx(0.5));
    auto s = softmax({0.0, 0.0});
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[1] == doctest::Approx(0.5));
}

TEST_CASE("bce loss values") {
    // p = 0.5 for all -> ln 2
    auto [loss, grad] = bce_loss({0.5, 0.5}, {0, 1});
    CHECK(loss == doctest::Approx(std::log(2.0)));
    // p == y exactly -> ~0 via clamping
    auto [l2, g2] = bce_loss({1.0, 0.0}, {1, 0});
    CHECK(l2 <= -std::log(1.0 - 1e-12) + 1e-15);
    CHECK(l2 >= 0.0);
}

TEST_CASE("bce gradient matches finite differences") {
    Rng rng(5);
    std::uniform_real_distribution<double> d(0.05, 0.95);
    std::vector<double> p(6);
    for (auto& v : p) v = d(rng);
    std::vector<int> y = {0, 1, 1, 0, 1, 0};
    auto [loss, grad] = bce_loss(p, y);
    double h = 1e-7;
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto pp = p;
        pp[i] += h;
        auto pm = p;
        pm[i] -= h;
        double numeric = (bce_loss(pp, y).first - bce_loss(pm, y).first) / (2.0 * h);
        CHECK(rel_err(grad[i], numeric) < 1e-8);
    }
}

TEST_CASE("embedding: padding row is zero, lookups and gradients") {
    Rng rng(1);
    Embedding emb("embed.t", 5, 2, rng);
    emb.param().value.at(3, 0) = 0.5;
    emb.param().value.at(3, 1) = -0.5;

    Tensor y = emb.forward({0, 3, 3, 1}, 2, 2);
    CHECK(y.at(0, 0, 0) == 0.0); // index 0 -> zero vector
    CHECK(y.at(0, 0, 1) == 0.0);
    CHECK(y.at(0, 1, 0) == 0.5);
    CHECK(y.at(0, 1, 1) == -0.5);

    // row 3 appears twice; gradient of sum-of-outputs doubles up
    Tensor dy({2, 2, 2});
    dy.fill(1.0);
    emb.backward(dy);
    CHECK(emb.param().grad.at(3, 0) == 2.0);
    CHECK(emb.param().grad.at(3, 1) == 2.0);
    CHECK(emb.param().grad.at(0, 0) == 0.0); // padding row untouched

    CHECK_THROWS(emb.forward({5}, 1, 1)); // IndexOutOfVocabulary
}

TEST_CASE("dense layer: zero weights with sigmoid gives sigmoid(bias)") {
    Rng rng(2);
    Dense dense("d", 3, 1, Activation::Sigmoid, rng);
    dense.weight().value.fill(0.0);
    dense.bias().value[0] = 0.7;
    Tensor x = rand_tensor({4, 3}, rng);
    Tensor y = dense.forward(x);
    for (std::size_t b = 0; b < 4; ++b) CHECK(y.at(b, 0) == doctest::Approx(sigmoid(0.7)));
}

TEST_CASE("dense gradient check") {
    Rng rng(3);
    Dense dense("d", 4, 3, Activation::Tanh, rng);
    Tensor x = rand_tensor({2, 4}, rng);
    Tensor coef = rand_tensor({2, 3}, rng);

    dense.weight().zero_grad();
    dense.bias().zero_grad();
    dense.forward(x);
    Tensor dy = coef;
    dense.backward(dy);

    auto fwd = [&] { return dense.forward(x); };
    CHECK(fd_check_param(dense.weight(), coef, fwd) < 1e-6);
    CHECK(fd_check_param(dense.bias(), coef, fwd) < 1e-6);
}

TEST_CASE("lstm: zero weights and inputs give zero states") {
    Rng rng(4);
    Lstm lstm("l", 2, 3, rng);
    lstm.input_kernel().value.fill(0.0);
    lstm.recurrent_kernel().value.fill(0.0);
    lstm.gate_bias().value.fill(0.0);
    Tensor x({1, 4, 2});
    Tensor s = lstm.forward(x);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == 0.0);
}

TEST_CASE("lstm: seq 1 all_states equals last state trivially") {
    Rng rng(5);
    Lstm lstm("l", 2, 3, rng);
    Tensor x = rand_tensor({2, 1, 2}, rng);
    Tensor s = lstm.forward(x);
    CHECK(s.dim(1) == 1);
}

TEST_CASE("lstm gradient check (batch 2, seq 3, in 2, h 3)") {
    // frozen instance chosen so every gradient element sits well above the
    // central-difference rounding noise floor at step 1e-6
    Rng rng(13);
    Lstm lstm("l", 2, 3, rng);
    Tensor x = rand_tensor({2, 3, 2}, rng);
    Tensor coef = rand_tensor({2, 3, 3}, rng);

    lstm.input_kernel().zero_grad();
    lstm.recurrent_kernel().zero_grad();
    lstm.gate_bias().zero_grad();
    lstm.forward(x);
    Tensor dx = lstm.backward(coef);

    auto fwd = [&] { return lstm.forward(x); };
    CHECK(fd_check_param(lstm.input_kernel(), coef, fwd) < 1e-6);
    CHECK(fd_check_param(lstm.recurrent_kernel(), coef, fwd) < 1e-6);
    CHECK(fd_check_param(lstm.gate_bias(), coef, fwd) < 1e-6);

    // input gradient via finite differences
    double h = 1e-6;
    double max_err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double orig = x[i];
        x[i] = orig + h;
        Tensor yp = lstm.forward(x);
        x[i] = orig - h;
        Tensor ym = lstm.forward(x);
        x[i] = orig;
        double lp = 0.0, lm = 0.0;
        for (std::size_t j = 0; j < yp.size(); ++j) {
            lp += coef[j] * yp[j];
            lm += coef[j] * ym[j];
        }
        max_err = std::max(max_err, rel_err(dx[i], (lp - lm) / (2.0 * h)));
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("attention: single state passes through, identical states average") {
    Rng rng(7);
    AdditiveAttention attn("a", 3, 2, rng);
    Tensor s1 = rand_tensor({2, 1, 3}, rng);
    Tensor o1 = attn.forward(s1);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t j = 0; j < 3; ++j) CHECK(o1.at(b, j) == doctest::Approx(s1.at(b, 0, j)));

    Tensor s2({1, 2, 3});
    for (std::size_t j = 0; j < 3; ++j) {
        s2.at(0, 0, j) = 0.3 * static_cast<double>(j + 1);
        s2.at(0, 1, j) = 0.3 * static_cast<double>(j + 1);
    }
    Tensor o2 = attn.forward(s2);
    CHECK(attn.weights().at(0, 0) == doctest::Approx(0.5));
    CHECK(attn.weights().at(0, 1) == doctest::Approx(0.5));
    for (std::size_t j = 0; j < 3; ++j) CHECK(o2.at(0, j) == doctest::Approx(s2.at(0, 0, j)));
}

TEST_CASE("attention weights sum to one") {
    Rng rng(19);
    AdditiveAttention attn("a", 4, 3, rng);
    for (int iter = 0; iter < 10; ++iter) {
        Tensor s = rand_tensor({3, 5, 4}, rng, 2.0);
        attn.forward(s);
        for (std::size_t b = 0; b < 3; ++b) {
            double sum = 0.0;
            for (std::size_t t = 0; t < 5; ++t) {
                double a = attn.weights().at(b, t);
                CHECK(a >= 0.0);
                sum += a;
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("attention gradient check") {
    Rng rng(8);
    AdditiveAttention attn("a", 3, 2, rng);
    Tensor s = rand_tensor({2, 4, 3}, rng);
    Tensor coef = rand_tensor({2, 3}, rng);

    attn.score_kernel().zero_grad();
    attn.score_query().zero_grad();
    attn.forward(s);
    Tensor ds = attn.backward(coef);

    auto fwd = [&] { return attn.forward(s); };
    CHECK(fd_check_param(attn.score_kernel(), coef, fwd) < 1e-6);
    CHECK(fd_check_param(attn.score_query(), coef, fwd) < 1e-6);

    double h = 1e-6, max_err = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double orig = s[i];
        s[i] = orig + h;
        Tensor yp = attn.forward(s);
        s[i] = orig - h;
        Tensor ym = attn.forward(s);
        s[i] = orig;
        double lp = 0.0, lm = 0.0;
        for (std::size_t j = 0; j < yp.size(); ++j) {
            lp += coef[j] * yp[j];
            lm += coef[j] * ym[j];
        }
        max_err = std::max(max_err, rel_err(ds[i], (lp - lm) / (2.0 * h)));
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("conv1d: full-cover kernel gives length-1 output; gradient check") {
    Rng rng(9);
    Conv1D conv("c", 2, 3, 4, Activation::None, rng);
    Tensor x = rand_tensor({2, 4, 2}, rng);
    Tensor y = conv.forward(x);
    CHECK(y.dim(1) == 1);

    Tensor coef = rand_tensor(y.shape(), rng);
    conv.kernel().zero_grad();
    conv.bias().zero_grad();
    conv.forward(x);
    conv.backward(coef);
    auto fwd = [&] { return conv.forward(x); };
    CHECK(fd_check_param(conv.kernel(), coef, fwd) < 1e-6);
    CHECK(fd_check_param(conv.bias(), coef, fwd) < 1e-6);

    CHECK_THROWS(conv.forward(rand_tensor({1, 3, 2}, rng))); // KernelLargerThanInput
}

TEST_CASE("maxpool: values, tie rule, gradient routing") {
    MaxPool1D pool;
    Tensor x({1, 4, 1});
    x.at(0, 0, 0) = 1;
    x.at(0, 1, 0) = 3;
    x.at(0, 2, 0) = 2;
    x.at(0, 3, 0) = 2;
    Tensor y = pool.forward(x);
    CHECK(y.at(0, 0, 0) == 3);
    CHECK(y.at(0, 1, 0) == 2);

    Tensor dy({1, 2, 1});
    dy.fill(1.0);
    Tensor dx = pool.backward(dy);
    CHECK(dx.at(0, 0, 0) == 0.0);
    CHECK(dx.at(0, 1, 0) == 1.0);
    CHECK(dx.at(0, 2, 0) == 1.0); // tie -> first element of the window
    CHECK(dx.at(0, 3, 0) == 0.0);

    Tensor xs({1, 1, 1});
    CHECK_THROWS(pool.forward(xs)); // InputTooShort
}

TEST_CASE("maxpool drops the trailing odd element") {
    MaxPool1D pool;
    Tensor x({1, 5, 1});
    for (std::size_t t = 0; t < 5; ++t) x.at(0, t, 0) = static_cast<double>(t);
    Tensor y = pool.forward(x);
    CHECK(y.dim(1) == 2);
    CHECK(y.at(0, 1, 0) == 3.0);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    Parameter p("p", Tensor({3}));
    p.value[0] = 1.0;
    p.value[1] = -2.0;
    p.value[2] = 0.5;
    Adam opt({&p});
    for (int i = 0; i < 10; ++i) {
        p.zero_grad();
        opt.step();
    }
    CHECK(p.value[0] == 1.0);
    CHECK(p.value[1] == -2.0);
    CHECK(p.value[2] == 0.5);
}

TEST_CASE("adam: first step magnitude is ~lr in the gradient direction") {
    Parameter p("p", Tensor({2}));
    p.value[0] = 1.0;
    p.value[1] = 1.0;
    Adam opt({&p}, 1e-3);
    p.grad[0] = 0.37;
    p.grad[1] = -2.5;
    opt.step();
    CHECK(p.value[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
    CHECK(p.value[1] == doctest::Approx(1.0 + 1e-3).epsilon(1e-6));
}

TEST_CASE("adam: converges on (w-3)^2 within 200 steps") {
    Parameter w("w", Tensor({1}));
    Adam opt({&w}, 1e-1); // scalar problem; default 1e-3 barely moves in 200 steps
    for (int i = 0; i < 200; ++i) {
        w.zero_grad();
        w.grad[0] = 2.0 * (w.value[0] - 3.0);
        opt.step();
    }
    CHECK(std::abs(w.value[0] - 3.0) < 0.5);
}

TEST_CASE("layer forward is deterministic") {
    Rng rng(10);
    Lstm lstm("l", 2, 3, rng);
    Tensor x = rand_tensor({2, 3, 2}, rng);
    Tensor a = lstm.forward(x);
    Tensor b = lstm.forward(x);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
