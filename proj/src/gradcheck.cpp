#include <algorithm>
#include <cmath>
#include <random>

#include "ppm/models.hpp"

namespace ppm {

void jitter_parameters(Network& net, double scale, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    for (Parameter* p : net.parameters()) {
        const bool is_embedding = p->name.rfind("embed.", 0) == 0;
        const std::size_t row_len = is_embedding ? p->value.shape()[1] : 0;
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            if (is_embedding && i < row_len) continue; // pinned padding row
            p->value[i] += d(rng);
        }
    }
}

double grad_check(Network& net, const std::vector<const PrefixMatrix*>& batch,
                  const std::vector<int>& targets, double h) {
    net.zero_grad();
    auto probs = net.forward(batch);
    auto [loss, dprob] = bce_loss(probs, targets);
    (void)loss;
    net.backward(dprob);

    auto params = net.parameters();
    std::vector<Tensor> analytic;
    for (Parameter* p : params) analytic.push_back(p->grad);

    double max_err = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter* p = params[k];
        const bool is_embedding = p->name.rfind("embed.", 0) == 0;
        const std::size_t row_len = is_embedding ? p->value.shape()[1] : 0;
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            if (is_embedding && i < row_len) continue; // pinned padding row
            double orig = p->value[i];
            p->value[i] = orig + h;
            auto [lp, g1] = bce_loss(net.forward(batch), targets);
            p->value[i] = orig - h;
            auto [lm, g2] = bce_loss(net.forward(batch), targets);
            p->value[i] = orig;
            double numeric = (lp - lm) / (2.0 * h);
            double a = analytic[k][i];
            double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            max_err = std::max(max_err, err);
        }
    }
    // one clean forward so cached activations match the unperturbed parameters
    net.forward(batch);
    return max_err;
}

} // namespace ppm
