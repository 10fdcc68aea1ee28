#include "ppm/adam.hpp"

#include <cmath>

namespace ppm {

Adam::Adam(std::vector<Parameter*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
    for (Parameter* p : params_) {
        m_.emplace_back(Tensor::zeros(p->value.shape()));
        v_.emplace_back(Tensor::zeros(p->value.shape()));
    }
}

void Adam::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            double g = p.grad[i];
            m_[k][i] = b1_ * m_[k][i] + (1.0 - b1_) * g;
            v_[k][i] = b2_ * v_[k][i] + (1.0 - b2_) * g * g;
            double mhat = m_[k][i] / c1;
            double vhat = v_[k][i] / c2;
            p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

} // namespace ppm
