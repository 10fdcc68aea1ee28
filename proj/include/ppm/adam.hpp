#pragma once

#include <vector>

#include "ppm/tensor.hpp"

namespace ppm {

// Bias-corrected Adam over a fixed parameter list.
class Adam {
public:
    explicit Adam(std::vector<Parameter*> params, double lr = 1e-3, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8);

    void step();
    void zero_grad();
    long step_count() const { return t_; }

private:
    std::vector<Parameter*> params_;
    std::vector<Tensor> m_, v_;
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
};

} // namespace ppm
