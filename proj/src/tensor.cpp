#include "ppm/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ppm {

static std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d < 1) throw std::invalid_argument("Tensor: shape dims must be >= 1");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != product(shape_))
        throw std::invalid_argument("Tensor: data size does not match shape");
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

} // namespace ppm
