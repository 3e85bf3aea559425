#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace psim::nk {

// Dense row-major tensor of 64-bit floats. Networks here are tiny and
// fixed-architecture; this is a storage type, not an expression library.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(element_count(shape), 0.0);
    }

    static std::size_t element_count(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) n *= static_cast<std::size_t>(d);
        return n;
    }

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
};

}  // namespace psim::nk
