#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "platoonsim/common/random.hpp"

namespace psim::nk {

// All parameters of a network live in one flat 64-bit vector; the layout
// names each tensor and records its offset. Gradients, Adam moments and
// checkpoints share the layout, and finite-difference loops index the flat
// vector directly.
using ParamVector = std::vector<double>;

struct TensorSpec {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
    int fan_in = 0;  // 0 -> zero-initialized (biases)
};

class ParamLayout {
public:
    // Registration order fixes both offsets and the initialization draw order.
    std::size_t add(const std::string& name, std::vector<int> shape, int fan_in);

    const TensorSpec& spec(std::size_t index) const { return specs_[index]; }
    const TensorSpec& spec(const std::string& name) const;
    std::size_t tensor_count() const { return specs_.size(); }
    std::size_t total_size() const { return total_; }

    double* view(ParamVector& params, std::size_t index) const {
        return params.data() + specs_[index].offset;
    }
    const double* view(const ParamVector& params, std::size_t index) const {
        return params.data() + specs_[index].offset;
    }
    double* view(ParamVector& params, const std::string& name) const {
        return params.data() + spec(name).offset;
    }
    const double* view(const ParamVector& params, const std::string& name) const {
        return params.data() + spec(name).offset;
    }

private:
    std::vector<TensorSpec> specs_;
    std::size_t total_ = 0;
};

// Fan-in-scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)); zero for
// fan_in = 0. Deterministic for a given stream.
ParamVector init_params(const ParamLayout& layout, RandomStream& rng);

}  // namespace psim::nk
