#include "platoonsim/nk/params.hpp"

#include <cmath>

#include "platoonsim/common/errors.hpp"
#include "platoonsim/nk/tensor.hpp"

namespace psim::nk {

std::size_t ParamLayout::add(const std::string& name, std::vector<int> shape,
                             int fan_in) {
    TensorSpec spec;
    spec.name = name;
    spec.size = Tensor::element_count(shape);
    spec.shape = std::move(shape);
    spec.offset = total_;
    spec.fan_in = fan_in;
    total_ += spec.size;
    specs_.push_back(std::move(spec));
    return specs_.size() - 1;
}

const TensorSpec& ParamLayout::spec(const std::string& name) const {
    for (const auto& s : specs_) {
        if (s.name == name) return s;
    }
    throw ContractViolation("ParamLayout: unknown tensor " + name);
}

ParamVector init_params(const ParamLayout& layout, RandomStream& rng) {
    ParamVector params(layout.total_size(), 0.0);
    for (std::size_t i = 0; i < layout.tensor_count(); ++i) {
        const TensorSpec& s = layout.spec(i);
        if (s.fan_in <= 0) continue;
        const double bound = 1.0 / std::sqrt(static_cast<double>(s.fan_in));
        for (std::size_t k = 0; k < s.size; ++k) {
            params[s.offset + k] = rng.next_double(-bound, bound);
        }
    }
    return params;
}

}  // namespace psim::nk
