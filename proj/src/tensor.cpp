#include "amgae/tensor.hpp"

#include <cmath>

namespace amgae {

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace amgae
