#pragma once

#include <functional>
#include <optional>

#include "shimura/linalg.hpp"

namespace shimura {

/// Exact enumeration of all nonzero integer vectors x with x^T G x <= bound,
/// G symmetric positive definite. Both x and -x are visited. The callback
/// receives x and the exact value Q(x); returning false aborts the scan.
/// Throws std::invalid_argument if G is not positive definite.
void enumerate_quadratic(const ZMat& gram, const Int& bound,
                         const std::function<bool(const ZVec&, const Int&)>& visit);

/// Number of x (both signs) with Q(x) == value.
Int count_norm_vectors(const ZMat& gram, const Int& value);

/// All x with Q(x) == value.
std::vector<ZVec> norm_vectors(const ZMat& gram, const Int& value);

/// Some x with Q(x) == value, if one exists.
std::optional<ZVec> find_norm_vector(const ZMat& gram, const Int& value);

}  // namespace shimura
