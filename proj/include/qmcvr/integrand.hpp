#pragma once

#include <functional>
#include <span>

namespace qmcvr {

/// A real function of a standard Gaussian vector. Implementations must be
/// safe to call concurrently.
using Integrand = std::function<double(std::span<const double>)>;

/// Writes the gradient of some function at z into the second argument.
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

} // namespace qmcvr
