#pragma once

#include <functional>
#include <vector>

namespace softguide::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b], split at the given interior breakpoints.
// Breakpoints outside (a, b) are ignored.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const std::vector<double>& breaks = {}, double rel_tol = 1e-13);

}  // namespace softguide::quad
