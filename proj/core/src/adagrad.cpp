#include <cmath>

#include "paragram/error.hpp"
#include "paragram/training.hpp"

namespace paragram {

void adagrad_update(std::span<double> theta, std::span<const double> grad, AdaGradState& state,
                    double lr) {
  if (theta.size() != grad.size()) throw DataError("AdaGrad: parameter and gradient sizes differ");
  if (state.accum.empty()) state.accum.assign(theta.size(), 0.0);
  if (state.accum.size() != theta.size()) throw DataError("AdaGrad: accumulator size differs");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    if (g == 0.0) continue;
    state.accum[i] += g * g;
    theta[i] -= lr * g / (std::sqrt(state.accum[i]) + state.eps);
  }
}

}  // namespace paragram
