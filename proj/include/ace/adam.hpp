#pragma once

#include <cstdint>

#include "ace/network.hpp"

namespace ace {

// Adaptive-moment optimizer state for one network.
struct OptimizerState {
    Gradients m;  // first moment
    Gradients v;  // second moment
    std::uint64_t step = 0;
    double learningRate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

OptimizerState makeOptimizer(const NetworkParams& net, double learningRate);

// One optimizer step, in place. Throws NumericError naming the layer on
// a non-finite gradient.
void adamStep(OptimizerState& state, NetworkParams& params,
              const Gradients& grads);

// Clears the moments and the step counter, keeping hyperparameters.
void resetOptimizer(OptimizerState& state);

// Scalar variant, used for the temperature parameter.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    std::uint64_t step = 0;
    double learningRate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    double update(double param, double grad);
};

}  // namespace ace
