#include "ace/adam.hpp"

#include <cmath>

#include "ace/common.hpp"

namespace ace {

OptimizerState makeOptimizer(const NetworkParams& net, double learningRate) {
    OptimizerState s;
    s.m = zeroGradients(net);
    s.v = zeroGradients(net);
    s.learningRate = learningRate;
    return s;
}

void adamStep(OptimizerState& state, NetworkParams& params,
              const Gradients& grads) {
    if (grads.weight.size() != params.layers.size())
        throw ShapeError("adamStep: gradient/param layer count mismatch");
    state.step += 1;
    double t = static_cast<double>(state.step);
    double c1 = 1.0 - std::pow(state.beta1, t);
    double c2 = 1.0 - std::pow(state.beta2, t);

    auto update = [&](double& p, double g, double& m, double& v) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        double mh = m / c1;
        double vh = v / c2;
        p -= state.learningRate * mh / (std::sqrt(vh) + state.epsilon);
    };

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        Layer& layer = params.layers[l];
        for (double g : grads.weight[l].data)
            if (!std::isfinite(g))
                throw NumericError("adamStep: non-finite weight gradient in layer " +
                                   std::to_string(l));
        for (double g : grads.bias[l])
            if (!std::isfinite(g))
                throw NumericError("adamStep: non-finite bias gradient in layer " +
                                   std::to_string(l));
        for (std::size_t i = 0; i < layer.weight.data.size(); ++i)
            update(layer.weight.data[i], grads.weight[l].data[i],
                   state.m.weight[l].data[i], state.v.weight[l].data[i]);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            update(layer.bias[i], grads.bias[l][i], state.m.bias[l][i],
                   state.v.bias[l][i]);
    }
}

void resetOptimizer(OptimizerState& state) {
    state.m.zero();
    state.v.zero();
    state.step = 0;
}

double ScalarAdam::update(double param, double grad) {
    step += 1;
    double t = static_cast<double>(step);
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad * grad;
    double mh = m / (1.0 - std::pow(beta1, t));
    double vh = v / (1.0 - std::pow(beta2, t));
    return param - learningRate * mh / (std::sqrt(vh) + epsilon);
}

}  // namespace ace
