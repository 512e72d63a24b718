#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ace/matrix.hpp"
#include "ace/rng.hpp"

namespace ace {

enum class Activation { Relu, Linear };

struct Layer {
    Matrix weight;              // [out x in]
    std::vector<double> bias;   // [out]
    Activation activation = Activation::Linear;
};

// Layered dense network parameters. Adjacent layer widths must chain.
struct NetworkParams {
    std::vector<Layer> layers;

    std::size_t inputDim() const { return layers.front().weight.cols; }
    std::size_t outputDim() const { return layers.back().weight.rows; }
    std::size_t paramCount() const;
    bool allFinite() const;
};

// Fan-in scaled uniform initialization; hidden layers get the rectifier.
NetworkParams makeMlp(const std::vector<std::size_t>& widths, Rng& rng);

// All intermediate values of one forward pass.
struct ForwardTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // per layer, before activation
    std::vector<std::vector<double>> post;  // per layer, after activation
    const std::vector<double>& output() const { return post.back(); }
};

ForwardTrace forward(const NetworkParams& net, std::span<const double> input);

// Parameter gradients, shaped exactly like the owning network.
struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
    std::vector<double> input;  // gradient w.r.t. the network input

    void addScaled(const Gradients& other, double s);
    void scale(double s);
    void zero();
};

Gradients zeroGradients(const NetworkParams& net);

// Per-layer, per-neuron L2 norms of the incoming-weight gradient rows.
// Bias gradients are excluded on purpose.
struct GradientRecord {
    std::vector<std::vector<double>> neuronNorms;
};

// Exact reverse-mode pass for a single sample. `outputGrad` is
// dLoss/dOutput. Accumulates into `acc` when given, otherwise returns
// fresh gradients.
Gradients backward(const NetworkParams& net, const ForwardTrace& trace,
                   std::span<const double> outputGrad);
void backwardAccumulate(const NetworkParams& net, const ForwardTrace& trace,
                        std::span<const double> outputGrad, Gradients& acc);

GradientRecord gradientNorms(const Gradients& grads);

}  // namespace ace
