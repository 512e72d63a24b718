#include "ace/network.hpp"

#include <cmath>

#include "ace/common.hpp"

namespace ace {

std::size_t NetworkParams::paramCount() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.data.size() + l.bias.size();
    return n;
}

bool NetworkParams::allFinite() const {
    for (const auto& l : layers) {
        if (!l.weight.allFinite()) return false;
        for (double b : l.bias)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

NetworkParams makeMlp(const std::vector<std::size_t>& widths, Rng& rng) {
    if (widths.size() < 2)
        throw ShapeError("makeMlp: need at least input and output widths");
    NetworkParams net;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        Layer l;
        l.weight = Matrix(widths[i + 1], widths[i]);
        l.bias.assign(widths[i + 1], 0.0);
        double bound = 1.0 / std::sqrt(static_cast<double>(widths[i]));
        for (double& w : l.weight.data) w = rng.uniform(-bound, bound);
        l.activation = (i + 2 < widths.size()) ? Activation::Relu
                                               : Activation::Linear;
        net.layers.push_back(std::move(l));
    }
    return net;
}

ForwardTrace forward(const NetworkParams& net, std::span<const double> input) {
    if (input.size() != net.inputDim())
        throw ShapeError("forward: input length " +
                         std::to_string(input.size()) + " != expected " +
                         std::to_string(net.inputDim()));
    ForwardTrace t;
    t.input.assign(input.begin(), input.end());
    const std::vector<double>* x = &t.input;
    for (const auto& l : net.layers) {
        std::vector<double> pre(l.weight.rows);
        for (std::size_t r = 0; r < l.weight.rows; ++r) {
            double s = l.bias[r];
            const double* wr = l.weight.data.data() + r * l.weight.cols;
            for (std::size_t c = 0; c < l.weight.cols; ++c)
                s += wr[c] * (*x)[c];
            pre[r] = s;
        }
        std::vector<double> post(pre);
        if (l.activation == Activation::Relu)
            for (double& v : post) v = v > 0.0 ? v : 0.0;
        t.pre.push_back(std::move(pre));
        t.post.push_back(std::move(post));
        x = &t.post.back();
    }
    return t;
}

Gradients zeroGradients(const NetworkParams& net) {
    Gradients g;
    for (const auto& l : net.layers) {
        g.weight.emplace_back(l.weight.rows, l.weight.cols);
        g.bias.emplace_back(l.bias.size(), 0.0);
    }
    g.input.assign(net.inputDim(), 0.0);
    return g;
}

void Gradients::addScaled(const Gradients& other, double s) {
    for (std::size_t l = 0; l < weight.size(); ++l) {
        for (std::size_t i = 0; i < weight[l].data.size(); ++i)
            weight[l].data[i] += s * other.weight[l].data[i];
        for (std::size_t i = 0; i < bias[l].size(); ++i)
            bias[l][i] += s * other.bias[l][i];
    }
    for (std::size_t i = 0; i < input.size(); ++i)
        input[i] += s * other.input[i];
}

void Gradients::scale(double s) {
    for (auto& w : weight)
        for (double& v : w.data) v *= s;
    for (auto& b : bias)
        for (double& v : b) v *= s;
    for (double& v : input) v *= s;
}

void Gradients::zero() {
    for (auto& w : weight)
        for (double& v : w.data) v = 0.0;
    for (auto& b : bias)
        for (double& v : b) v = 0.0;
    for (double& v : input) v = 0.0;
}

void backwardAccumulate(const NetworkParams& net, const ForwardTrace& trace,
                        std::span<const double> outputGrad, Gradients& acc) {
    if (outputGrad.size() != net.outputDim())
        throw ShapeError("backward: output gradient length mismatch");
    if (trace.pre.size() != net.layers.size())
        throw ShapeError("backward: trace does not match network depth");

    std::vector<double> delta(outputGrad.begin(), outputGrad.end());
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const Layer& l = net.layers[li];
        if (delta.size() != l.weight.rows)
            throw ShapeError("backward: trace/layer width mismatch");
        if (l.activation == Activation::Relu)
            for (std::size_t r = 0; r < delta.size(); ++r)
                if (trace.pre[li][r] <= 0.0) delta[r] = 0.0;

        const std::vector<double>& in =
            li == 0 ? trace.input : trace.post[li - 1];
        Matrix& gw = acc.weight[li];
        for (std::size_t r = 0; r < l.weight.rows; ++r) {
            double d = delta[r];
            acc.bias[li][r] += d;
            double* gr = gw.data.data() + r * gw.cols;
            for (std::size_t c = 0; c < gw.cols; ++c) gr[c] += d * in[c];
        }

        std::vector<double> prev(l.weight.cols, 0.0);
        for (std::size_t r = 0; r < l.weight.rows; ++r) {
            double d = delta[r];
            const double* wr = l.weight.data.data() + r * l.weight.cols;
            for (std::size_t c = 0; c < l.weight.cols; ++c)
                prev[c] += d * wr[c];
        }
        if (li == 0)
            for (std::size_t c = 0; c < prev.size(); ++c)
                acc.input[c] += prev[c];
        delta = std::move(prev);
    }
}

Gradients backward(const NetworkParams& net, const ForwardTrace& trace,
                   std::span<const double> outputGrad) {
    Gradients g = zeroGradients(net);
    backwardAccumulate(net, trace, outputGrad, g);
    return g;
}

GradientRecord gradientNorms(const Gradients& grads) {
    GradientRecord rec;
    for (const auto& gw : grads.weight) {
        std::vector<double> norms(gw.rows);
        for (std::size_t r = 0; r < gw.rows; ++r) {
            double s = 0.0;
            const double* gr = gw.data.data() + r * gw.cols;
            for (std::size_t c = 0; c < gw.cols; ++c) s += gr[c] * gr[c];
            norms[r] = std::sqrt(s);
        }
        rec.neuronNorms.push_back(std::move(norms));
    }
    return rec;
}

}  // namespace ace
