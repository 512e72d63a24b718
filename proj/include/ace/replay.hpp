#pragma once

#include <cstddef>
#include <vector>

#include "ace/rng.hpp"

namespace ace {

// One environment step record.
struct Transition {
    std::vector<double> state;
    std::vector<double> action;  // post-squash, within [-1,1]
    double reward = 0.0;
    std::vector<double> nextState;
    bool terminal = false;
};

// Fixed-capacity ring buffer. Oldest entries are overwritten; iteration
// index 0 is always the oldest surviving entry.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void add(Transition t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }

    // i-th oldest transition, i in [0, size).
    const Transition& at(std::size_t i) const;

    // Uniform sample of n distinct indices (Floyd's algorithm).
    std::vector<std::size_t> sampleIndices(std::size_t n, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // next write position
    std::vector<Transition> data_;
};

}  // namespace ace
