#include "ace/replay.hpp"

#include <algorithm>

#include "ace/common.hpp"

namespace ace {

void ReplayBuffer::add(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[head_] = std::move(t);
    }
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= data_.size())
        throw ShapeError("ReplayBuffer::at: index out of range");
    if (data_.size() < capacity_) return data_[i];
    return data_[(head_ + i) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sampleIndices(std::size_t n,
                                                     Rng& rng) const {
    if (n > data_.size())
        throw InsufficientDataError("ReplayBuffer: batch larger than buffer");
    // Floyd's sampling: n distinct indices, O(n) expected draws.
    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    for (std::size_t j = data_.size() - n; j < data_.size(); ++j) {
        std::size_t t = rng.index(j + 1);
        if (std::find(chosen.begin(), chosen.end(), t) != chosen.end())
            chosen.push_back(j);
        else
            chosen.push_back(t);
    }
    return chosen;
}

}  // namespace ace
