#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ace/common.hpp"
#include "ace/rng.hpp"

namespace ace {

enum class RewardMode { Dense, Sparse };

struct EnvSpec {
    std::string name;
    std::size_t stateDim = 0;
    std::size_t actionDim = 0;
    std::size_t horizon = 200;
    RewardMode rewardMode = RewardMode::Dense;
    double rewardMax = 1.0;  // |reward| never exceeds this
};

struct StepResult {
    std::vector<double> nextState;
    double reward = 0.0;
    bool terminal = false;
    bool success = false;
    int stageLabel = 0;  // diagnostics only, hidden from the agent
};

// Deterministic, seeded toy environment. Actions live in [-1,1]^dim and
// are clipped (counted) when outside.
class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual std::vector<double> reset(std::uint64_t seed) = 0;
    virtual StepResult step(std::span<const double> action) = 0;
    // Which action dims causally affect reward in the current stage.
    virtual std::vector<int> groundTruthActiveDims() const = 0;
    virtual int stage() const = 0;

    std::uint64_t clipCount() const { return clipCount_; }

protected:
    // Clips into [-1,1], throws NumericError on non-finite input.
    std::vector<double> sanitize(std::span<const double> action,
                                 std::size_t expected);
    std::uint64_t clipCount_ = 0;
};

// names: "pointgrasp", "pendulum", "chainreach" (optionally "chainreach-K")
std::unique_ptr<Env> makeEnv(const std::string& name, RewardMode mode);

// One step per line: {"state":[...],"action":[...],"reward":..,"stage":..}
std::string trajectoryLineJson(std::span<const double> state,
                               std::span<const double> action, double reward,
                               int stageLabel);

}  // namespace ace
