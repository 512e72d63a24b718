#include "ace/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace ace {

std::vector<double> Env::sanitize(std::span<const double> action,
                                  std::size_t expected) {
    if (action.size() != expected)
        throw ShapeError("Env::step: action dimension mismatch");
    std::vector<double> a(action.begin(), action.end());
    for (double& v : a) {
        if (!std::isfinite(v))
            throw NumericError("Env::step: non-finite action component");
        if (v < -1.0 || v > 1.0) {
            v = std::clamp(v, -1.0, 1.0);
            ++clipCount_;
        }
    }
    return a;
}

std::string trajectoryLineJson(std::span<const double> state,
                               std::span<const double> action, double reward,
                               int stageLabel) {
    nlohmann::json j;
    j["state"] = std::vector<double>(state.begin(), state.end());
    j["action"] = std::vector<double>(action.begin(), action.end());
    j["reward"] = reward;
    j["stage"] = stageLabel;
    return j.dump();
}

namespace {

// ---------------------------------------------------------------------
// ChainReach-KD: K action dims, one active per stage. In stage k the
// dense reward is linear in a_k and every other dimension is inert,
// which makes the ground-truth causal weights exact by construction.
class ChainReachEnv final : public Env {
public:
    ChainReachEnv(std::size_t k, RewardMode mode) {
        spec_.name = "chainreach-" + std::to_string(k) + "d";
        spec_.actionDim = k;
        spec_.stateDim = k + 1;
        spec_.horizon = 200;
        spec_.rewardMode = mode;
        spec_.rewardMax = 1.0;
    }

    const EnvSpec& spec() const override { return spec_; }

    std::vector<double> reset(std::uint64_t seed) override {
        rng_.reseed(seed);
        progress_.assign(spec_.actionDim, 0.0);
        for (double& p : progress_) p = rng_.uniform(-0.05, 0.05);
        stage_ = 0;
        t_ = 0;
        return observe();
    }

    StepResult step(std::span<const double> action) override {
        auto a = sanitize(action, spec_.actionDim);
        StepResult res;
        res.stageLabel = stage_;
        double reward = 0.0;
        bool success = false;
        if (stage_ < static_cast<int>(spec_.actionDim)) {
            std::size_t k = static_cast<std::size_t>(stage_);
            double delta = kStep * a[k];
            progress_[k] += delta;
            reward = 2.0 * delta;
            if (progress_[k] >= kTarget) {
                reward += 0.5;
                ++stage_;
                if (stage_ == static_cast<int>(spec_.actionDim)) success = true;
            }
        }
        ++t_;
        res.success = success;
        res.terminal = success || t_ >= spec_.horizon;
        res.reward = spec_.rewardMode == RewardMode::Dense
                         ? reward
                         : (success ? 1.0 : 0.0);
        res.nextState = observe();
        return res;
    }

    std::vector<int> groundTruthActiveDims() const override {
        std::vector<int> v(spec_.actionDim, 0);
        if (stage_ < static_cast<int>(spec_.actionDim))
            v[static_cast<std::size_t>(stage_)] = 1;
        return v;
    }

    int stage() const override { return stage_; }

private:
    static constexpr double kStep = 0.1;
    static constexpr double kTarget = 0.5;

    std::vector<double> observe() const {
        std::vector<double> s = progress_;
        s.push_back(static_cast<double>(stage_) /
                    static_cast<double>(spec_.actionDim));
        return s;
    }

    EnvSpec spec_;
    Rng rng_;
    std::vector<double> progress_;
    int stage_ = 0;
    std::size_t t_ = 0;
};

// ---------------------------------------------------------------------
// PointGrasp-4D: a planar-arm point with (x, y, z, grip) primitives and
// three stages: descend+grip, transport, place.
class PointGraspEnv final : public Env {
public:
    explicit PointGraspEnv(RewardMode mode) {
        spec_.name = "pointgrasp-4d";
        spec_.actionDim = 4;
        spec_.stateDim = 7;  // ex, ey, ez, grip, held, ox, oy
        spec_.horizon = 200;
        spec_.rewardMode = mode;
        spec_.rewardMax = 5.0;
    }

    const EnvSpec& spec() const override { return spec_; }

    std::vector<double> reset(std::uint64_t seed) override {
        rng_.reseed(seed);
        ex_ = rng_.uniform(-0.2, 0.2);
        ey_ = rng_.uniform(-0.2, 0.2);
        ez_ = 0.5;
        grip_ = 0.0;
        held_ = false;
        ox_ = -0.22 + rng_.uniform(-0.05, 0.05);
        oy_ = -0.22 + rng_.uniform(-0.05, 0.05);
        t_ = 0;
        return observe();
    }

    StepResult step(std::span<const double> action) override {
        auto a = sanitize(action, 4);
        StepResult res;
        res.stageLabel = stage();

        // Lateral drive only engages in the mid torque band: slamming the
        // arm down pins it against the table, pulling it up hard lifts the
        // drive wheels off. Either way x/y motion is void for the step.
        bool pinned = std::abs(a[2]) > 0.5;
        if (!pinned) {
            ex_ = std::clamp(ex_ + kMove * a[0], -1.0, 1.0);
            ey_ = std::clamp(ey_ + kMove * a[1], -1.0, 1.0);
        }
        ez_ = std::clamp(ez_ + kMove * a[2] - kGravity, 0.0, 1.0);
        grip_ = std::clamp(grip_ + kGripRate * a[3], 0.0, 1.0);

        // Self-latching gripper: it latches onto the object on proximity
        // and lets go only on a hard open command.
        if (!held_) {
            if (nearObject() && ez_ < kNear) held_ = true;
        } else if (a[3] < -0.95) {
            held_ = false;  // released
        } else {
            ox_ = ex_;
            oy_ = ey_;
        }

        bool success = held_ && distToTarget() < kPlace && ez_ < kNear;
        double dense = denseReward(success);

        ++t_;
        res.success = success;
        res.terminal = success || t_ >= spec_.horizon;
        res.reward = spec_.rewardMode == RewardMode::Dense
                         ? dense
                         : (success ? 1.0 : 0.0);
        res.nextState = observe();
        return res;
    }

    std::vector<int> groundTruthActiveDims() const override {
        switch (stage()) {
            case 0: return {1, 1, 1, 0};  // approach + descend; latch is automatic
            case 1: return {1, 1, 0, 1};  // transport: x,y active, hold the latch
            default: return {0, 0, 1, 1};  // place: descend, keep grip
        }
    }

    int stage() const override {
        if (!held_) return 0;
        return distToTarget() < kPlace ? 2 : 1;
    }

private:
    static constexpr double kMove = 0.08;
    static constexpr double kGravity = 0.01;
    static constexpr double kGripRate = 0.1;
    static constexpr double kNear = 0.25;
    static constexpr double kPlace = 0.35;
    static constexpr double kTx = 0.22, kTy = 0.22;

    bool nearObject() const {
        double dx = ex_ - ox_, dy = ey_ - oy_;
        return std::sqrt(dx * dx + dy * dy) < kNear;
    }
    double distToObject3d() const {
        double dx = ex_ - ox_, dy = ey_ - oy_, dz = ez_;
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    double distToTarget() const {
        double dx = ex_ - kTx, dy = ey_ - kTy;
        return std::sqrt(dx * dx + dy * dy);
    }

    double denseReward(bool success) const {
        double r;
        if (!held_) {
            r = -0.5 * distToObject3d();
        } else if (distToTarget() >= kPlace) {
            r = 1.0 - 0.5 * distToTarget();
        } else {
            r = 2.0 - 0.5 * ez_;
        }
        if (success) r += 3.0;
        return std::clamp(r, -spec_.rewardMax, spec_.rewardMax);
    }

    std::vector<double> observe() const {
        return {ex_, ey_, ez_, grip_, held_ ? 1.0 : 0.0, ox_, oy_};
    }

    EnvSpec spec_;
    Rng rng_;
    double ex_ = 0, ey_ = 0, ez_ = 0, grip_ = 0, ox_ = 0, oy_ = 0;
    bool held_ = false;
    std::size_t t_ = 0;
};

// ---------------------------------------------------------------------
// Pendulum-2D: torque plus a controllable damping dimension; swing-up
// then stabilize.
class PendulumEnv final : public Env {
public:
    explicit PendulumEnv(RewardMode mode) {
        spec_.name = "pendulum-2d";
        spec_.actionDim = 2;
        spec_.stateDim = 3;  // cos, sin, omega
        spec_.horizon = 200;
        spec_.rewardMode = mode;
        spec_.rewardMax = 1.0;
    }

    const EnvSpec& spec() const override { return spec_; }

    std::vector<double> reset(std::uint64_t seed) override {
        rng_.reseed(seed);
        theta_ = std::numbers::pi + rng_.uniform(-0.1, 0.1);
        theta_ = wrap(theta_);
        omega_ = rng_.uniform(-0.05, 0.05);
        t_ = 0;
        uprightStreak_ = 0;
        return observe();
    }

    StepResult step(std::span<const double> action) override {
        auto a = sanitize(action, 2);
        StepResult res;
        res.stageLabel = stage();

        double damping = 0.05 + 0.45 * (a[1] + 1.0) * 0.5;
        double accel = kGravity * std::sin(theta_) + kTorqueGain * a[0] -
                       damping * omega_;
        omega_ = std::clamp(omega_ + kDt * accel, -8.0, 8.0);
        theta_ = wrap(theta_ + kDt * omega_);

        bool upright = std::abs(theta_) < 0.2 && std::abs(omega_) < 0.5;
        uprightStreak_ = upright ? uprightStreak_ + 1 : 0;
        bool success = uprightStreak_ >= 20;

        double cost = (theta_ * theta_ + 0.1 * omega_ * omega_ +
                       0.001 * a[0] * a[0]) /
                      (std::numbers::pi * std::numbers::pi + 6.4 + 0.001);
        double dense = -cost;

        ++t_;
        res.success = success;
        res.terminal = success || t_ >= spec_.horizon;
        res.reward = spec_.rewardMode == RewardMode::Dense
                         ? dense
                         : (success ? 1.0 : 0.0);
        res.nextState = observe();
        return res;
    }

    std::vector<int> groundTruthActiveDims() const override {
        // Swing-up pumps energy with both dims; near upright the torque
        // dimension dominates.
        return stage() == 0 ? std::vector<int>{1, 1} : std::vector<int>{1, 0};
    }

    int stage() const override { return std::abs(theta_) > 0.3 ? 0 : 1; }

private:
    static constexpr double kDt = 0.05;
    static constexpr double kGravity = 9.8;
    static constexpr double kTorqueGain = 3.0;

    static double wrap(double t) {
        while (t > std::numbers::pi) t -= 2.0 * std::numbers::pi;
        while (t < -std::numbers::pi) t += 2.0 * std::numbers::pi;
        return t;
    }

    std::vector<double> observe() const {
        return {std::cos(theta_), std::sin(theta_), omega_};
    }

    EnvSpec spec_;
    Rng rng_;
    double theta_ = 0, omega_ = 0;
    int uprightStreak_ = 0;
    std::size_t t_ = 0;
};

}  // namespace

std::unique_ptr<Env> makeEnv(const std::string& name, RewardMode mode) {
    if (name == "pointgrasp" || name == "pointgrasp-4d")
        return std::make_unique<PointGraspEnv>(mode);
    if (name == "pendulum" || name == "pendulum-2d")
        return std::make_unique<PendulumEnv>(mode);
    if (name.starts_with("chainreach")) {
        std::size_t k = 4;
        auto dash = name.find('-');
        if (dash != std::string::npos) {
            std::string suffix = name.substr(dash + 1);
            if (!suffix.empty() && (suffix.back() == 'd' || suffix.back() == 'D'))
                suffix.pop_back();
            if (!suffix.empty()) k = std::stoul(suffix);
        }
        if (k < 2) throw ShapeError("chainreach: need at least 2 action dims");
        return std::make_unique<ChainReachEnv>(k, mode);
    }
    throw std::invalid_argument("makeEnv: unknown environment '" + name + "'");
}

}  // namespace ace
