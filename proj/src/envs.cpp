#include "qil/envs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qil/errors.hpp"
#include "qil/rng.hpp"

namespace qil::envs {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::vector<double> Env::reset(std::uint64_t seed) {
    rng_ = make_rng(seed, 0x7265736574ULL);  // distinct stream per reset seed
    t_ = 0;
    done_ = false;
    obs_ = do_reset(rng_);
    return obs_;
}

Transition Env::step(double action) {
    if (done_) throw std::logic_error("Env::step: episode is finished (call reset)");
    const EnvSpec& sp = spec();
    if (sp.discrete) {
        const double rounded = std::nearbyint(action);
        if (std::abs(action - rounded) > 1e-9 || rounded < 0 || rounded >= sp.n_actions)
            throw std::invalid_argument("Env::step: bad discrete action " + std::to_string(action) +
                                        " for " + sp.id);
        action = rounded;
    } else {
        action = std::clamp(action, sp.action_low, sp.action_high);
    }
    StepOut out = do_step(action);
    Transition tr;
    tr.state = obs_;
    tr.action = action;
    tr.next_state = out.obs;
    tr.true_reward = out.reward;
    tr.t = t_;
    ++t_;
    ++total_steps_;
    done_ = out.terminated || t_ >= sp.max_steps;
    tr.done = done_;
    obs_ = std::move(out.obs);
    return tr;
}

namespace {

// ---------------------------------------------------------------- CartPole

class CartPoleEnv final : public Env {
public:
    const EnvSpec& spec() const override {
        static const EnvSpec sp{
            "CartPole-v1", 4, true, 2, 0, 0, 500,
            {{-4.8, 4.8}, {-kInf, kInf}, {-0.418, 0.418}, {-kInf, kInf}}};
        return sp;
    }

protected:
    std::vector<double> do_reset(std::mt19937_64& rng) override {
        for (double& v : s_) v = uniform(rng, -0.05, 0.05);
        return {s_.begin(), s_.end()};
    }

    StepOut do_step(double action) override {
        static constexpr double gravity = 9.8;
        static constexpr double masscart = 1.0;
        static constexpr double masspole = 0.1;
        static constexpr double total_mass = masscart + masspole;
        static constexpr double length = 0.5;  // half the pole length
        static constexpr double polemass_length = masspole * length;
        static constexpr double force_mag = 10.0;
        static constexpr double tau = 0.02;
        static constexpr double theta_threshold = 12.0 * 2.0 * kPi / 360.0;
        static constexpr double x_threshold = 2.4;

        double x = s_[0], x_dot = s_[1], theta = s_[2], theta_dot = s_[3];
        const double force = (action == 1.0) ? force_mag : -force_mag;
        const double costheta = std::cos(theta);
        const double sintheta = std::sin(theta);
        const double temp =
            (force + polemass_length * theta_dot * theta_dot * sintheta) / total_mass;
        const double thetaacc =
            (gravity * sintheta - costheta * temp) /
            (length * (4.0 / 3.0 - masspole * costheta * costheta / total_mass));
        const double xacc = temp - polemass_length * thetaacc * costheta / total_mass;

        // Explicit Euler, accelerations from the pre-update state.
        x += tau * x_dot;
        x_dot += tau * xacc;
        theta += tau * theta_dot;
        theta_dot += tau * thetaacc;
        s_ = {x, x_dot, theta, theta_dot};

        StepOut out;
        out.obs = {x, x_dot, theta, theta_dot};
        out.reward = 1.0;
        out.terminated = x < -x_threshold || x > x_threshold || theta < -theta_threshold ||
                         theta > theta_threshold;
        return out;
    }

private:
    std::array<double, 4> s_{};
};

// ----------------------------------------------------------------- Acrobot

class AcrobotEnv final : public Env {
public:
    const EnvSpec& spec() const override {
        static const EnvSpec sp{
            "Acrobot-v1", 6, true, 3, 0, 0, 500,
            {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-4 * kPi, 4 * kPi}, {-9 * kPi, 9 * kPi}}};
        return sp;
    }

protected:
    std::vector<double> do_reset(std::mt19937_64& rng) override {
        for (double& v : s_) v = uniform(rng, -0.1, 0.1);
        return observe();
    }

    StepOut do_step(double action) override {
        const double torque = action - 1.0;  // actions {0,1,2} -> {-1,0,+1}

        std::array<double, 5> y{s_[0], s_[1], s_[2], s_[3], torque};
        y = rk4_step(y, dt);

        s_[0] = wrap(y[0]);
        s_[1] = wrap(y[1]);
        s_[2] = std::clamp(y[2], -max_vel_1, max_vel_1);
        s_[3] = std::clamp(y[3], -max_vel_2, max_vel_2);

        StepOut out;
        out.obs = observe();
        out.terminated = -std::cos(s_[0]) - std::cos(s_[1] + s_[0]) > 1.0;
        out.reward = out.terminated ? 0.0 : -1.0;
        return out;
    }

private:
    static constexpr double dt = 0.2;
    static constexpr double link_length_1 = 1.0;
    static constexpr double link_mass_1 = 1.0;
    static constexpr double link_mass_2 = 1.0;
    static constexpr double link_com_1 = 0.5;
    static constexpr double link_com_2 = 0.5;
    static constexpr double link_moi = 1.0;
    static constexpr double max_vel_1 = 4.0 * kPi;
    static constexpr double max_vel_2 = 9.0 * kPi;
    static constexpr double g = 9.8;

    std::array<double, 4> s_{};  // theta1, theta2, dtheta1, dtheta2

    std::vector<double> observe() const {
        return {std::cos(s_[0]), std::sin(s_[0]), std::cos(s_[1]), std::sin(s_[1]), s_[2], s_[3]};
    }

    static double wrap(double x) {
        const double span = 2.0 * kPi;
        while (x > kPi) x -= span;
        while (x < -kPi) x += span;
        return x;
    }

    // Equations of motion in the "book" formulation used by the reference
    // implementation; the last component carries the (constant) torque.
    static std::array<double, 5> dsdt(const std::array<double, 5>& y) {
        const double m1 = link_mass_1, m2 = link_mass_2;
        const double l1 = link_length_1;
        const double lc1 = link_com_1, lc2 = link_com_2;
        const double i1 = link_moi, i2 = link_moi;
        const double theta1 = y[0], theta2 = y[1], dtheta1 = y[2], dtheta2 = y[3], a = y[4];

        const double d1 =
            m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
        const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
        const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - kPi / 2.0);
        const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                            2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                            (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - kPi / 2.0) + phi2;
        const double ddtheta2 =
            (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
            (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
        const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
        return {dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0};
    }

    static std::array<double, 5> rk4_step(const std::array<double, 5>& y0, double h) {
        const auto k1 = dsdt(y0);
        std::array<double, 5> y{};
        for (int i = 0; i < 5; ++i) y[i] = y0[i] + h / 2.0 * k1[i];
        const auto k2 = dsdt(y);
        for (int i = 0; i < 5; ++i) y[i] = y0[i] + h / 2.0 * k2[i];
        const auto k3 = dsdt(y);
        for (int i = 0; i < 5; ++i) y[i] = y0[i] + h * k3[i];
        const auto k4 = dsdt(y);
        std::array<double, 5> out{};
        for (int i = 0; i < 5; ++i)
            out[i] = y0[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        return out;
    }
};

// ------------------------------------------------------------- MountainCar

class MountainCarEnv final : public Env {
public:
    const EnvSpec& spec() const override {
        static const EnvSpec sp{
            "MountainCar-v0", 2, true, 3, 0, 0, 200, {{-1.2, 0.6}, {-0.07, 0.07}}};
        return sp;
    }

protected:
    std::vector<double> do_reset(std::mt19937_64& rng) override {
        position_ = uniform(rng, -0.6, -0.4);
        velocity_ = 0.0;
        return {position_, velocity_};
    }

    StepOut do_step(double action) override {
        static constexpr double min_position = -1.2;
        static constexpr double max_position = 0.6;
        static constexpr double max_speed = 0.07;
        static constexpr double goal_position = 0.5;
        static constexpr double goal_velocity = 0.0;
        static constexpr double force = 0.001;
        static constexpr double gravity = 0.0025;

        velocity_ += (action - 1.0) * force + std::cos(3.0 * position_) * (-gravity);
        velocity_ = std::clamp(velocity_, -max_speed, max_speed);
        position_ += velocity_;
        position_ = std::clamp(position_, min_position, max_position);
        if (position_ == min_position && velocity_ < 0) velocity_ = 0;

        StepOut out;
        out.obs = {position_, velocity_};
        out.terminated = position_ >= goal_position && velocity_ >= goal_velocity;
        out.reward = -1.0;
        return out;
    }

private:
    double position_ = 0, velocity_ = 0;
};

// ------------------------------------------------------------- PointMass1D
//
// Minimal continuous-action task: push a unit mass along a line toward the
// origin. Semi-implicit Euler with dt = 0.1; reward is -position^2 per step;
// fixed 200-step horizon, no early termination.

class PointMass1DEnv final : public Env {
public:
    const EnvSpec& spec() const override {
        static const EnvSpec sp{
            "PointMass1D-v0", 2, false, 0, -1.0, 1.0, 200, {{-kInf, kInf}, {-kInf, kInf}}};
        return sp;
    }

protected:
    std::vector<double> do_reset(std::mt19937_64& rng) override {
        position_ = uniform(rng, -0.5, 0.5);
        velocity_ = 0.0;
        return {position_, velocity_};
    }

    StepOut do_step(double action) override {
        static constexpr double dt = 0.1;
        velocity_ += dt * action;
        position_ += dt * velocity_;
        StepOut out;
        out.obs = {position_, velocity_};
        out.reward = -position_ * position_;
        out.terminated = false;
        return out;
    }

private:
    double position_ = 0, velocity_ = 0;
};

}  // namespace

std::unique_ptr<Env> make_env(const std::string& id) {
    if (id == "CartPole-v1" || id == "cartpole") return std::make_unique<CartPoleEnv>();
    if (id == "Acrobot-v1" || id == "acrobot") return std::make_unique<AcrobotEnv>();
    if (id == "MountainCar-v0" || id == "mountaincar") return std::make_unique<MountainCarEnv>();
    if (id == "PointMass1D-v0" || id == "pointmass") return std::make_unique<PointMass1DEnv>();
    throw ConfigError("unknown environment id \"" + id + "\"");
}

double shaped_reward(const EnvSpec& spec, const Transition& tr, bool shaping_enabled) {
    if (!shaping_enabled || spec.id != "MountainCar-v0") return tr.true_reward;
    // Track height normalized to roughly [0.1, 1]: highest at the goal hill,
    // lowest at the valley bottom near position -0.52.
    const double height_bonus = std::sin(3.0 * tr.next_state[0]) * 0.45 + 0.55;
    return -1.0 + height_bonus;
}

}  // namespace qil::envs
