#pragma once

// Classic-control environments, reimplemented to match the reference Gym
// dynamics step for step (same constants, same integrators, same
// termination rules), plus a 1-D point-mass toy task for the continuous
// action path. Episodes are deterministic given the reset seed; the only
// randomness is in the initial state.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace qil::envs {

struct EnvSpec {
    std::string id;
    int state_dim = 0;
    bool discrete = true;
    int n_actions = 0;        // discrete only
    double action_low = 0;    // box only
    double action_high = 0;   // box only
    int max_steps = 0;
    std::vector<std::pair<double, double>> state_range;  // physical ranges per dim
};

struct Transition {
    std::vector<double> state;
    double action = 0;  // action index for discrete envs, force for box envs
    std::vector<double> next_state;
    double true_reward = 0;
    bool done = false;  // terminated or truncated at max_steps
    int t = 0;          // 0-based step index within the episode
};

struct Trajectory {
    std::string env_id;
    std::uint64_t seed = 0;
    std::vector<Transition> transitions;
    double total_return = 0;

    std::size_t size() const { return transitions.size(); }
};

class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;

    std::vector<double> reset(std::uint64_t seed);
    Transition step(double action);

    bool done() const { return done_; }
    int episode_steps() const { return t_; }
    // Lifetime step counter; used to audit that offline algorithms never
    // touch the environment outside labeled evaluations.
    long long total_steps() const { return total_steps_; }

protected:
    struct StepOut {
        std::vector<double> obs;
        double reward = 0;
        bool terminated = false;
    };
    virtual std::vector<double> do_reset(std::mt19937_64& rng) = 0;
    virtual StepOut do_step(double action) = 0;

private:
    std::mt19937_64 rng_;
    std::vector<double> obs_;
    int t_ = 0;
    bool done_ = true;  // step before reset is a usage error
    long long total_steps_ = 0;
};

// "CartPole-v1", "Acrobot-v1", "MountainCar-v0", "PointMass1D-v0" (plus
// lowercase aliases cartpole/acrobot/mountaincar/pointmass). Unknown ids
// throw ConfigError.
std::unique_ptr<Env> make_env(const std::string& id);

// -1 + height bonus for MountainCar expert training; anything else (or
// shaping disabled) passes the true reward through. Evaluation always uses
// true rewards.
double shaped_reward(const EnvSpec& spec, const Transition& tr, bool shaping_enabled);

}  // namespace qil::envs
