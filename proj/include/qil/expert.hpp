#pragma once

// Classical-expert stage: train a policy with REINFORCE (linear baseline,
// batch-standardized advantages) on the true environment rewards
// (optionally shaped, which only MountainCar uses), then roll it out to
// build demonstration datasets for the imitation learners. Evaluation
// always uses true rewards.

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qil/demos.hpp"
#include "qil/kernels.hpp"
#include "qil/vqc.hpp"

namespace qil::expert {

struct ExpertConfig {
    std::string env_id;
    std::uint64_t seed = 0;
    int iterations = 2000;
    int traj_per_iter = 10;
    double gamma = 1.0;
    std::array<double, 3> lr_policy{0.1, 0.01, 0.1};
    double lr_sigma = 0.002;  // Gaussian policies only
    int eval_interval = 10;
    int eval_episodes = 20;
    double target_return = std::numeric_limits<double>::quiet_NaN();  // NaN: run all iterations
    bool shaped_rewards = false;  // train on shaped rewards, evaluate on true ones
    kernels::Mode mode = kernels::default_mode();
};

struct ExpertRecord {
    int iteration = 0;
    long long episodes = 0;
    double mean_train_return = 0;  // true return of the training batch
    bool evaluated = false;
    double eval_mean = 0;
    double eval_std = 0;
};

struct ExpertResult {
    vqc::VqcPolicy final_policy;
    vqc::VqcPolicy best_policy;  // highest evaluation mean seen
    double best_eval = -std::numeric_limits<double>::infinity();
    std::vector<ExpertRecord> curve;
    long long env_episodes = 0;
    long long env_steps = 0;
    bool reached_target = false;
};

ExpertResult train_expert(const ExpertConfig& config, const vqc::VqcPolicy& initial_policy);

// Roll the policy out and keep episodes whose true return is at least
// min_return (NaN keeps everything). Throws if the policy cannot produce
// n_episodes qualifying episodes within a generous attempt budget.
demos::DemoDataset collect_demos(const vqc::VqcPolicy& policy, const std::string& env_id,
                                 int n_episodes, std::uint64_t seed,
                                 double min_return = std::numeric_limits<double>::quiet_NaN(),
                                 kernels::Mode mode = kernels::default_mode());

}  // namespace qil::expert
