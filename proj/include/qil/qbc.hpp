#pragma once

// Behavioural cloning on a quantum policy: minibatch NLL descent over
// expert state-action pairs, fully offline. Environments are only touched
// by the periodic evaluation episodes (and those run on fresh env
// instances, so a caller-held env never sees a step call).

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qil/demos.hpp"
#include "qil/kernels.hpp"
#include "qil/vqc.hpp"

namespace qil::qbc {

// Expert pairs flattened out of a demo set, states pre-normalized with the
// policy's bounds. Discrete pools fill `actions`, Gaussian pools `actions_c`.
struct PairPool {
    std::vector<std::vector<double>> states_norm;
    std::vector<int> actions;
    std::vector<std::vector<double>> actions_c;
    bool gaussian = false;

    std::size_t size() const { return states_norm.size(); }
    static PairPool build(const demos::DemoDataset& demos, const vqc::VqcPolicy& policy);
};

struct QbcConfig {
    std::string env_id;
    std::uint64_t seed = 0;
    int iterations = 1000;
    int batch_size = 2000;  // pairs per step, sampled uniformly with replacement
    std::array<double, 3> lr_policy{0.1, 0.01, 0.1};
    double lr_sigma = 0.002;  // Gaussian policies only
    int eval_interval = 10;
    int eval_episodes = 20;
    double target_return = std::numeric_limits<double>::quiet_NaN();  // NaN: run all iterations
    bool train_lambda = true;  // ablation switches
    bool train_nu = true;
    kernels::Mode mode = kernels::default_mode();
};

// Mean NLL of the expert actions under the policy, over the whole pool or
// over an index subset.
double qbc_loss(const vqc::VqcPolicy& policy, const PairPool& pool, kernels::Mode mode);
double qbc_loss(const vqc::VqcPolicy& policy, const PairPool& pool,
                std::span<const std::size_t> indices, kernels::Mode mode);

// One minibatch descent step. Returns the batch loss at the pre-update
// parameters. Zero learning rates leave the parameters bit-identical.
double qbc_step(vqc::VqcPolicy& policy, const PairPool& pool, const QbcConfig& config,
                std::mt19937_64& rng);

struct QbcRecord {
    int iteration = 0;
    double loss = 0;  // minibatch NLL at that iteration's pre-update parameters
    bool evaluated = false;
    double eval_mean = 0;
    double eval_std = 0;
};

struct QbcResult {
    vqc::VqcPolicy final_policy;
    vqc::VqcPolicy best_policy;  // highest evaluation mean seen
    double best_eval = -std::numeric_limits<double>::infinity();
    std::vector<QbcRecord> curve;
    long long eval_env_steps = 0;  // every env step the run made lives here
    bool reached_target = false;
};

QbcResult qbc_train(const demos::DemoDataset& demos, const QbcConfig& config,
                    const vqc::VqcPolicy& initial_policy);

}  // namespace qil::qbc
