#pragma once

// Adversarial imitation with a quantum policy. Per iteration: collect
// trajectories with the current policy, score each visited pair with a
// virtual reward derived from the discriminator, take one REINFORCE ascent
// step on the policy (baseline-subtracted Monte Carlo returns, gamma = 1 by
// default) and one ascent step on the discriminator, then re-apply spectral
// normalization to the discriminator weights. The discriminator is trained
// to push D toward 1 on agent pairs and 0 on expert pairs, so both reward
// flavors (-log D and log(1-D)) grow as the agent becomes indistinguishable
// from the demonstrations. True rewards are touched only by evaluation.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qil/demos.hpp"
#include "qil/envs.hpp"
#include "qil/kernels.hpp"
#include "qil/vqc.hpp"

namespace qil::qgail {

// ------------------------------------------------------------ discriminator

struct MlpDiscriminator {
    int in_dim = 0;
    static constexpr int kHidden = 64;
    std::vector<double> w1, b1, w2, b2, w3, b3;  // row-major, w1 is kHidden x in_dim
    bool spectral_norm = true;
    int power_iters = 5;
    std::vector<double> u1, u2, u3;  // warm-started power-iteration vectors

    static MlpDiscriminator init(int in_dim, std::mt19937_64& rng, bool spectral_norm);

    double logit(std::span<const double> x) const;
    double forward(std::span<const double> x) const;  // sigmoid(logit)

    // One gradient-ascent step on
    //   J = mean_agent log D + mean_expert log(1 - D),
    // followed by spectral normalization when enabled. Returns J before the
    // step.
    double ascent_step(const std::vector<std::vector<double>>& agent_x,
                       const std::vector<std::vector<double>>& expert_x, double lr,
                       kernels::Mode mode);

    // W <- W / sigma_hat(W) for each weight matrix (biases untouched).
    void normalize();
    // Power-iteration estimate for matrix 1, 2 or 3 (refreshes the stored u).
    double estimate_sigma(int which);
};

// Discriminator built from the same circuit family as the policy: a single
// observable read out as r in [-M, M] with M = sum_i |nu_i * coeff_i|, mapped
// to D = clip((r + M) / 2M, 1e-6, 1 - 1e-6). No spectral normalization; the
// bounded readout plays that role.
struct VqcDiscriminator {
    vqc::CircuitArchitecture arch;  // exactly one observable
    vqc::EncodingSpec enc;          // bounds are all 1 (inputs arrive normalized)
    vqc::PolicyParameters params;

    static VqcDiscriminator init(int in_dim, int n_layers, std::mt19937_64& rng);

    double readout_scale() const;  // M
    double forward(std::span<const double> x) const;
    double ascent_step(const std::vector<std::vector<double>>& agent_x,
                       const std::vector<std::vector<double>>& expert_x,
                       const std::array<double, 3>& lrs, kernels::Mode mode);
};

// ---------------------------------------------------------- virtual rewards

enum class RewardKind { NegLogD, LogOneMinusD, DiffLog };

RewardKind parse_reward_kind(const std::string& name);  // "neg_log_d" etc.
std::string reward_kind_name(RewardKind kind);

// D is clipped to [1e-6, 1 - 1e-6] before taking logs.
double virtual_reward(double d, RewardKind kind);

// ------------------------------------------------------------------ returns

// R_t = sum_{t' >= t} gamma^(t'-t) r_{t'}.
std::vector<double> returns_to_go(const std::vector<double>& rewards, double gamma);

// ----------------------------------------------------------------- baseline

// Linear state-value baseline on features [s, s*s, t/T, (t/T)^2, (t/T)^3, 1],
// least-squares fitted (ridge 1e-5) to the previous batch's returns.
struct LinearBaseline {
    int state_dim = 0;
    int horizon = 1;  // T in the time features
    std::vector<double> coef;
    bool fitted = false;

    LinearBaseline() = default;
    LinearBaseline(int state_dim, int horizon);

    int n_features() const { return 2 * state_dim + 4; }
    std::vector<double> features(std::span<const double> s_norm, int t) const;
    double predict(std::span<const double> s_norm, int t) const;  // 0 before first fit

    struct Sample {
        const std::vector<double>* s_norm;
        int t;
        double target;
    };
    void fit(const std::vector<Sample>& batch, double ridge = 1e-5);
    void gradient_step(const std::vector<Sample>& batch, double lr);  // MSE descent
};

// ------------------------------------------------------------ policy update

struct ScoredStep {
    std::vector<double> s_norm;
    int action = 0;                 // discrete
    std::vector<double> action_c;   // continuous
    double reward = 0;              // virtual reward
    int t = 0;
    double log_prob_old = 0;        // PPO only
};

struct ScoredTrajectory {
    std::vector<ScoredStep> steps;
};

// (1/|D|) sum_traj sum_t grad log pi(a_t|s_t) * (R_t - b(s_t, t)).
std::vector<double> reinforce_gradient(const vqc::VqcPolicy& policy,
                                       const std::vector<ScoredTrajectory>& batch,
                                       const LinearBaseline& baseline, double gamma,
                                       kernels::Mode mode);

// Clipped-surrogate value, for tests and the PPO loop:
//   mean_i min(r_i * A_i, clip(r_i, 1-eps, 1+eps) * A_i).
double ppo_surrogate(const vqc::VqcPolicy& policy, const std::vector<ScoredStep>& steps,
                     const std::vector<double>& advantages, double clip, kernels::Mode mode);

struct PpoStatus {
    int epochs_run = 0;
    double approx_kl = 0;
    double surrogate_before = 0;
    double surrogate_after = 0;
};

// Several ascent epochs on the clipped surrogate; stops early once the
// mean(logp_old - logp_new) KL estimate exceeds target_kl.
PpoStatus ppo_update(vqc::VqcPolicy& policy, const std::vector<ScoredTrajectory>& batch,
                     const LinearBaseline& baseline, double gamma, double clip, double target_kl,
                     int epochs, const std::array<double, 3>& lrs, double lr_sigma,
                     kernels::Mode mode);

// -------------------------------------------------------------------- train

struct QgailConfig {
    std::string env_id;
    std::uint64_t seed = 0;
    int iterations = 300;
    int traj_per_iter = 10;
    long long max_env_episodes = 3000;
    double gamma = 1.0;
    std::array<double, 3> lr_policy{0.07, 0.01, 0.07};
    double lr_sigma = 0.002;
    double lr_disc = 3e-4;
    RewardKind reward_kind = RewardKind::NegLogD;
    bool spectral_norm = true;
    bool quantum_disc = false;
    std::array<double, 3> lr_disc_vqc{0.1, 0.01, 0.1};
    int disc_vqc_layers = 4;
    int eval_interval = 10;
    int eval_episodes = 20;
    double target_return = std::numeric_limits<double>::quiet_NaN();  // NaN: no early stop
    bool baseline_gradient_mode = false;
    double lr_baseline = 1e-2;
    bool ppo = false;
    double ppo_clip = 0.2;
    double ppo_target_kl = 0.01;
    int ppo_epochs = 10;
    bool train_lambda = true;  // ablation switches
    bool train_nu = true;
    kernels::Mode mode = kernels::default_mode();

    // Test hook, called after every discriminator update.
    std::function<void(const MlpDiscriminator&)> disc_observer;
};

struct QgailRecord {
    int iteration = 0;
    long long episodes = 0;
    double entropy = 0;
    double disc_objective = 0;
    double mean_virtual_reward = 0;
    bool evaluated = false;
    double eval_mean = 0;
    double eval_std = 0;
};

struct QgailResult {
    vqc::VqcPolicy final_policy;
    vqc::VqcPolicy best_policy;
    double best_eval = -std::numeric_limits<double>::infinity();
    std::vector<QgailRecord> curve;
    long long env_episodes = 0;
    long long env_steps = 0;
    bool reached_target = false;
};

QgailResult qgail_train(const demos::DemoDataset& demos, const QgailConfig& config,
                        const vqc::VqcPolicy& initial_policy);

}  // namespace qil::qgail
