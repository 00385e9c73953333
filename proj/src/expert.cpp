#include "qil/expert.hpp"

#include <cmath>
#include <stdexcept>

#include "qil/envs.hpp"
#include "qil/errors.hpp"
#include "qil/qgail.hpp"
#include "qil/rng.hpp"

namespace qil::expert {

ExpertResult train_expert(const ExpertConfig& config, const vqc::VqcPolicy& initial_policy) {
    const auto env = envs::make_env(config.env_id);
    const envs::EnvSpec& sp = env->spec();
    if (initial_policy.gaussian == sp.discrete)
        throw ConfigError("train_expert: policy kind does not match the env's action space");
    if (sp.discrete && initial_policy.arch.n_actions() != sp.n_actions)
        throw ConfigError("train_expert: policy has " +
                          std::to_string(initial_policy.arch.n_actions()) +
                          " observables, env has " + std::to_string(sp.n_actions) + " actions");

    vqc::VqcPolicy policy = initial_policy;
    qgail::LinearBaseline baseline(sp.state_dim, sp.max_steps);
    ExpertResult result;
    result.best_policy = policy;

    for (int iter = 0; iter < config.iterations; ++iter) {
        const auto trajs = kernels::collect_trajectories(
            config.env_id, kernels::policy_actor(policy), config.traj_per_iter,
            mix_seed(config.seed, 0xe717ULL, iter), config.mode);
        result.env_episodes += static_cast<long long>(trajs.size());

        std::vector<qgail::ScoredTrajectory> scored(trajs.size());
        double true_return_sum = 0;
        for (std::size_t k = 0; k < trajs.size(); ++k) {
            true_return_sum += trajs[k].total_return;
            scored[k].steps.reserve(trajs[k].size());
            for (const envs::Transition& t : trajs[k].transitions) {
                qgail::ScoredStep st;
                st.s_norm = policy.normalize(t.state);
                st.t = t.t;
                st.reward = envs::shaped_reward(sp, t, config.shaped_rewards);
                if (sp.discrete) {
                    st.action = static_cast<int>(t.action);
                } else {
                    st.action_c = {t.action};
                }
                result.env_steps += 1;
                scored[k].steps.push_back(std::move(st));
            }
        }

        // Returns-to-go minus the baseline, standardized over the batch.
        // True returns reach the hundreds and REINFORCE steps scale with
        // them; without the standardization one lucky long episode moves
        // parameters by whole radians and wrecks whatever was learned.
        std::vector<const std::vector<double>*> states;
        std::vector<int> actions;
        std::vector<const std::vector<double>*> actions_c;
        std::vector<double> weights;
        std::vector<qgail::LinearBaseline::Sample> samples;
        for (const qgail::ScoredTrajectory& tr : scored) {
            std::vector<double> rewards;
            for (const qgail::ScoredStep& st : tr.steps) rewards.push_back(st.reward);
            const std::vector<double> rtg = qgail::returns_to_go(rewards, config.gamma);
            for (std::size_t t = 0; t < tr.steps.size(); ++t) {
                const qgail::ScoredStep& st = tr.steps[t];
                states.push_back(&st.s_norm);
                if (sp.discrete) actions.push_back(st.action);
                else actions_c.push_back(&st.action_c);
                weights.push_back(rtg[t] - baseline.predict(st.s_norm, st.t));
                samples.push_back({&st.s_norm, st.t, rtg[t]});
            }
        }
        const double n = static_cast<double>(weights.size());
        double mean = 0;
        for (double w : weights) mean += w;
        mean /= n;
        double var = 0;
        for (double w : weights) var += (w - mean) * (w - mean);
        const double stddev = std::sqrt(var / n);
        for (double& w : weights) w = (w - mean) / (stddev > 1e-8 ? stddev : 1.0);

        const std::vector<double> g =
            sp.discrete
                ? kernels::weighted_score_sum(policy, states, actions, weights, config.mode)
                : kernels::weighted_score_sum_gaussian(policy, states, actions_c, weights,
                                                       config.mode);
        policy.apply_update(g, config.lr_policy, config.lr_sigma, 1.0 / n);
        baseline.fit(samples);

        ExpertRecord rec;
        rec.iteration = iter;
        rec.episodes = result.env_episodes;
        rec.mean_train_return = true_return_sum / static_cast<double>(trajs.size());
        if (iter % config.eval_interval == 0 || iter == config.iterations - 1) {
            const kernels::EvalStats st = kernels::evaluate_policy(
                config.env_id, kernels::policy_actor(policy), config.eval_episodes,
                mix_seed(config.seed, 0xeba1ULL, iter), config.mode);
            rec.evaluated = true;
            rec.eval_mean = st.mean;
            rec.eval_std = st.stddev;
            if (st.mean > result.best_eval) {
                result.best_eval = st.mean;
                result.best_policy = policy;
            }
            result.curve.push_back(rec);
            if (!std::isnan(config.target_return) && st.mean >= config.target_return) {
                result.reached_target = true;
                break;
            }
        } else {
            result.curve.push_back(rec);
        }
    }

    result.final_policy = policy;
    if (result.best_eval == -std::numeric_limits<double>::infinity())
        result.best_policy = result.final_policy;
    return result;
}

demos::DemoDataset collect_demos(const vqc::VqcPolicy& policy, const std::string& env_id,
                                 int n_episodes, std::uint64_t seed, double min_return,
                                 kernels::Mode mode) {
    if (n_episodes < 1) throw std::invalid_argument("collect_demos: need at least one episode");
    const kernels::ActFn actor = kernels::policy_actor(policy);
    std::vector<envs::Trajectory> kept;
    kept.reserve(n_episodes);
    const long long max_attempts = 50LL * n_episodes + 1000;
    long long attempts = 0;
    for (std::uint64_t batch = 0; static_cast<int>(kept.size()) < n_episodes; ++batch) {
        auto trajs =
            kernels::collect_trajectories(env_id, actor, n_episodes,
                                          mix_seed(seed, 0xde30ULL, batch), mode);
        for (auto& tr : trajs) {
            ++attempts;
            if (std::isnan(min_return) || tr.total_return >= min_return)
                kept.push_back(std::move(tr));
            if (static_cast<int>(kept.size()) == n_episodes) break;
        }
        if (static_cast<int>(kept.size()) < n_episodes && attempts >= max_attempts)
            throw std::runtime_error("collect_demos: policy failed to reach return " +
                                     std::to_string(min_return) + " often enough on " + env_id);
    }
    return demos::from_trajectories(kept, "trained_expert");
}

}  // namespace qil::expert
