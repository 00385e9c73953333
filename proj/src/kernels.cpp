#include "qil/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "qil/rng.hpp"

namespace qil::kernels {

ActFn policy_actor(const vqc::VqcPolicy& policy) {
    return [&policy](const std::vector<double>& obs, std::mt19937_64& rng) -> double {
        const std::vector<double> s_norm = policy.normalize(obs);
        const vqc::ActionDistribution dist = policy.distribution(s_norm);
        if (policy.gaussian) return dist.sample_continuous(rng)[0];
        return static_cast<double>(dist.sample(rng));
    };
}

std::vector<envs::Trajectory> collect_trajectories(const std::string& env_id, const ActFn& act,
                                                   int n_episodes, std::uint64_t base_seed,
                                                   Mode mode) {
    if (n_episodes < 0) throw std::invalid_argument("collect_trajectories: negative episode count");
    std::vector<envs::Trajectory> out(n_episodes);
    const bool parallel = (mode == Mode::OpenMp);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < n_episodes; ++i) {
        auto env = envs::make_env(env_id);
        std::mt19937_64 rng = make_rng(base_seed, static_cast<std::uint64_t>(i), 0xac7ULL);
        const std::uint64_t env_seed = mix_seed(base_seed, static_cast<std::uint64_t>(i), 0xe5dULL);
        envs::Trajectory tr;
        tr.env_id = env->spec().id;
        tr.seed = env_seed;
        std::vector<double> obs = env->reset(env_seed);
        while (!env->done()) {
            const double a = act(obs, rng);
            envs::Transition t = env->step(a);
            tr.total_return += t.true_reward;
            obs = t.next_state;
            tr.transitions.push_back(std::move(t));
        }
        out[i] = std::move(tr);
    }
    return out;
}

EvalStats evaluate_policy(const std::string& env_id, const ActFn& act, int episodes,
                          std::uint64_t seed, Mode mode) {
    const auto trajs = collect_trajectories(env_id, act, episodes, seed, mode);
    EvalStats st;
    st.returns.reserve(trajs.size());
    for (const auto& tr : trajs) {
        st.returns.push_back(tr.total_return);
        st.env_steps += static_cast<long long>(tr.size());
        st.mean += tr.total_return;
    }
    if (!trajs.empty()) st.mean /= static_cast<double>(trajs.size());
    double var = 0;
    for (double r : st.returns) var += (r - st.mean) * (r - st.mean);
    if (!trajs.empty()) var /= static_cast<double>(trajs.size());
    st.stddev = std::sqrt(var);
    return st;
}

namespace {

void check_batch_sizes(std::size_t states, std::size_t actions, const char* who) {
    if (states != actions)
        throw std::invalid_argument(std::string(who) + ": state/action count mismatch");
    if (states == 0) throw std::invalid_argument(std::string(who) + ": empty batch");
}

}  // namespace

NllResult nll_batch(const vqc::VqcPolicy& policy,
                    const std::vector<const std::vector<double>*>& states_norm,
                    const std::vector<int>& actions, Mode mode) {
    check_batch_sizes(states_norm.size(), actions.size(), "nll_batch");
    const std::size_t n_params = static_cast<std::size_t>(policy.layout().total());
    // Slot n_params holds the summed log-probability.
    std::vector<double> sums = chunked_sum(
        states_norm.size(), n_params + 1,
        [&](std::size_t i, double* acc) {
            const vqc::LogProbGrad g = policy.log_prob_gradient(*states_norm[i], actions[i]);
            for (std::size_t j = 0; j < n_params; ++j) acc[j] += g.grad[j];
            acc[n_params] += g.log_prob;
        },
        mode);
    const double n = static_cast<double>(states_norm.size());
    NllResult out;
    out.loss = -sums[n_params] / n;
    out.grad.resize(n_params);
    for (std::size_t j = 0; j < n_params; ++j) out.grad[j] = -sums[j] / n;
    return out;
}

NllResult nll_batch_gaussian(const vqc::VqcPolicy& policy,
                             const std::vector<const std::vector<double>*>& states_norm,
                             const std::vector<const std::vector<double>*>& actions, Mode mode) {
    check_batch_sizes(states_norm.size(), actions.size(), "nll_batch_gaussian");
    const std::size_t n_params = static_cast<std::size_t>(policy.layout().total());
    std::vector<double> sums = chunked_sum(
        states_norm.size(), n_params + 1,
        [&](std::size_t i, double* acc) {
            const vqc::LogProbGrad g = policy.log_prob_gradient(*states_norm[i], *actions[i]);
            for (std::size_t j = 0; j < n_params; ++j) acc[j] += g.grad[j];
            acc[n_params] += g.log_prob;
        },
        mode);
    const double n = static_cast<double>(states_norm.size());
    NllResult out;
    out.loss = -sums[n_params] / n;
    out.grad.resize(n_params);
    for (std::size_t j = 0; j < n_params; ++j) out.grad[j] = -sums[j] / n;
    return out;
}

std::vector<double> weighted_score_sum(const vqc::VqcPolicy& policy,
                                       const std::vector<const std::vector<double>*>& states_norm,
                                       const std::vector<int>& actions,
                                       const std::vector<double>& weights, Mode mode) {
    check_batch_sizes(states_norm.size(), actions.size(), "weighted_score_sum");
    if (weights.size() != states_norm.size())
        throw std::invalid_argument("weighted_score_sum: weight count mismatch");
    return chunked_sum(
        states_norm.size(), static_cast<std::size_t>(policy.layout().total()),
        [&](std::size_t i, double* acc) {
            const vqc::LogProbGrad g = policy.log_prob_gradient(*states_norm[i], actions[i]);
            for (std::size_t j = 0; j < g.grad.size(); ++j) acc[j] += weights[i] * g.grad[j];
        },
        mode);
}

std::vector<double> weighted_score_sum_gaussian(
    const vqc::VqcPolicy& policy, const std::vector<const std::vector<double>*>& states_norm,
    const std::vector<const std::vector<double>*>& actions, const std::vector<double>& weights,
    Mode mode) {
    check_batch_sizes(states_norm.size(), actions.size(), "weighted_score_sum_gaussian");
    if (weights.size() != states_norm.size())
        throw std::invalid_argument("weighted_score_sum_gaussian: weight count mismatch");
    return chunked_sum(
        states_norm.size(), static_cast<std::size_t>(policy.layout().total()),
        [&](std::size_t i, double* acc) {
            const vqc::LogProbGrad g = policy.log_prob_gradient(*states_norm[i], *actions[i]);
            for (std::size_t j = 0; j < g.grad.size(); ++j) acc[j] += weights[i] * g.grad[j];
        },
        mode);
}

double mean_entropy(const vqc::VqcPolicy& policy,
                    const std::vector<const std::vector<double>*>& states_norm, Mode mode) {
    if (states_norm.empty()) throw std::invalid_argument("mean_entropy: empty batch");
    std::vector<double> sum = chunked_sum(
        states_norm.size(), 1,
        [&](std::size_t i, double* acc) { acc[0] += policy.distribution(*states_norm[i]).entropy(); },
        mode);
    return sum[0] / static_cast<double>(states_norm.size());
}

}  // namespace qil::kernels
