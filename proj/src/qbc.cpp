#include "qil/qbc.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qil/envs.hpp"
#include "qil/errors.hpp"
#include "qil/rng.hpp"

namespace qil::qbc {

PairPool PairPool::build(const demos::DemoDataset& demos, const vqc::VqcPolicy& policy) {
    if (demos.trajectories.empty()) throw ConfigError("qbc: empty demo dataset");
    PairPool pool;
    pool.gaussian = policy.gaussian;
    pool.states_norm.reserve(demos.n_pairs());
    for (const demos::DemoTrajectory& tr : demos.trajectories) {
        if (tr.states.size() != tr.actions.size())
            throw ConfigError("qbc: demo trajectory has mismatched state/action counts");
        for (std::size_t i = 0; i < tr.actions.size(); ++i) {
            pool.states_norm.push_back(policy.normalize(tr.states[i]));
            if (policy.gaussian) {
                pool.actions_c.push_back({tr.actions[i]});
            } else {
                const double a = tr.actions[i];
                const int ai = static_cast<int>(std::lround(a));
                if (std::abs(a - ai) > 1e-9 || ai < 0 || ai >= policy.arch.n_actions())
                    throw ConfigError("qbc: demo action " + std::to_string(a) +
                                      " is not a valid action index for this policy");
                pool.actions.push_back(ai);
            }
        }
    }
    return pool;
}

namespace {

kernels::NllResult pool_nll(const vqc::VqcPolicy& policy, const PairPool& pool,
                            std::span<const std::size_t> indices, kernels::Mode mode) {
    std::vector<const std::vector<double>*> states;
    states.reserve(indices.size());
    for (std::size_t i : indices) states.push_back(&pool.states_norm[i]);
    if (pool.gaussian) {
        std::vector<const std::vector<double>*> acts;
        acts.reserve(indices.size());
        for (std::size_t i : indices) acts.push_back(&pool.actions_c[i]);
        return kernels::nll_batch_gaussian(policy, states, acts, mode);
    }
    std::vector<int> acts;
    acts.reserve(indices.size());
    for (std::size_t i : indices) acts.push_back(pool.actions[i]);
    return kernels::nll_batch(policy, states, acts, mode);
}

}  // namespace

double qbc_loss(const vqc::VqcPolicy& policy, const PairPool& pool,
                std::span<const std::size_t> indices, kernels::Mode mode) {
    if (indices.empty()) throw std::invalid_argument("qbc_loss: empty batch");
    return pool_nll(policy, pool, indices, mode).loss;
}

double qbc_loss(const vqc::VqcPolicy& policy, const PairPool& pool, kernels::Mode mode) {
    std::vector<std::size_t> all(pool.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return qbc_loss(policy, pool, all, mode);
}

double qbc_step(vqc::VqcPolicy& policy, const PairPool& pool, const QbcConfig& config,
                std::mt19937_64& rng) {
    if (pool.size() == 0) throw ConfigError("qbc_step: empty pair pool");
    if (config.batch_size < 1) throw ConfigError("qbc_step: batch size must be positive");
    std::vector<std::size_t> idx(config.batch_size);
    for (std::size_t& i : idx) i = randint(rng, pool.size());
    const kernels::NllResult r = pool_nll(policy, pool, idx, config.mode);
    const std::array<double, 3> lrs{config.train_lambda ? config.lr_policy[0] : 0.0,
                                    config.lr_policy[1],
                                    config.train_nu ? config.lr_policy[2] : 0.0};
    policy.apply_update(r.grad, lrs, config.lr_sigma, -1.0);
    return r.loss;
}

QbcResult qbc_train(const demos::DemoDataset& demos, const QbcConfig& config,
                    const vqc::VqcPolicy& initial_policy) {
    const auto env = envs::make_env(config.env_id);
    const envs::EnvSpec& sp = env->spec();
    if (demos.env_id != sp.id)
        throw ConfigError("qbc_train: demos are for " + demos.env_id + ", env is " + sp.id);
    if (initial_policy.gaussian == sp.discrete)
        throw ConfigError("qbc_train: policy kind does not match the env's action space");

    vqc::VqcPolicy policy = initial_policy;
    const PairPool pool = PairPool::build(demos, policy);
    std::mt19937_64 rng = make_rng(config.seed, 0x9bcULL);

    QbcResult result;
    result.best_policy = policy;
    for (int iter = 0; iter < config.iterations; ++iter) {
        QbcRecord rec;
        rec.iteration = iter;
        rec.loss = qbc_step(policy, pool, config, rng);
        if (iter % config.eval_interval == 0 || iter == config.iterations - 1) {
            const kernels::EvalStats st = kernels::evaluate_policy(
                config.env_id, kernels::policy_actor(policy), config.eval_episodes,
                mix_seed(config.seed, 0xeba1ULL, iter), config.mode);
            result.eval_env_steps += st.env_steps;
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

}  // namespace qil::qbc
