#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qil/envs.hpp"
#include "qil/errors.hpp"
#include "qil/expert.hpp"
#include "qil/qgail.hpp"
#include "qil/rng.hpp"
#include "test_util.hpp"

using namespace qil;
using qgail::LinearBaseline;
using qgail::MlpDiscriminator;
using qgail::RewardKind;
using qgail::ScoredStep;
using qgail::ScoredTrajectory;
using qgail::VqcDiscriminator;

namespace {

std::vector<std::vector<double>> random_inputs(std::mt19937_64& rng, int n, int dim,
                                               double shift = 0.0) {
    std::vector<std::vector<double>> xs(n);
    for (auto& x : xs) {
        x.resize(dim);
        for (double& v : x) v = uniform(rng, -0.9, 0.9) * 0.5 + shift;
    }
    return xs;
}

double mlp_objective(const MlpDiscriminator& d, const std::vector<std::vector<double>>& agent,
                     const std::vector<std::vector<double>>& expert) {
    double j = 0;
    for (const auto& x : agent) j += std::log(d.forward(x)) / static_cast<double>(agent.size());
    for (const auto& x : expert)
        j += std::log(1.0 - d.forward(x)) / static_cast<double>(expert.size());
    return j;
}

double vqc_objective(const VqcDiscriminator& d, const std::vector<std::vector<double>>& agent,
                     const std::vector<std::vector<double>>& expert) {
    double j = 0;
    for (const auto& x : agent) j += std::log(d.forward(x)) / static_cast<double>(agent.size());
    for (const auto& x : expert)
        j += std::log(1.0 - d.forward(x)) / static_cast<double>(expert.size());
    return j;
}

}  // namespace

TEST_CASE("mlp discriminator: forward math checked by hand") {
    std::mt19937_64 rng = make_rng(71);
    const int in_dim = 3;
    const MlpDiscriminator d = MlpDiscriminator::init(in_dim, rng, false);
    const std::vector<double> x{0.2, -0.5, 0.9};

    std::vector<double> h1(MlpDiscriminator::kHidden), h2(MlpDiscriminator::kHidden);
    for (int j = 0; j < MlpDiscriminator::kHidden; ++j) {
        double z = d.b1[j];
        for (int i = 0; i < in_dim; ++i) z += d.w1[j * in_dim + i] * x[i];
        h1[j] = std::tanh(z);
    }
    for (int j = 0; j < MlpDiscriminator::kHidden; ++j) {
        double z = d.b2[j];
        for (int i = 0; i < MlpDiscriminator::kHidden; ++i)
            z += d.w2[j * MlpDiscriminator::kHidden + i] * h1[i];
        h2[j] = std::tanh(z);
    }
    double z = d.b3[0];
    for (int i = 0; i < MlpDiscriminator::kHidden; ++i) z += d.w3[i] * h2[i];

    CHECK(d.logit(x) == doctest::Approx(z).epsilon(1e-14));
    CHECK(d.forward(x) == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-14));
    CHECK(d.forward(x) > 0.0);
    CHECK(d.forward(x) < 1.0);

    const std::vector<double> bad{0.1, 0.2};
    CHECK_THROWS(d.logit(bad));
    CHECK_THROWS(MlpDiscriminator::init(0, rng, true));
}

TEST_CASE("mlp discriminator: ascent step follows the finite-difference gradient") {
    std::mt19937_64 rng = make_rng(72);
    const int in_dim = 4;
    MlpDiscriminator d = MlpDiscriminator::init(in_dim, rng, false);
    const auto agent = random_inputs(rng, 5, in_dim, 0.3);
    const auto expert = random_inputs(rng, 4, in_dim, -0.3);

    const MlpDiscriminator before = d;
    const double reported = d.ascent_step(agent, expert, 1.0, kernels::Mode::Serial);
    CHECK(reported == doctest::Approx(mlp_objective(before, agent, expert)).epsilon(1e-12));

    // With lr = 1 and no spectral norm the weight deltas are the gradient.
    const double h = 1e-6;
    const auto fd = [&](auto member, int idx) {
        MlpDiscriminator plus = before, minus = before;
        (plus.*member)[idx] += h;
        (minus.*member)[idx] -= h;
        return (mlp_objective(plus, agent, expert) - mlp_objective(minus, agent, expert)) /
               (2 * h);
    };
    const auto delta = [&](auto member, int idx) {
        return (d.*member)[idx] - (before.*member)[idx];
    };
    for (int idx : {0, 7, 11}) {
        CHECK(delta(&MlpDiscriminator::w1, idx) ==
              doctest::Approx(fd(&MlpDiscriminator::w1, idx)).epsilon(1e-5));
        CHECK(delta(&MlpDiscriminator::w2, idx * 31) ==
              doctest::Approx(fd(&MlpDiscriminator::w2, idx * 31)).epsilon(1e-5));
        CHECK(delta(&MlpDiscriminator::w3, idx) ==
              doctest::Approx(fd(&MlpDiscriminator::w3, idx)).epsilon(1e-5));
        CHECK(delta(&MlpDiscriminator::b1, idx) ==
              doctest::Approx(fd(&MlpDiscriminator::b1, idx)).epsilon(1e-5));
        CHECK(delta(&MlpDiscriminator::b2, idx) ==
              doctest::Approx(fd(&MlpDiscriminator::b2, idx)).epsilon(1e-5));
    }
    CHECK(delta(&MlpDiscriminator::b3, 0) ==
          doctest::Approx(fd(&MlpDiscriminator::b3, 0)).epsilon(1e-5));

    const std::vector<std::vector<double>> empty;
    CHECK_THROWS(d.ascent_step(empty, expert, 0.1, kernels::Mode::Serial));
}

TEST_CASE("mlp discriminator: training separates disjoint clusters") {
    std::mt19937_64 rng = make_rng(73);
    const int in_dim = 3;
    MlpDiscriminator d = MlpDiscriminator::init(in_dim, rng, true);
    const auto agent = random_inputs(rng, 16, in_dim, 0.6);
    const auto expert = random_inputs(rng, 16, in_dim, -0.6);

    const double j0 = mlp_objective(d, agent, expert);
    for (int step = 0; step < 60; ++step) d.ascent_step(agent, expert, 0.05, kernels::Mode::Serial);
    const double j1 = mlp_objective(d, agent, expert);
    CHECK(j1 > j0 + 0.05);  // pushed D(agent) up, D(expert) down
}

TEST_CASE("spectral normalization keeps every sigma within 1e-3 of one") {
    std::mt19937_64 rng = make_rng(74);
    const int in_dim = 5;
    MlpDiscriminator d = MlpDiscriminator::init(in_dim, rng, true);
    const auto agent = random_inputs(rng, 8, in_dim, 0.4);
    const auto expert = random_inputs(rng, 8, in_dim, -0.4);

    const int kH = MlpDiscriminator::kHidden;
    for (int step = 0; step < 30; ++step) {
        d.ascent_step(agent, expert, 3e-4, kernels::Mode::Serial);
        CHECK(std::abs(oracles::spectral_norm_svd(d.w1, kH, in_dim) - 1.0) < 1e-3);
        CHECK(std::abs(oracles::spectral_norm_svd(d.w2, kH, kH) - 1.0) < 1e-3);
        CHECK(std::abs(oracles::spectral_norm_svd(d.w3, 1, kH) - 1.0) < 1e-3);
    }

    // Without the constraint the norms drift away from one.
    MlpDiscriminator free = MlpDiscriminator::init(in_dim, rng, false);
    for (int step = 0; step < 30; ++step)
        free.ascent_step(agent, expert, 0.05, kernels::Mode::Serial);
    const double worst = std::max(
        {std::abs(oracles::spectral_norm_svd(free.w1, kH, in_dim) - 1.0),
         std::abs(oracles::spectral_norm_svd(free.w2, kH, kH) - 1.0),
         std::abs(oracles::spectral_norm_svd(free.w3, 1, kH) - 1.0)});
    CHECK(worst > 1e-2);

    CHECK_THROWS(d.estimate_sigma(0));
}

TEST_CASE("vqc discriminator: bounded readout and exact gradients") {
    std::mt19937_64 rng = make_rng(75);
    const int in_dim = 3;
    VqcDiscriminator d = VqcDiscriminator::init(in_dim, 2, rng);
    CHECK(d.arch.observables.size() == 1);
    CHECK(d.readout_scale() == doctest::Approx(1.0).epsilon(1e-14));  // nu starts at 1

    const auto agent = random_inputs(rng, 3, in_dim, 0.2);
    const auto expert = random_inputs(rng, 2, in_dim, -0.2);
    for (const auto& x : agent) {
        const double v = d.forward(x);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }

    VqcDiscriminator stepped = d;
    const double reported =
        stepped.ascent_step(agent, expert, {1.0, 1.0, 1.0}, kernels::Mode::Serial);
    CHECK(reported == doctest::Approx(vqc_objective(d, agent, expert)).epsilon(1e-12));

    // lr = 1 on every group turns the parameter deltas into the gradient.
    const double h = 1e-6;
    for (std::size_t i = 0; i < d.params.lambda.size(); ++i) {
        VqcDiscriminator plus = d, minus = d;
        plus.params.lambda[i] += h;
        minus.params.lambda[i] -= h;
        const double fd =
            (vqc_objective(plus, agent, expert) - vqc_objective(minus, agent, expert)) / (2 * h);
        CHECK(stepped.params.lambda[i] - d.params.lambda[i] == doctest::Approx(fd).epsilon(2e-5));
    }
    for (std::size_t i = 0; i < d.params.phi.size(); i += 5) {
        VqcDiscriminator plus = d, minus = d;
        plus.params.phi[i] += h;
        minus.params.phi[i] -= h;
        const double fd =
            (vqc_objective(plus, agent, expert) - vqc_objective(minus, agent, expert)) / (2 * h);
        CHECK(stepped.params.phi[i] - d.params.phi[i] == doctest::Approx(fd).epsilon(2e-5));
    }
    {
        VqcDiscriminator plus = d, minus = d;
        plus.params.nu[0][0] += h;
        minus.params.nu[0][0] -= h;
        const double fd =
            (vqc_objective(plus, agent, expert) - vqc_objective(minus, agent, expert)) / (2 * h);
        CHECK(stepped.params.nu[0][0] - d.params.nu[0][0] == doctest::Approx(fd).epsilon(2e-5));
    }
}

TEST_CASE("virtual rewards at the indifferent discriminator and the clip edges") {
    CHECK(qgail::virtual_reward(0.5, RewardKind::NegLogD) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(qgail::virtual_reward(0.5, RewardKind::LogOneMinusD) ==
          doctest::Approx(-std::log(2.0)).epsilon(1e-14));
    CHECK(qgail::virtual_reward(0.5, RewardKind::DiffLog) == doctest::Approx(0.0));

    // All kinds reward looking like the expert (small D).
    for (RewardKind k : {RewardKind::NegLogD, RewardKind::LogOneMinusD, RewardKind::DiffLog})
        CHECK(qgail::virtual_reward(0.1, k) > qgail::virtual_reward(0.9, k));

    // Clipping caps the reward at the 1e-6 edge.
    CHECK(qgail::virtual_reward(0.0, RewardKind::NegLogD) ==
          doctest::Approx(-std::log(1e-6)).epsilon(1e-12));
    CHECK(qgail::virtual_reward(1.0, RewardKind::LogOneMinusD) ==
          doctest::Approx(std::log(1e-6)).epsilon(1e-9));  // 1 - (1 - 1e-6) wobbles
    CHECK_THROWS(qgail::virtual_reward(-0.1, RewardKind::NegLogD));
    CHECK_THROWS(qgail::virtual_reward(1.1, RewardKind::NegLogD));

    CHECK(qgail::parse_reward_kind("neg_log_d") == RewardKind::NegLogD);
    CHECK(qgail::parse_reward_kind("log_one_minus_d") == RewardKind::LogOneMinusD);
    CHECK(qgail::parse_reward_kind("diff_log") == RewardKind::DiffLog);
    CHECK_THROWS_AS(qgail::parse_reward_kind("gail"), ConfigError);
    for (RewardKind k : {RewardKind::NegLogD, RewardKind::LogOneMinusD, RewardKind::DiffLog})
        CHECK(qgail::parse_reward_kind(qgail::reward_kind_name(k)) == k);
}

TEST_CASE("returns-to-go accumulates from the tail") {
    const std::vector<double> r{1.0, 2.0, 3.0};
    const std::vector<double> half = qgail::returns_to_go(r, 0.5);
    CHECK(half[2] == doctest::Approx(3.0));
    CHECK(half[1] == doctest::Approx(2.0 + 0.5 * 3.0));
    CHECK(half[0] == doctest::Approx(1.0 + 0.5 * (2.0 + 0.5 * 3.0)));
    const std::vector<double> undiscounted = qgail::returns_to_go(r, 1.0);
    CHECK(undiscounted[0] == doctest::Approx(6.0));
    CHECK(undiscounted[1] == doctest::Approx(5.0));
    CHECK(qgail::returns_to_go({}, 1.0).empty());
}

TEST_CASE("linear baseline recovers an exactly-linear target") {
    std::mt19937_64 rng = make_rng(76);
    const int dim = 2, horizon = 20;
    LinearBaseline b(dim, horizon);
    CHECK(b.n_features() == 2 * dim + 4);
    CHECK(b.predict(std::vector<double>{0.1, 0.2}, 3) == 0.0);  // before any fit

    // Target built from the baseline's own feature map.
    const std::vector<double> truth{1.5, -2.0, 0.7, 0.3, 4.0, -1.0, 2.5, 0.8};
    std::vector<std::vector<double>> states;
    std::vector<int> ts;
    std::vector<double> targets;
    for (int i = 0; i < 120; ++i) {
        std::vector<double> s{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
        const int t = static_cast<int>(rng() % horizon);
        const std::vector<double> f = b.features(s, t);
        double y = 0;
        for (int k = 0; k < b.n_features(); ++k) y += truth[k] * f[k];
        states.push_back(std::move(s));
        ts.push_back(t);
        targets.push_back(y);
    }
    std::vector<LinearBaseline::Sample> batch;
    for (int i = 0; i < 120; ++i) batch.push_back({&states[i], ts[i], targets[i]});
    b.fit(batch);
    for (int i = 0; i < 120; ++i)
        CHECK(b.predict(states[i], ts[i]) == doctest::Approx(targets[i]).epsilon(1e-4));

    // Gradient mode shrinks the mean squared error.
    LinearBaseline g(dim, horizon);
    const auto mse = [&](const LinearBaseline& base) {
        double e = 0;
        for (int i = 0; i < 120; ++i) {
            const double d = base.predict(states[i], ts[i]) - targets[i];
            e += d * d;
        }
        return e / 120;
    };
    g.gradient_step(batch, 1e-3);
    const double m1 = mse(g);
    for (int k = 0; k < 50; ++k) g.gradient_step(batch, 1e-3);
    CHECK(mse(g) < m1);

    CHECK_THROWS(b.fit({}));
    CHECK_THROWS(LinearBaseline(0, 10));
    const std::vector<double> wrong{0.1};
    CHECK_THROWS(b.features(wrong, 0));
}

TEST_CASE("reinforce gradient equals the hand-assembled score sum") {
    std::mt19937_64 rng = make_rng(77);
    const vqc::VqcPolicy policy = test_util::random_policy(rng, 2, 1, 2);

    std::vector<ScoredTrajectory> batch(2);
    for (int k = 0; k < 2; ++k)
        for (int t = 0; t < 3; ++t) {
            ScoredStep st;
            st.s_norm = test_util::random_state(rng, 2);
            st.action = static_cast<int>(rng() % 2);
            st.reward = uniform(rng, -1.0, 1.0);
            st.t = t;
            batch[k].steps.push_back(std::move(st));
        }

    LinearBaseline baseline(2, 10);  // unfitted: predicts 0
    const std::vector<double> got =
        qgail::reinforce_gradient(policy, batch, baseline, 0.9, kernels::Mode::Serial);

    std::vector<double> want(policy.layout().total(), 0.0);
    for (const ScoredTrajectory& tr : batch) {
        std::vector<double> rewards;
        for (const ScoredStep& st : tr.steps) rewards.push_back(st.reward);
        const std::vector<double> rtg = qgail::returns_to_go(rewards, 0.9);
        for (std::size_t t = 0; t < tr.steps.size(); ++t) {
            const vqc::LogProbGrad g =
                policy.log_prob_gradient(tr.steps[t].s_norm, tr.steps[t].action);
            for (std::size_t j = 0; j < want.size(); ++j)
                want[j] += g.grad[j] * rtg[t] / 2.0;  // two trajectories
        }
    }
    REQUIRE(got.size() == want.size());
    for (std::size_t j = 0; j < want.size(); ++j)
        CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-10));

    CHECK_THROWS(qgail::reinforce_gradient(policy, {}, baseline, 1.0, kernels::Mode::Serial));
}

TEST_CASE("ppo surrogate equals the mean advantage at ratio one") {
    std::mt19937_64 rng = make_rng(78);
    const vqc::VqcPolicy policy = test_util::random_policy(rng, 2, 1, 2);

    std::vector<ScoredStep> steps;
    std::vector<double> advantages;
    double mean_adv = 0;
    for (int i = 0; i < 6; ++i) {
        ScoredStep st;
        st.s_norm = test_util::random_state(rng, 2);
        st.action = static_cast<int>(rng() % 2);
        st.log_prob_old = policy.distribution(st.s_norm).log_prob(st.action);
        steps.push_back(std::move(st));
        advantages.push_back(uniform(rng, -2.0, 2.0));
        mean_adv += advantages.back();
    }
    mean_adv /= 6;
    const double sur = qgail::ppo_surrogate(policy, steps, advantages, 0.2, kernels::Mode::Serial);
    CHECK(sur == doctest::Approx(mean_adv).epsilon(1e-10));

    CHECK_THROWS(qgail::ppo_surrogate(policy, steps, {0.0}, 0.2, kernels::Mode::Serial));
}

TEST_CASE("ppo update: zero learning rate is a no-op, huge steps trip the KL stop") {
    std::mt19937_64 rng = make_rng(79);
    vqc::VqcPolicy policy = test_util::random_policy(rng, 2, 1, 2);

    std::vector<ScoredTrajectory> batch(2);
    for (int k = 0; k < 2; ++k)
        for (int t = 0; t < 3; ++t) {
            ScoredStep st;
            st.s_norm = test_util::random_state(rng, 2);
            st.action = static_cast<int>(rng() % 2);
            st.reward = -1.0;  // negative advantages push sampled actions down
            st.t = t;
            st.log_prob_old = policy.distribution(st.s_norm).log_prob(st.action);
            batch[k].steps.push_back(std::move(st));
        }
    LinearBaseline baseline(2, 10);

    vqc::VqcPolicy frozen = policy;
    const qgail::PpoStatus none = qgail::ppo_update(frozen, batch, baseline, 1.0, 0.2, 0.01, 3,
                                                    {0.0, 0.0, 0.0}, 0.0, kernels::Mode::Serial);
    CHECK(none.epochs_run == 3);  // KL stays 0, no early stop
    CHECK(none.approx_kl == 0.0);
    CHECK(none.surrogate_after == doctest::Approx(none.surrogate_before).epsilon(1e-12));

    const qgail::PpoStatus big = qgail::ppo_update(policy, batch, baseline, 1.0, 0.2, 1e-8, 10,
                                                   {2.0, 2.0, 2.0}, 0.0, kernels::Mode::Serial);
    CHECK(big.epochs_run < 10);
    CHECK(big.approx_kl > 1e-8);
}

TEST_CASE("qgail training loop: smoke run with observer and early stop") {
    std::mt19937_64 rng = make_rng(80);
    const vqc::VqcPolicy policy = test_util::random_policy(rng, 4, 1, 2);
    const demos::DemoDataset demo_set = expert::collect_demos(
        policy, "CartPole-v1", 2, 11, std::numeric_limits<double>::quiet_NaN(),
        kernels::Mode::Serial);

    qgail::QgailConfig cfg;
    cfg.env_id = "CartPole-v1";
    cfg.seed = 5;
    cfg.iterations = 3;
    cfg.traj_per_iter = 2;
    cfg.eval_interval = 2;
    cfg.eval_episodes = 2;
    cfg.mode = kernels::Mode::Serial;
    int observed = 0;
    cfg.disc_observer = [&](const MlpDiscriminator&) { ++observed; };

    const qgail::QgailResult res = qgail::qgail_train(demo_set, cfg, policy);
    CHECK(res.curve.size() == 3);
    CHECK(observed == 3);
    CHECK(res.env_episodes == 6);
    CHECK(res.env_steps > 0);
    CHECK(res.curve.front().evaluated);   // iteration 0 evaluates
    CHECK(!res.curve[1].evaluated);       // interval 2 skips iteration 1
    CHECK(res.curve.back().evaluated);    // last iteration always evaluates
    CHECK(res.curve[0].entropy > 0.0);
    CHECK(res.best_eval > 0.0);  // CartPole returns are positive
    for (const qgail::QgailRecord& r : res.curve) CHECK(r.episodes <= 6);

    // A trivially reachable target stops after the first evaluation.
    qgail::QgailConfig stop = cfg;
    stop.disc_observer = nullptr;
    stop.eval_interval = 1;
    stop.target_return = 0.0;
    const qgail::QgailResult early = qgail::qgail_train(demo_set, stop, policy);
    CHECK(early.reached_target);
    CHECK(early.env_episodes == 2);

    // The episode budget cuts training off.
    qgail::QgailConfig budget = cfg;
    budget.disc_observer = nullptr;
    budget.max_env_episodes = 3;
    const qgail::QgailResult capped = qgail::qgail_train(demo_set, budget, policy);
    CHECK(capped.env_episodes == 2);  // second batch would overrun

    // Config validation: env mismatch, wrong policy shape.
    demos::DemoDataset wrong_env = demo_set;
    wrong_env.env_id = "Acrobot-v1";
    CHECK_THROWS_AS(qgail::qgail_train(wrong_env, cfg, policy), ConfigError);
    const vqc::VqcPolicy three = test_util::random_policy(rng, 4, 1, 3);
    CHECK_THROWS_AS(qgail::qgail_train(demo_set, cfg, three), ConfigError);
    const vqc::VqcPolicy gauss = test_util::random_policy(rng, 4, 1, 1, true);
    CHECK_THROWS_AS(qgail::qgail_train(demo_set, cfg, gauss), ConfigError);
}

TEST_CASE("qgail with the quantum discriminator runs end to end") {
    std::mt19937_64 rng = make_rng(81);
    const vqc::VqcPolicy policy = test_util::random_policy(rng, 4, 1, 2);
    const demos::DemoDataset demo_set = expert::collect_demos(
        policy, "CartPole-v1", 2, 13, std::numeric_limits<double>::quiet_NaN(),
        kernels::Mode::Serial);

    qgail::QgailConfig cfg;
    cfg.env_id = "CartPole-v1";
    cfg.seed = 6;
    cfg.iterations = 2;
    cfg.traj_per_iter = 2;
    cfg.eval_interval = 1;
    cfg.eval_episodes = 2;
    cfg.quantum_disc = true;
    cfg.disc_vqc_layers = 2;
    cfg.mode = kernels::Mode::Serial;

    const qgail::QgailResult res = qgail::qgail_train(demo_set, cfg, policy);
    CHECK(res.curve.size() == 2);
    CHECK(res.env_episodes == 4);
    CHECK(std::isfinite(res.curve.back().disc_objective));
    CHECK(res.curve.back().disc_objective < 0.0);  // log-likelihood style objective
}
