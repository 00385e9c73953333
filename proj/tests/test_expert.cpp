#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "qil/demos.hpp"
#include "qil/errors.hpp"
#include "qil/expert.hpp"
#include "qil/rng.hpp"
#include "test_util.hpp"

using namespace qil;

TEST_CASE("collect_demos: NaN threshold keeps every episode, replay verifies") {
    std::mt19937_64 rng = make_rng(101);
    const vqc::VqcPolicy policy = test_util::random_policy(rng, 4, 1, 2);
    const demos::DemoDataset ds = expert::collect_demos(
        policy, "CartPole-v1", 5, 21, std::numeric_limits<double>::quiet_NaN(),
        kernels::Mode::Serial);

    CHECK(ds.trajectories.size() == 5);
    CHECK(ds.env_id == "CartPole-v1");
    CHECK(ds.source == "trained_expert");
    CHECK(ds.n_pairs() > 0);
    CHECK(ds.mean_return >= 1.0);
    CHECK(demos::verify_replay(ds) == 5);

    // Same seed, same demos.
    const demos::DemoDataset again = expert::collect_demos(
        policy, "CartPole-v1", 5, 21, std::numeric_limits<double>::quiet_NaN(),
        kernels::Mode::Serial);
    CHECK(again.mean_return == ds.mean_return);
    REQUIRE(again.trajectories.size() == 5);
    for (int k = 0; k < 5; ++k)
        CHECK(again.trajectories[k].actions == ds.trajectories[k].actions);

    CHECK_THROWS(expert::collect_demos(policy, "CartPole-v1", 0, 21));
}

TEST_CASE("collect_demos: a reachable filter keeps only qualifying episodes") {
    std::mt19937_64 rng = make_rng(102);
    const vqc::VqcPolicy policy = test_util::random_policy(rng, 4, 1, 2);

    // A random CartPole policy scores ~20 on average, so 15 is reachable but
    // filters part of the distribution out.
    const demos::DemoDataset ds =
        expert::collect_demos(policy, "CartPole-v1", 6, 33, 15.0, kernels::Mode::Serial);
    CHECK(ds.trajectories.size() == 6);
    for (const demos::DemoTrajectory& tr : ds.trajectories) CHECK(tr.ret >= 15.0);

    // An unreachable filter exhausts the attempt budget and throws.
    CHECK_THROWS_AS(
        expert::collect_demos(policy, "CartPole-v1", 2, 33, 501.0, kernels::Mode::Serial),
        std::runtime_error);
}

TEST_CASE("train_expert: smoke run fills the curve and counts episodes") {
    std::mt19937_64 rng = make_rng(103);
    const vqc::VqcPolicy init = test_util::random_policy(rng, 4, 1, 2);

    expert::ExpertConfig cfg;
    cfg.env_id = "CartPole-v1";
    cfg.seed = 9;
    cfg.iterations = 3;
    cfg.traj_per_iter = 2;
    cfg.eval_interval = 2;
    cfg.eval_episodes = 2;
    cfg.mode = kernels::Mode::Serial;
    const expert::ExpertResult res = expert::train_expert(cfg, init);

    REQUIRE(res.curve.size() == 3);
    CHECK(res.env_episodes == 6);
    CHECK(res.env_steps > 0);
    CHECK(res.curve[0].evaluated);
    CHECK(!res.curve[1].evaluated);
    CHECK(res.curve[2].evaluated);  // last iteration
    CHECK(res.curve[1].episodes == 4);
    CHECK(res.curve[0].mean_train_return >= 1.0);
    CHECK(res.best_eval >= 1.0);
    CHECK(!res.reached_target);  // no target set

    // Policy parameters moved.
    const std::vector<double> p0 = test_util::get_flat(init);
    const std::vector<double> p1 = test_util::get_flat(res.final_policy);
    CHECK(test_util::max_abs_diff(p0, p1) > 0.0);

    // A target below any CartPole return stops after the first evaluation.
    expert::ExpertConfig stop = cfg;
    stop.target_return = 0.0;
    const expert::ExpertResult early = expert::train_expert(stop, init);
    CHECK(early.reached_target);
    CHECK(early.curve.size() == 1);

    // Gaussian policy on a discrete env is rejected, as is an action-count
    // mismatch.
    const vqc::VqcPolicy gauss = test_util::random_policy(rng, 4, 1, 1, true);
    CHECK_THROWS_AS(expert::train_expert(cfg, gauss), ConfigError);
    const vqc::VqcPolicy three = test_util::random_policy(rng, 4, 1, 3);
    CHECK_THROWS_AS(expert::train_expert(cfg, three), ConfigError);
}

TEST_CASE("train_expert: shaped rewards train MountainCar but reporting stays true") {
    std::mt19937_64 rng = make_rng(104);
    const vqc::VqcPolicy init = test_util::random_policy(rng, 2, 1, 3);

    expert::ExpertConfig cfg;
    cfg.env_id = "MountainCar-v0";
    cfg.seed = 2;
    cfg.iterations = 2;
    cfg.traj_per_iter = 2;
    cfg.eval_interval = 1;
    cfg.eval_episodes = 2;
    cfg.shaped_rewards = true;
    cfg.mode = kernels::Mode::Serial;
    const expert::ExpertResult res = expert::train_expert(cfg, init);

    // True MountainCar returns are -1 per step; a random policy never
    // finishes early, so both train and eval means sit at exactly -200.
    REQUIRE(res.curve.size() == 2);
    CHECK(res.curve[0].mean_train_return == doctest::Approx(-200.0));
    CHECK(res.curve[0].eval_mean == doctest::Approx(-200.0));
}
