#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qil/config.hpp"
#include "qil/errors.hpp"

using namespace qil;
using config::RunConfig;
using config::TomlTable;
using config::TomlValue;

TEST_CASE("toml parsing handles the value kinds") {
    const TomlTable t = config::parse_toml(
        "# comment line\n"
        "name = \"hello \\\"there\\\"\"\n"
        "flag = true\n"
        "count = 42\n"
        "rate = -2.5e-3   # trailing comment\n"
        "arr = [1, 2.5, 3]\n"
        "names = [\"a\", \"b\"]\n"
        "special = nan\n"
        "\n");
    CHECK(t.find("name")->s == "hello \"there\"");
    CHECK(t.find("flag")->b == true);
    CHECK(t.find("count")->i == 42);
    CHECK(t.find("count")->kind == TomlValue::Kind::Integer);
    CHECK(t.find("rate")->d == doctest::Approx(-2.5e-3));
    CHECK(t.find("arr")->nums == std::vector<double>{1, 2.5, 3});
    CHECK(t.find("names")->strs == std::vector<std::string>{"a", "b"});
    CHECK(std::isnan(t.find("special")->d));
    CHECK(t.find("missing") == nullptr);
}

TEST_CASE("toml parse errors carry line numbers") {
    const auto message_of = [](const std::string& text) {
        try {
            config::parse_toml(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("(no error)");
    };
    CHECK(message_of("a = 1\nb == 2\n").find("line 2") != std::string::npos);
    CHECK(message_of("a = 1\na = 2\n").find("duplicate") != std::string::npos);
    CHECK(message_of("x = [1, \"two\"]\n").find("line 1") != std::string::npos);
    CHECK(message_of("x = 1 stray\n") != "(no error)");
    CHECK(message_of("x = \"unterminated\n") != "(no error)");
}

TEST_CASE("serialization round-trips and preserves value kinds") {
    const RunConfig cfg = config::default_config("cartpole", "qbc");
    const TomlTable t1 = config::to_toml(cfg);
    const std::string text1 = config::serialize_toml(t1);
    const TomlTable t2 = config::parse_toml(text1);
    CHECK(t1 == t2);
    CHECK(config::serialize_toml(t2) == text1);  // byte-stable

    // Applying the serialized table back onto defaults is a no-op.
    RunConfig cfg2 = config::default_config("cartpole", "qbc");
    config::apply_toml(cfg2, t2);
    CHECK(config::serialize_toml(config::to_toml(cfg2)) == text1);
}

TEST_CASE("per-env behavioral-cloning defaults match the published table") {
    const RunConfig cp = config::default_config("cartpole", "qbc");
    CHECK(cp.env_id == "CartPole-v1");
    CHECK(cp.n_layers == 4);
    CHECK(cp.beta == 1.0);
    CHECK(cp.lr_policy == std::array<double, 3>{0.07, 0.01, 0.07});
    CHECK(cp.observables == std::vector<std::string>{"Z0", "Z1"});
    CHECK(cp.state_bounds == std::vector<double>{1.0, 1.0, 1.0, 1.0});
    CHECK(cp.batch_size == 2000);
    CHECK_FALSE(cp.gaussian);
    CHECK(cp.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});

    const RunConfig ac = config::default_config("acrobot", "qbc");
    CHECK(ac.n_layers == 5);
    CHECK(ac.lr_policy == std::array<double, 3>{0.1, 0.01, 0.1});
    CHECK(ac.observables == std::vector<std::string>{"Z0", "Z1", "Z2"});
    CHECK(ac.state_bounds == std::vector<double>{0.5, 0.5, 0.5, 0.5, 3.0, 6.0});

    const RunConfig mc = config::default_config("mountaincar", "qbc");
    CHECK(mc.n_layers == 6);
    CHECK(mc.beta == 1.2);
    CHECK(mc.observables == std::vector<std::string>{"Z0", "Z0Z1", "Z1"});
    CHECK(mc.state_bounds == std::vector<double>{1.2, 0.07});
}

TEST_CASE("per-env adversarial defaults match the published table") {
    const RunConfig cp = config::default_config("cartpole", "qgail");
    CHECK(cp.observables == std::vector<std::string>{"Z0Z1Z2Z3", "-Z0Z1Z2Z3"});
    CHECK(cp.state_bounds == std::vector<double>{2.4, 2.5, 0.21, 2.5});
    CHECK(cp.reward_kind == "neg_log_d");
    CHECK(cp.lr_disc == 3e-4);
    CHECK(cp.gamma == 1.0);
    CHECK(cp.traj_per_iter == 10);
    CHECK(cp.max_env_episodes == 3000);
    CHECK(cp.spectral_norm);
    CHECK_FALSE(cp.quantum_disc);

    const RunConfig ac = config::default_config("acrobot", "qgail");
    CHECK(ac.observables == std::vector<std::string>{"Z0", "Z0Z1", "Z1"});
    CHECK(ac.reward_kind == "log_one_minus_d");
    REQUIRE(ac.state_bounds.size() == 6);
    CHECK(ac.state_bounds[4] == doctest::Approx(4 * 3.14159265358979323846));
    CHECK(ac.state_bounds[5] == doctest::Approx(9 * 3.14159265358979323846));

    const RunConfig pm = config::default_config("pointmass", "qgail");
    CHECK(pm.gaussian);
    CHECK(pm.ppo);
    CHECK(pm.n_layers == 5);
    CHECK(pm.state_bounds == std::vector<double>{2.0, 2.0});
}

TEST_CASE("expert defaults train on the adversarial architecture with stop targets") {
    const RunConfig cp = config::default_config("cartpole", "expert");
    CHECK(cp.observables == std::vector<std::string>{"Z0Z1Z2Z3", "-Z0Z1Z2Z3"});
    CHECK(cp.state_bounds == std::vector<double>{2.4, 2.5, 0.21, 2.5});
    CHECK(cp.target_return == 490.0);
    CHECK(cp.demo_min_return == 475.0);
    CHECK(cp.max_env_episodes == 40000);

    const RunConfig mc = config::default_config("mountaincar", "expert");
    CHECK(mc.shaped_rewards);
    CHECK(mc.demo_min_return == -130.0);

    const RunConfig pm = config::default_config("pointmass", "expert");
    CHECK_FALSE(pm.ppo);  // expert REINFORCE even on the continuous env
}

TEST_CASE("unknown keys, unknown envs and conflicts are config errors") {
    CHECK_THROWS_AS(config::default_config("pendulum", "qbc"), ConfigError);
    CHECK_THROWS_AS(config::default_config("cartpole", "sarsa"), ConfigError);

    RunConfig cfg = config::default_config("cartpole", "qbc");
    CHECK_THROWS_AS(config::apply_toml(cfg, config::parse_toml("iterationz = 5\n")), ConfigError);
    CHECK_THROWS_AS(config::apply_toml(cfg, config::parse_toml("env = \"Acrobot-v1\"\n")),
                    ConfigError);
    CHECK_THROWS_AS(config::apply_toml(cfg, config::parse_toml("algorithm = \"qgail\"\n")),
                    ConfigError);
    CHECK_THROWS_AS(config::apply_toml(cfg, config::parse_toml("reward_kind = \"nope\"\n")),
                    ConfigError);
    CHECK_THROWS_AS(config::apply_toml(cfg, config::parse_toml("lr_policy = [0.1, 0.2]\n")),
                    ConfigError);

    // Matching env/algorithm keys are fine.
    config::apply_toml(cfg, config::parse_toml("env = \"CartPole-v1\"\nalgorithm = \"qbc\"\n"));
    CHECK(cfg.env_id == "CartPole-v1");
}

TEST_CASE("file keys overlay the defaults") {
    RunConfig cfg = config::default_config("cartpole", "qbc");
    config::apply_toml(cfg, config::parse_toml("iterations = 7\n"
                                               "beta = 0.5\n"
                                               "seeds = [9, 10]\n"
                                               "observables = [\"Z0\", \"-Z0\"]\n"
                                               "train_lambda = false\n"
                                               "target_return = 123.5\n"));
    CHECK(cfg.iterations == 7);
    CHECK(cfg.beta == 0.5);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{9, 10});
    CHECK(cfg.observables == std::vector<std::string>{"Z0", "-Z0"});
    CHECK_FALSE(cfg.train_lambda);
    CHECK(cfg.target_return == 123.5);
    // Untouched keys keep their defaults.
    CHECK(cfg.n_layers == 4);
    CHECK(cfg.batch_size == 2000);
}

TEST_CASE("NaN round-trips through the file format") {
    RunConfig cfg = config::default_config("cartpole", "qbc");
    CHECK(std::isnan(cfg.target_return));
    const std::string text = config::serialize_toml(config::to_toml(cfg));
    RunConfig back = config::default_config("cartpole", "qbc");
    back.target_return = 1.0;
    config::apply_toml(back, config::parse_toml(text));
    CHECK(std::isnan(back.target_return));
}

TEST_CASE("parse_toml_file reads from disk and reports missing files") {
    const std::string path = "config_test_tmp.toml";
    {
        std::ofstream out(path);
        out << "iterations = 3\n";
    }
    const TomlTable t = config::parse_toml_file(path);
    CHECK(t.find("iterations")->i == 3);
    std::remove(path.c_str());
    CHECK_THROWS_AS(config::parse_toml_file("no_such_file.toml"), ConfigError);
}

TEST_CASE("make_policy wires architecture, bounds and beta") {
    std::size_t seed = 3;
    const RunConfig cfg = config::default_config("cartpole", "qbc");
    const vqc::VqcPolicy p = config::make_policy(cfg, seed);
    CHECK(p.arch.n_qubits == 4);
    CHECK(p.arch.n_layers == 4);
    CHECK(p.arch.n_actions() == 2);
    CHECK(p.params.beta == cfg.beta);
    CHECK(p.enc.state_bounds == cfg.state_bounds);
    CHECK_FALSE(p.gaussian);

    // Same seed, same parameters; different seed differs.
    const vqc::VqcPolicy q = config::make_policy(cfg, seed);
    CHECK(p.params.phi == q.params.phi);
    const vqc::VqcPolicy r = config::make_policy(cfg, seed + 1);
    CHECK(p.params.phi != r.params.phi);

    // Observable count must match the env's action count.
    RunConfig bad = cfg;
    bad.observables = {"Z0"};
    CHECK_THROWS_AS(config::make_policy(bad, 1), ConfigError);
    bad = cfg;
    bad.state_bounds = {1.0, 1.0};
    CHECK_THROWS_AS(config::make_policy(bad, 1), ConfigError);
    bad = cfg;
    bad.gaussian = true;  // discrete env cannot take a gaussian policy
    CHECK_THROWS_AS(config::make_policy(bad, 1), ConfigError);
}

TEST_CASE("algorithm config factories copy the tuned fields") {
    const RunConfig cfg = config::default_config("acrobot", "qgail");
    const qgail::QgailConfig g = config::make_qgail_config(cfg, 17);
    CHECK(g.env_id == "Acrobot-v1");
    CHECK(g.seed == 17);
    CHECK(g.iterations == cfg.iterations);
    CHECK(g.traj_per_iter == cfg.traj_per_iter);
    CHECK(g.max_env_episodes == cfg.max_env_episodes);
    CHECK(g.lr_policy == cfg.lr_policy);
    CHECK(g.lr_disc == cfg.lr_disc);
    CHECK(g.reward_kind == qgail::RewardKind::LogOneMinusD);
    CHECK(g.spectral_norm == cfg.spectral_norm);

    const RunConfig bc = config::default_config("cartpole", "qbc");
    const qbc::QbcConfig b = config::make_qbc_config(bc, 2);
    CHECK(b.batch_size == 2000);
    CHECK(b.iterations == 400);
    CHECK(b.eval_interval == 20);

    const RunConfig ex = config::default_config("mountaincar", "expert");
    const expert::ExpertConfig e = config::make_expert_config(ex, 5);
    CHECK(e.shaped_rewards);
    CHECK(e.target_return == -105.0);
}

TEST_CASE("shipped per-env config files exactly mirror the in-code defaults") {
    const std::filesystem::path configs =
        std::filesystem::path(__FILE__).parent_path().parent_path() / "configs";
    const std::pair<const char*, const char*> envs[] = {
        {"CartPole-v1", "cartpole"},
        {"Acrobot-v1", "acrobot"},
        {"MountainCar-v0", "mountaincar"},
        {"PointMass1D-v0", "pointmass"},
    };
    for (const auto& [env, slug] : envs)
        for (const std::string algo : {"qbc", "qgail", "expert"}) {
            const std::filesystem::path file = configs / (slug + ("-" + algo) + ".toml");
            INFO("file: ", file.string());
            REQUIRE(std::filesystem::exists(file));
            const TomlTable shipped = config::parse_toml_file(file.string());
            const RunConfig defaults = config::default_config(env, algo);
            CHECK(shipped == config::to_toml(defaults));
            // Applying the file onto the defaults must be a no-op.
            RunConfig overlaid = defaults;
            config::apply_toml(overlaid, shipped);
            CHECK(config::to_toml(overlaid) == config::to_toml(defaults));
        }
}
