#pragma once

// Experiment configuration: a small TOML-style `key = value` format (strings,
// bools, numbers, flat arrays, # comments) plus the per-env default tables.
// Parsing a config overlays the file's keys onto the env/algorithm defaults;
// serializing the resolved config back out round-trips losslessly, which is
// what makes run directories reproducible from their snapshot alone.

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qil/expert.hpp"
#include "qil/qbc.hpp"
#include "qil/qgail.hpp"
#include "qil/vqc.hpp"

namespace qil::config {

struct TomlValue {
    enum class Kind { String, Bool, Integer, Float, NumberArray, StringArray };
    Kind kind = Kind::String;
    std::string s;
    bool b = false;
    long long i = 0;
    double d = 0;
    std::vector<double> nums;
    std::vector<std::string> strs;

    static TomlValue of(const std::string& v);
    static TomlValue of(bool v);
    static TomlValue of(long long v);
    static TomlValue of(double v);
    static TomlValue of(const std::vector<double>& v);
    static TomlValue of(const std::vector<std::string>& v);

    double as_number() const;  // Integer or Float
    bool operator==(const TomlValue& other) const;
};

struct TomlTable {
    std::vector<std::pair<std::string, TomlValue>> items;  // insertion order

    const TomlValue* find(const std::string& key) const;
    void set(const std::string& key, TomlValue value);  // replaces in place
    bool operator==(const TomlTable& other) const { return items == other.items; }
};

TomlTable parse_toml(const std::string& text);       // throws ConfigError with a line number
TomlTable parse_toml_file(const std::string& path);  // throws ConfigError if unreadable
std::string serialize_toml(const TomlTable& table);

// A fully resolved experiment description. Every field is serialized into
// the run snapshot; every field can be overridden from a config file.
struct RunConfig {
    std::string env_id;
    std::string algorithm = "qbc";  // qbc | qgail | expert | verify

    // Architecture.
    int n_layers = 0;
    std::vector<std::string> observables;  // Pauli strings, one per action
    double beta = 1.0;
    std::vector<double> state_bounds;
    bool gaussian = false;

    // Optimization.
    std::array<double, 3> lr_policy{0.1, 0.01, 0.1};
    double lr_sigma = 0.002;
    int iterations = 500;
    int batch_size = 2000;  // Q-BC pairs per step
    int traj_per_iter = 10;
    long long max_env_episodes = 3000;
    double gamma = 1.0;
    int eval_interval = 10;
    int eval_episodes = 20;
    double target_return = std::numeric_limits<double>::quiet_NaN();

    // Discriminator.
    double lr_disc = 3e-4;
    std::string reward_kind = "neg_log_d";
    std::array<double, 3> lr_disc_vqc{0.1, 0.01, 0.1};
    int disc_vqc_layers = 4;

    // Expert/demo pipeline.
    bool shaped_rewards = false;
    double demo_min_return = std::numeric_limits<double>::quiet_NaN();
    int n_demo_trajectories = 50;

    // Ablation toggles.
    bool train_lambda = true;
    bool train_nu = true;
    bool spectral_norm = true;
    bool quantum_disc = false;

    // PPO (continuous Q-GAIL).
    bool ppo = false;
    double ppo_clip = 0.2;
    double ppo_target_kl = 0.01;
    int ppo_epochs = 10;

    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

// The per-env defaults. Throws ConfigError for unknown env or algorithm.
RunConfig default_config(const std::string& env_id, const std::string& algorithm);

// Overlay file keys onto cfg. Unknown keys throw ConfigError (typo guard);
// env/algorithm in the table must match cfg's if present.
void apply_toml(RunConfig& cfg, const TomlTable& table);
TomlTable to_toml(const RunConfig& cfg);

// Wiring into the algorithm modules.
vqc::VqcPolicy make_policy(const RunConfig& cfg, std::uint64_t seed);
qbc::QbcConfig make_qbc_config(const RunConfig& cfg, std::uint64_t seed);
qgail::QgailConfig make_qgail_config(const RunConfig& cfg, std::uint64_t seed);
expert::ExpertConfig make_expert_config(const RunConfig& cfg, std::uint64_t seed);

}  // namespace qil::config
