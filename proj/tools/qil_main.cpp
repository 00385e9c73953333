// qil: train experts, collect demonstrations, run behavioral cloning and
// adversarial imitation, evaluate checkpoints, verify the tabular bounds,
// and drive the scripted ablation suites.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qil/config.hpp"
#include "qil/demos.hpp"
#include "qil/errors.hpp"
#include "qil/expert.hpp"
#include "qil/kernels.hpp"
#include "qil/runner.hpp"
#include "qil/theory.hpp"
#include "qil/vqc.hpp"

namespace fs = std::filesystem;
using qil::ConfigError;

namespace {

// Resolve env + optional config file into a fully populated RunConfig.
qil::config::RunConfig load_run_config(const std::string& env_flag, const std::string& algorithm,
                                       const std::string& config_path) {
    qil::config::TomlTable table;
    std::string env = env_flag;
    if (!config_path.empty()) {
        table = qil::config::parse_toml_file(config_path);
        if (env.empty()) {
            const qil::config::TomlValue* v = table.find("env");
            if (v && v->kind == qil::config::TomlValue::Kind::String) env = v->s;
        }
    }
    if (env.empty())
        throw ConfigError("no environment given: pass --env or set env in the config file");
    qil::config::RunConfig cfg = qil::config::default_config(env, algorithm);
    if (!config_path.empty()) qil::config::apply_toml(cfg, table);
    return cfg;
}

std::string pick_out_dir(const std::string& out_dir_flag, const std::string& name) {
    if (!out_dir_flag.empty()) {
        fs::create_directories(out_dir_flag);
        return out_dir_flag;
    }
    return qil::runner::make_run_dir(qil::runner::run_root(), name);
}

std::string env_slug(const std::string& env_id) {
    std::string out;
    for (char c : env_id)
        if (std::isalnum(static_cast<unsigned char>(c))) out += std::tolower(static_cast<unsigned char>(c));
    return out;
}

int report_outcome(const qil::runner::RunOutcome& outcome) {
    for (const qil::runner::SeedArtifacts& a : outcome.seeds) {
        if (a.trained)
            std::printf("seed %llu: final %.3f best %.3f%s\n",
                        static_cast<unsigned long long>(a.seed), a.final_eval, a.best_eval,
                        a.reached_target ? " (target reached)" : "");
        else
            std::fprintf(stderr, "seed %llu: FAILED: %s\n",
                         static_cast<unsigned long long>(a.seed), a.error.c_str());
    }
    std::printf("artifacts: %s\n", outcome.dir.c_str());
    return outcome.ok ? 0 : 1;
}

// Index of the seed with the highest best_eval, or -1 if none trained.
int best_seed_index(const qil::runner::RunOutcome& outcome) {
    int best = -1;
    for (std::size_t i = 0; i < outcome.seeds.size(); ++i)
        if (outcome.seeds[i].trained &&
            (best < 0 || outcome.seeds[i].best_eval > outcome.seeds[best].best_eval))
            best = static_cast<int>(i);
    return best;
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    Csv csv;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            csv.header = cells;
            first = false;
        } else {
            std::vector<double> row;
            for (const std::string& c : cells) row.push_back(std::stod(c));
            csv.rows.push_back(std::move(row));
        }
    }
    if (csv.header.empty()) throw ConfigError(path + " has no header row");
    return csv;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum imitation-learning toolkit"};
    app.require_subcommand(1);
    int exit_code = 0;

    // Shared option storage.
    std::string env, config_path, out_dir, demos_path, ckpt_path, out_path, report_path;
    std::string reward_kind, algorithm, suite, run_dir, title;
    int jobs = 1, n_episodes = 50, eval_episodes = 20, iterations = -1, layers = -1;
    int instances = 100, max_states = 5, max_actions = 3;
    std::uint64_t seed = 1;
    double min_return = std::numeric_limits<double>::quiet_NaN();
    double target_return = std::numeric_limits<double>::quiet_NaN();
    double beta = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::uint64_t> seeds;
    bool no_spectral_norm = false, quantum_disc = false, ppo = false;
    bool no_train_lambda = false, no_train_nu = false, shaped = false, unshaped = false;

    const auto add_training_options = [&](CLI::App* sub, bool gail) {
        sub->add_option("--env", env, "environment id");
        sub->add_option("--config", config_path, "config file overlaying the env defaults");
        sub->add_option("--out-dir", out_dir, "run directory (default: timestamped under $QIL_RUN_DIR)");
        sub->add_option("--jobs", jobs, "seeds trained concurrently")->check(CLI::PositiveNumber);
        sub->add_option("--seeds", seeds, "seed list")->delimiter(',');
        sub->add_option("--iterations", iterations, "training iterations");
        sub->add_option("--beta", beta, "softmax inverse temperature");
        sub->add_option("--layers", layers, "variational layers");
        sub->add_option("--target-return", target_return, "stop a seed early at this eval return");
        sub->add_flag("--no-train-lambda", no_train_lambda, "freeze the encoding scales");
        sub->add_flag("--no-train-nu", no_train_nu, "freeze the readout scales");
        if (gail) {
            sub->add_flag("--no-spectral-norm", no_spectral_norm, "disable discriminator spectral norm");
            sub->add_flag("--quantum-disc", quantum_disc, "use the VQC discriminator");
            sub->add_flag("--ppo", ppo, "PPO update instead of REINFORCE");
            sub->add_option("--reward-kind", reward_kind,
                            "virtual reward: neg_log_d | log_one_minus_d | diff_log");
        }
    };
    const auto apply_training_overrides = [&](qil::config::RunConfig& cfg) {
        if (!seeds.empty()) cfg.seeds = seeds;
        if (iterations >= 0) cfg.iterations = iterations;
        if (layers >= 0) cfg.n_layers = layers;
        if (std::isfinite(beta)) cfg.beta = beta;
        if (std::isfinite(target_return)) cfg.target_return = target_return;
        if (no_train_lambda) cfg.train_lambda = false;
        if (no_train_nu) cfg.train_nu = false;
        if (no_spectral_norm) cfg.spectral_norm = false;
        if (quantum_disc) cfg.quantum_disc = true;
        if (ppo) cfg.ppo = true;
        if (!reward_kind.empty()) {
            qil::qgail::parse_reward_kind(reward_kind);  // typo guard
            cfg.reward_kind = reward_kind;
        }
    };

    // ---------------------------------------------------------- train-expert
    CLI::App* cmd_expert = app.add_subcommand("train-expert", "train a REINFORCE expert policy");
    add_training_options(cmd_expert, false);
    cmd_expert->add_option("--out", out_path, "copy the best checkpoint here");
    cmd_expert->add_flag("--shaped", shaped, "train on the shaped reward");
    cmd_expert->add_flag("--unshaped", unshaped, "train on the raw env reward");
    cmd_expert->callback([&] {
        qil::config::RunConfig cfg = load_run_config(env, "expert", config_path);
        apply_training_overrides(cfg);
        if (shaped) cfg.shaped_rewards = true;
        if (unshaped) cfg.shaped_rewards = false;
        const std::string dir = pick_out_dir(out_dir, "expert-" + env_slug(cfg.env_id));
        const qil::runner::RunOutcome outcome = qil::runner::run_training(cfg, nullptr, dir, jobs);
        exit_code = report_outcome(outcome);
        const int best = best_seed_index(outcome);
        if (best >= 0 && !out_path.empty()) {
            fs::copy_file(dir + "/seed-" + std::to_string(outcome.seeds[best].seed) + "/best.json",
                          out_path, fs::copy_options::overwrite_existing);
            std::printf("checkpoint: %s\n", out_path.c_str());
        }
        // The expert is only useful if it clears the demo filter.
        const double threshold =
            std::isfinite(cfg.demo_min_return) ? cfg.demo_min_return : cfg.target_return;
        if (best < 0) {
            exit_code = 1;
        } else if (std::isfinite(threshold) && outcome.seeds[best].best_eval < threshold) {
            std::fprintf(stderr, "expert best eval %.3f is below threshold %.3f\n",
                         outcome.seeds[best].best_eval, threshold);
            exit_code = 1;
        }
    });

    // ---------------------------------------------------------------- collect
    CLI::App* cmd_collect = app.add_subcommand("collect", "roll out a checkpoint into a demo file");
    cmd_collect->add_option("--ckpt", ckpt_path, "policy checkpoint")->required();
    cmd_collect->add_option("--env", env, "environment id")->required();
    cmd_collect->add_option("--n", n_episodes, "trajectories to keep")->check(CLI::PositiveNumber);
    cmd_collect->add_option("--seed", seed, "rollout seed");
    cmd_collect->add_option("--min-return", min_return, "discard trajectories below this return");
    cmd_collect->add_option("--out", out_path, "demo file to write")->required();
    cmd_collect->callback([&] {
        const qil::vqc::VqcPolicy policy = qil::vqc::VqcPolicy::load(ckpt_path);
        const qil::demos::DemoDataset ds = qil::expert::collect_demos(
            policy, env, n_episodes, seed, min_return, qil::kernels::default_mode());
        qil::demos::write_demos(out_path, ds);
        std::printf("wrote %zu trajectories (%zu pairs, return %.3f +/- %.3f) to %s\n",
                    ds.trajectories.size(), ds.n_pairs(), ds.mean_return, ds.std_return,
                    out_path.c_str());
    });

    // ------------------------------------------------------------- qbc/qgail
    CLI::App* cmd_qbc = app.add_subcommand("qbc", "behavioral cloning from demos");
    CLI::App* cmd_qgail = app.add_subcommand("qgail", "adversarial imitation from demos");
    for (CLI::App* sub : {cmd_qbc, cmd_qgail}) {
        add_training_options(sub, sub == cmd_qgail);
        sub->add_option("--demos", demos_path, "demo file")->required();
    }
    const auto run_imitation = [&](const std::string& algo) {
        qil::config::RunConfig cfg = load_run_config(env, algo, config_path);
        apply_training_overrides(cfg);
        const qil::demos::DemoDataset ds = qil::demos::read_demos(demos_path);
        const std::string dir = pick_out_dir(out_dir, algo + "-" + env_slug(cfg.env_id));
        exit_code = report_outcome(qil::runner::run_training(cfg, &ds, dir, jobs));
    };
    cmd_qbc->callback([&] { run_imitation("qbc"); });
    cmd_qgail->callback([&] { run_imitation("qgail"); });

    // ------------------------------------------------------------------ eval
    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint");
    cmd_eval->add_option("--ckpt", ckpt_path, "policy checkpoint")->required();
    cmd_eval->add_option("--env", env, "environment id")->required();
    cmd_eval->add_option("--episodes", eval_episodes, "episodes")->check(CLI::PositiveNumber);
    cmd_eval->add_option("--seed", seed, "evaluation seed");
    cmd_eval->callback([&] {
        const qil::vqc::VqcPolicy policy = qil::vqc::VqcPolicy::load(ckpt_path);
        const qil::kernels::EvalStats stats =
            qil::kernels::evaluate_policy(env, qil::kernels::policy_actor(policy), eval_episodes,
                                          seed, qil::kernels::default_mode());
        std::printf("return %.3f +/- %.3f over %d episodes (%lld env steps)\n", stats.mean,
                    stats.stddev, eval_episodes, stats.env_steps);
    });

    // --------------------------------------------------------- verify-bounds
    CLI::App* cmd_verify = app.add_subcommand(
        "verify-bounds", "exact tabular audit of the imitation-gap inequalities");
    cmd_verify->add_option("--instances", instances, "random MDPs")->check(CLI::PositiveNumber);
    cmd_verify->add_option("--seed", seed, "instance seed");
    cmd_verify->add_option("--max-states", max_states)->check(CLI::Range(2, 64));
    cmd_verify->add_option("--max-actions", max_actions)->check(CLI::Range(2, 16));
    cmd_verify->add_option("--report", report_path, "write a JSON report with per-instance slacks");
    cmd_verify->callback([&] {
        qil::theory::VerifyConfig vcfg;
        vcfg.instances = instances;
        vcfg.seed = seed;
        vcfg.max_states = max_states;
        vcfg.max_actions = max_actions;
        const qil::theory::VerifySummary summary = qil::theory::verify_bounds(vcfg);
        std::printf("%zu reports over %d MDPs: min slack %.3e, %d violations\n",
                    summary.results.size(), instances, summary.min_slack, summary.violations);
        if (!report_path.empty()) {
            nlohmann::ordered_json j;
            j["instances"] = instances;
            j["seed"] = seed;
            j["min_slack"] = summary.min_slack;
            j["violations"] = summary.violations;
            j["results"] = nlohmann::ordered_json::array();
            for (const qil::theory::InstanceResult& r : summary.results) {
                nlohmann::ordered_json jr;
                jr["mdp_index"] = r.mdp_index;
                jr["gamma"] = r.gamma;
                jr["beta"] = r.beta;
                jr["epsilon"] = r.epsilon;
                jr["adversarial"] = r.adversarial;
                jr["j_expert"] = r.report.j_expert;
                jr["j_theta"] = r.report.j_theta;
                jr["delta"] = r.report.delta;
                jr["checks"] = nlohmann::ordered_json::array();
                for (const qil::theory::BoundCheck& c : r.report.checks)
                    jr["checks"].push_back({{"name", c.name},
                                            {"lhs", c.lhs},
                                            {"rhs", c.rhs},
                                            {"slack", c.slack()}});
                j["results"].push_back(std::move(jr));
            }
            std::ofstream out(report_path);
            if (!out) throw std::runtime_error("cannot write " + report_path);
            out << j.dump(2) << '\n';
            std::printf("report: %s\n", report_path.c_str());
        }
        if (summary.violations > 0) exit_code = 1;
    });

    // ---------------------------------------------------------------- ablate
    CLI::App* cmd_ablate = app.add_subcommand("ablate", "run a scripted ablation suite");
    cmd_ablate
        ->add_option("suite", suite,
                     "demo-count | scaling | layers | beta | spectral-norm | quantum-disc")
        ->required();
    add_training_options(cmd_ablate, true);
    cmd_ablate->add_option("--demos", demos_path, "demo file")->required();
    cmd_ablate->add_option("--algorithm", algorithm, "qbc or qgail (default: suite-dependent)");
    cmd_ablate->callback([&] {
        std::string algo = algorithm;
        if (algo.empty())
            algo = (suite == "spectral-norm" || suite == "quantum-disc") ? "qgail" : "qbc";
        if (algo != "qbc" && algo != "qgail")
            throw ConfigError("ablate: algorithm must be qbc or qgail, got \"" + algo + "\"");
        qil::config::RunConfig cfg = load_run_config(env, algo, config_path);
        apply_training_overrides(cfg);
        const qil::demos::DemoDataset ds = qil::demos::read_demos(demos_path);
        const std::string dir =
            pick_out_dir(out_dir, "ablate-" + suite + "-" + env_slug(cfg.env_id));
        const qil::runner::AblationOutcome outcome =
            qil::runner::run_ablation(suite, cfg, ds, dir, jobs);
        for (std::size_t i = 0; i < outcome.labels.size(); ++i)
            std::printf("%-24s %s\n", outcome.labels[i].c_str(),
                        outcome.runs[i].ok ? "ok" : "FAILED");
        std::printf("artifacts: %s\n", outcome.dir.c_str());
        if (!outcome.ok) exit_code = 1;
    });

    // ------------------------------------------------------------------ plot
    CLI::App* cmd_plot = app.add_subcommand("plot", "re-render a run's SVG from its curve.csv");
    cmd_plot->add_option("--run", run_dir, "run directory or curve.csv path")->required();
    cmd_plot->add_option("--out", out_path, "SVG path (default: plot.svg next to the CSV)");
    cmd_plot->add_option("--title", title, "plot title");
    cmd_plot->callback([&] {
        const std::string csv_path =
            fs::is_directory(run_dir) ? run_dir + "/curve.csv" : run_dir;
        const Csv csv = read_csv(csv_path);
        if (csv.header.size() < 2) throw ConfigError(csv_path + ": need at least two columns");
        std::size_t y_col = 1, band_col = 0;
        for (std::size_t i = 0; i < csv.header.size(); ++i) {
            if (csv.header[i] == "eval_return_mean") y_col = i;
            if (csv.header[i] == "eval_return_std") band_col = i;
        }
        qil::runner::PlotSeries series;
        series.label = csv.header[y_col];
        for (const std::vector<double>& row : csv.rows) {
            series.x.push_back(row[0]);
            series.y.push_back(row[y_col]);
            if (band_col) series.band.push_back(row[band_col]);
        }
        const std::string svg_path =
            !out_path.empty() ? out_path
                              : fs::path(csv_path).parent_path().string() + "/plot.svg";
        qil::runner::write_svg_plot(svg_path, !title.empty() ? title : csv_path, csv.header[0],
                                    csv.header[y_col], {series});
        std::printf("wrote %s\n", svg_path.c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code;
}
