#pragma once

// Artifact plumbing shared by the CLI subcommands: timestamped run
// directories under $QIL_RUN_DIR (default ./runs), resolved-config
// snapshots, per-seed and aggregated curve CSVs, standalone SVG learning
// curves, and the scripted ablation suites. Seeds run concurrently up to a
// --jobs limit; a fixed config plus seed list regenerates byte-identical
// CSV artifacts.

#include <cstdint>
#include <string>
#include <vector>

#include "qil/config.hpp"
#include "qil/demos.hpp"

namespace qil::runner {

std::string run_root();  // $QIL_RUN_DIR or "runs"

// root/<name>-<UTC timestamp>[-k], created (parents too).
std::string make_run_dir(const std::string& root, const std::string& name);

void write_text_file(const std::string& path, const std::string& content);

// rows are printed with %.17g so reruns are byte-identical.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> band;  // optional +/- band, same length as y
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

struct SeedArtifacts {
    std::uint64_t seed = 0;
    bool trained = false;  // false when the seed pipeline threw
    std::string error;
    double final_eval = 0;
    double best_eval = 0;
    bool reached_target = false;
    std::vector<double> eval_iters;  // evaluation points, iteration axis
    std::vector<double> eval_mean;
    std::vector<double> eval_std;
};

struct RunOutcome {
    std::string dir;
    std::vector<SeedArtifacts> seeds;
    bool ok = false;  // every seed trained without error
};

// Train cfg.algorithm over all cfg.seeds (at most `jobs` at once), writing
//   <dir>/config.toml             resolved snapshot
//   <dir>/seed-<s>/curve.csv      per-seed learning curve
//   <dir>/seed-<s>/best.json, final.json
//   <dir>/curve.csv               aggregate across seeds at shared eval points
//   <dir>/plot.svg                mean +/- std band
//   <dir>/summary.txt
// `demo_set` is ignored for the expert algorithm.
RunOutcome run_training(const config::RunConfig& cfg, const demos::DemoDataset* demo_set,
                        const std::string& dir, int jobs);

struct AblationVariant {
    std::string label;
    config::RunConfig cfg;
    int n_demo_trajectories = 0;  // 0: use the full provided dataset
};

// The scripted grids. Throws ConfigError for an unknown suite name.
std::vector<AblationVariant> ablation_variants(const std::string& suite,
                                               const config::RunConfig& base);

struct AblationOutcome {
    std::string dir;
    std::vector<std::string> labels;
    std::vector<RunOutcome> runs;
    bool ok = false;
};

AblationOutcome run_ablation(const std::string& suite, const config::RunConfig& base,
                             const demos::DemoDataset& demo_set, const std::string& dir, int jobs);

}  // namespace qil::runner
