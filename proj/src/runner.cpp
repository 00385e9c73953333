#include "qil/runner.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <thread>

#include "qil/errors.hpp"
#include "qil/expert.hpp"
#include "qil/qbc.hpp"
#include "qil/qgail.hpp"

namespace qil::runner {

namespace fs = std::filesystem;

std::string run_root() {
    const char* env = std::getenv("QIL_RUN_DIR");
    return env && *env ? std::string(env) : std::string("runs");
}

std::string make_run_dir(const std::string& root, const std::string& name) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    const std::string base = root + "/" + name + "-" + stamp;
    std::string dir = base;
    for (int k = 2; fs::exists(dir); ++k) dir = base + "-" + std::to_string(k);
    fs::create_directories(dir);
    return dir;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

namespace {

std::string format_cell(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_cell(row[i]);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

// -------------------------------------------------------------------- SVG

namespace {

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

double nice_step(double span, int target_ticks) {
    if (span <= 0) return 1;
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm < 1.5) return mag;
    if (norm < 3.5) return 2 * mag;
    if (norm < 7.5) return 5 * mag;
    return 10 * mag;
}

std::string format_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v + 0.0);  // +0.0 folds -0
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series) {
    constexpr double kW = 880, kH = 560, kL = 80, kR = 24, kT = 48, kB = 56;
    const double pw = kW - kL - kR, ph = kH - kT - kB;

    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool any = false;
    for (const PlotSeries& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double b = i < s.band.size() ? s.band[i] : 0.0;
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || !std::isfinite(b)) continue;
            if (!any) {
                x_lo = x_hi = s.x[i];
                y_lo = s.y[i] - b;
                y_hi = s.y[i] + b;
                any = true;
            } else {
                x_lo = std::min(x_lo, s.x[i]);
                x_hi = std::max(x_hi, s.x[i]);
                y_lo = std::min(y_lo, s.y[i] - b);
                y_hi = std::max(y_hi, s.y[i] + b);
            }
        }
    }
    if (x_hi - x_lo < 1e-12) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if (y_hi - y_lo < 1e-12) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    const double y_pad = 0.05 * (y_hi - y_lo);
    y_lo -= y_pad;
    y_hi += y_pad;

    const auto px = [&](double x) { return kL + (x - x_lo) / (x_hi - x_lo) * pw; };
    const auto py = [&](double y) { return kT + (y_hi - y) / (y_hi - y_lo) * ph; };
    const auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kW) + "\" height=\"" +
           fmt(kH) + "\" viewBox=\"0 0 " + fmt(kW) + " " + fmt(kH) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(kW / 2) + "\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" "
           "text-anchor=\"middle\">" + escape_xml(title) + "</text>\n";

    // Grid and ticks.
    const double xs = nice_step(x_hi - x_lo, 6), ys = nice_step(y_hi - y_lo, 6);
    for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-9 * xs; t += xs) {
        svg += "<line x1=\"" + fmt(px(t)) + "\" y1=\"" + fmt(kT) + "\" x2=\"" + fmt(px(t)) +
               "\" y2=\"" + fmt(kT + ph) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt(px(t)) + "\" y=\"" + fmt(kT + ph + 20) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
               format_tick(t) + "</text>\n";
    }
    for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-9 * ys; t += ys) {
        svg += "<line x1=\"" + fmt(kL) + "\" y1=\"" + fmt(py(t)) + "\" x2=\"" + fmt(kL + pw) +
               "\" y2=\"" + fmt(py(t)) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt(kL - 8) + "\" y=\"" + fmt(py(t) + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
               format_tick(t) + "</text>\n";
    }
    svg += "<rect x=\"" + fmt(kL) + "\" y=\"" + fmt(kT) + "\" width=\"" + fmt(pw) +
           "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#404040\"/>\n";
    svg += "<text x=\"" + fmt(kL + pw / 2) + "\" y=\"" + fmt(kH - 12) +
           "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" +
           escape_xml(x_label) + "</text>\n";
    svg += "<text x=\"20\" y=\"" + fmt(kT + ph / 2) +
           "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 20 " + fmt(kT + ph / 2) + ")\">" + escape_xml(y_label) +
           "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const PlotSeries& s = series[k];
        const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
        if (s.band.size() == s.y.size() && !s.y.empty()) {
            std::string pts;
            for (std::size_t i = 0; i < s.x.size(); ++i)
                pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i] + s.band[i])) + " ";
            for (std::size_t i = s.x.size(); i-- > 0;)
                pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i] - s.band[i])) + " ";
            svg += "<polygon points=\"" + pts + "\" fill=\"" + color +
                   "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
        }
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i])) + " ";
        svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        // Legend entry.
        const double ly = kT + 16 + 18 * static_cast<double>(k);
        svg += "<line x1=\"" + fmt(kL + pw - 150) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
               fmt(kL + pw - 126) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(kL + pw - 120) + "\" y=\"" + fmt(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(s.label) +
               "</text>\n";
    }
    svg += "</svg>\n";
    write_text_file(path, svg);
}

// ---------------------------------------------------------------- training

namespace {

struct SeedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

SeedArtifacts run_one_seed(const config::RunConfig& cfg, const demos::DemoDataset* demo_set,
                           std::uint64_t seed, const std::string& seed_dir) {
    SeedArtifacts art;
    art.seed = seed;
    fs::create_directories(seed_dir);
    const vqc::VqcPolicy initial = config::make_policy(cfg, seed);
    SeedCsv csv;

    if (cfg.algorithm == "qbc") {
        if (!demo_set) throw ConfigError("qbc needs a demo dataset");
        const qbc::QbcResult res = qbc::qbc_train(*demo_set, config::make_qbc_config(cfg, seed),
                                                  initial);
        csv.header = {"iteration", "eval_return_mean", "eval_return_std", "loss"};
        double em = 0, es = 0;
        for (const qbc::QbcRecord& r : res.curve) {
            if (r.evaluated) {
                em = r.eval_mean;
                es = r.eval_std;
                art.eval_iters.push_back(r.iteration);
                art.eval_mean.push_back(r.eval_mean);
                art.eval_std.push_back(r.eval_std);
            }
            csv.rows.push_back({static_cast<double>(r.iteration), em, es, r.loss});
        }
        art.final_eval = res.curve.empty() ? 0 : em;
        art.best_eval = res.best_eval;
        art.reached_target = res.reached_target;
        res.best_policy.save(seed_dir + "/best.json");
        res.final_policy.save(seed_dir + "/final.json");
    } else if (cfg.algorithm == "qgail") {
        if (!demo_set) throw ConfigError("qgail needs a demo dataset");
        const qgail::QgailResult res =
            qgail::qgail_train(*demo_set, config::make_qgail_config(cfg, seed), initial);
        csv.header = {"iteration", "episodes",       "eval_return_mean", "eval_return_std",
                      "entropy",   "disc_objective", "mean_virtual_reward"};
        double em = 0, es = 0;
        for (const qgail::QgailRecord& r : res.curve) {
            if (r.evaluated) {
                em = r.eval_mean;
                es = r.eval_std;
                art.eval_iters.push_back(r.iteration);
                art.eval_mean.push_back(r.eval_mean);
                art.eval_std.push_back(r.eval_std);
            }
            csv.rows.push_back({static_cast<double>(r.iteration),
                                static_cast<double>(r.episodes), em, es, r.entropy,
                                r.disc_objective, r.mean_virtual_reward});
        }
        art.final_eval = res.curve.empty() ? 0 : em;
        art.best_eval = res.best_eval;
        art.reached_target = res.reached_target;
        res.best_policy.save(seed_dir + "/best.json");
        res.final_policy.save(seed_dir + "/final.json");
    } else if (cfg.algorithm == "expert") {
        const expert::ExpertResult res =
            expert::train_expert(config::make_expert_config(cfg, seed), initial);
        csv.header = {"iteration", "episodes", "eval_return_mean", "eval_return_std",
                      "mean_train_return"};
        double em = 0, es = 0;
        for (const expert::ExpertRecord& r : res.curve) {
            if (r.evaluated) {
                em = r.eval_mean;
                es = r.eval_std;
                art.eval_iters.push_back(r.iteration);
                art.eval_mean.push_back(r.eval_mean);
                art.eval_std.push_back(r.eval_std);
            }
            csv.rows.push_back({static_cast<double>(r.iteration),
                                static_cast<double>(r.episodes), em, es, r.mean_train_return});
        }
        art.final_eval = res.curve.empty() ? 0 : em;
        art.best_eval = res.best_eval;
        art.reached_target = res.reached_target;
        res.best_policy.save(seed_dir + "/best.json");
        res.final_policy.save(seed_dir + "/final.json");
    } else {
        throw ConfigError("run_training: algorithm \"" + cfg.algorithm + "\" is not trainable");
    }

    write_csv(seed_dir + "/curve.csv", csv.header, csv.rows);
    art.trained = true;
    return art;
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0;
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

RunOutcome run_training(const config::RunConfig& cfg, const demos::DemoDataset* demo_set,
                        const std::string& dir, int jobs) {
    if (cfg.seeds.empty()) throw ConfigError("run_training: config has no seeds");
    if (jobs < 1) jobs = 1;
    fs::create_directories(dir);
    write_text_file(dir + "/config.toml", config::serialize_toml(config::to_toml(cfg)));

    RunOutcome outcome;
    outcome.dir = dir;
    outcome.seeds.resize(cfg.seeds.size());

    for (std::size_t begin = 0; begin < cfg.seeds.size(); begin += jobs) {
        const std::size_t end = std::min(begin + static_cast<std::size_t>(jobs), cfg.seeds.size());
        std::vector<std::thread> pool;
        for (std::size_t i = begin; i < end; ++i) {
            pool.emplace_back([&, i] {
                const std::uint64_t seed = cfg.seeds[i];
                const std::string seed_dir = dir + "/seed-" + std::to_string(seed);
                try {
                    outcome.seeds[i] = run_one_seed(cfg, demo_set, seed, seed_dir);
                } catch (const std::exception& e) {
                    outcome.seeds[i].seed = seed;
                    outcome.seeds[i].trained = false;
                    outcome.seeds[i].error = e.what();
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }
    outcome.ok = true;
    for (const SeedArtifacts& a : outcome.seeds)
        if (!a.trained) outcome.ok = false;

    // Aggregate across seeds at every iteration where at least one seed
    // evaluated; eval_return_std is across seeds once more than one reports.
    std::vector<double> iters;
    for (const SeedArtifacts& a : outcome.seeds)
        for (double it : a.eval_iters)
            if (std::find(iters.begin(), iters.end(), it) == iters.end()) iters.push_back(it);
    std::sort(iters.begin(), iters.end());
    std::vector<std::vector<double>> agg_rows;
    PlotSeries band;
    band.label = cfg.algorithm + " (" + std::to_string(cfg.seeds.size()) + " seeds)";
    for (double it : iters) {
        std::vector<double> means, stds;
        for (const SeedArtifacts& a : outcome.seeds)
            for (std::size_t k = 0; k < a.eval_iters.size(); ++k)
                if (a.eval_iters[k] == it) {
                    means.push_back(a.eval_mean[k]);
                    stds.push_back(a.eval_std[k]);
                }
        const double m = mean_of(means);
        const double s = means.size() > 1 ? std_of(means) : (stds.empty() ? 0 : stds[0]);
        agg_rows.push_back({it, m, s, static_cast<double>(means.size())});
        band.x.push_back(it);
        band.y.push_back(m);
        band.band.push_back(s);
    }
    write_csv(dir + "/curve.csv", {"iteration", "eval_return_mean", "eval_return_std", "n_seeds"},
              agg_rows);
    write_svg_plot(dir + "/plot.svg", cfg.algorithm + " on " + cfg.env_id, "iteration",
                   "evaluation return", {band});

    std::string summary;
    for (const SeedArtifacts& a : outcome.seeds) {
        summary += "seed " + std::to_string(a.seed) + ": ";
        if (!a.trained) {
            summary += "FAILED (" + a.error + ")\n";
        } else {
            char buf[160];
            std::snprintf(buf, sizeof buf, "final %.3f best %.3f target_reached %s\n",
                          a.final_eval, a.best_eval, a.reached_target ? "yes" : "no");
            summary += buf;
        }
    }
    write_text_file(dir + "/summary.txt", summary);
    return outcome;
}

// ---------------------------------------------------------------- ablation

namespace {

std::string algo_display(const std::string& algorithm) {
    if (algorithm == "qbc") return "Q-BC";
    if (algorithm == "qgail") return "Q-GAIL";
    return algorithm;
}

std::string sanitize(const std::string& label) {
    std::string out;
    for (char c : label)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    return out;
}

}  // namespace

std::vector<AblationVariant> ablation_variants(const std::string& suite,
                                               const config::RunConfig& base) {
    std::vector<AblationVariant> out;
    const std::string name = algo_display(base.algorithm);
    if (suite == "demo-count") {
        for (int n : {1, 5, 10, 50, 100}) {
            AblationVariant v{name + "-" + std::to_string(n) + "-demos", base, n};
            out.push_back(std::move(v));
        }
    } else if (suite == "scaling") {
        out.push_back({name, base, 0});
        AblationVariant no_lambda{name + "/(lambda)", base, 0};
        no_lambda.cfg.train_lambda = false;
        out.push_back(std::move(no_lambda));
        AblationVariant no_nu{name + "/(nu)", base, 0};
        no_nu.cfg.train_nu = false;
        out.push_back(std::move(no_nu));
    } else if (suite == "layers") {
        std::vector<int> layer_counts{1, std::max(1, base.n_layers / 2), base.n_layers};
        std::sort(layer_counts.begin(), layer_counts.end());
        layer_counts.erase(std::unique(layer_counts.begin(), layer_counts.end()),
                           layer_counts.end());
        for (int l : layer_counts) {
            AblationVariant v{name + "-" + std::to_string(l) + "-layers", base, 0};
            v.cfg.n_layers = l;
            out.push_back(std::move(v));
        }
    } else if (suite == "beta") {
        for (double b : {0.5, 1.0, 1.2}) {
            char label[48];
            std::snprintf(label, sizeof label, "%s-beta-%.1f", name.c_str(), b);
            AblationVariant v{label, base, 0};
            v.cfg.beta = b;
            out.push_back(std::move(v));
        }
    } else if (suite == "spectral-norm") {
        if (base.algorithm != "qgail")
            throw ConfigError("ablate spectral-norm: only meaningful for qgail");
        out.push_back({name, base, 0});
        AblationVariant off{name + "/SN", base, 0};
        off.cfg.spectral_norm = false;
        out.push_back(std::move(off));
    } else if (suite == "quantum-disc") {
        if (base.algorithm != "qgail")
            throw ConfigError("ablate quantum-disc: only meaningful for qgail");
        out.push_back({name, base, 0});
        AblationVariant quantum{name + "_QuantumDis", base, 0};
        quantum.cfg.quantum_disc = true;
        out.push_back(std::move(quantum));
    } else {
        throw ConfigError("unknown ablation suite \"" + suite +
                          "\" (want demo-count, scaling, layers, beta, spectral-norm or "
                          "quantum-disc)");
    }
    return out;
}

AblationOutcome run_ablation(const std::string& suite, const config::RunConfig& base,
                             const demos::DemoDataset& demo_set, const std::string& dir,
                             int jobs) {
    const std::vector<AblationVariant> variants = ablation_variants(suite, base);
    fs::create_directories(dir);
    AblationOutcome outcome;
    outcome.dir = dir;
    outcome.ok = true;

    std::vector<PlotSeries> series;
    std::vector<std::vector<double>> table_rows;
    std::string table_labels;
    for (const AblationVariant& v : variants) {
        demos::DemoDataset subset = demo_set;
        if (v.n_demo_trajectories > 0) {
            if (static_cast<std::size_t>(v.n_demo_trajectories) > demo_set.trajectories.size())
                throw ConfigError("ablate: dataset has only " +
                                  std::to_string(demo_set.trajectories.size()) +
                                  " trajectories, variant wants " +
                                  std::to_string(v.n_demo_trajectories));
            subset = demo_set.subset(static_cast<std::size_t>(v.n_demo_trajectories));
        }
        const RunOutcome run =
            run_training(v.cfg, &subset, dir + "/" + sanitize(v.label), jobs);
        if (!run.ok) outcome.ok = false;

        std::vector<double> finals, bests;
        for (const SeedArtifacts& a : run.seeds)
            if (a.trained) {
                finals.push_back(a.final_eval);
                bests.push_back(a.best_eval);
            }
        table_rows.push_back({static_cast<double>(table_rows.size()), mean_of(finals),
                              std_of(finals), bests.empty()
                                                  ? 0
                                                  : *std::max_element(bests.begin(), bests.end())});
        table_labels += std::to_string(table_rows.size() - 1) + " = " + v.label + "\n";

        // Aggregate curve for the comparison plot.
        PlotSeries s;
        s.label = v.label;
        std::vector<double> iters;
        for (const SeedArtifacts& a : run.seeds)
            for (double it : a.eval_iters)
                if (std::find(iters.begin(), iters.end(), it) == iters.end()) iters.push_back(it);
        std::sort(iters.begin(), iters.end());
        for (double it : iters) {
            std::vector<double> means;
            for (const SeedArtifacts& a : run.seeds)
                for (std::size_t k = 0; k < a.eval_iters.size(); ++k)
                    if (a.eval_iters[k] == it) means.push_back(a.eval_mean[k]);
            s.x.push_back(it);
            s.y.push_back(mean_of(means));
            s.band.push_back(std_of(means));
        }
        series.push_back(std::move(s));
        outcome.labels.push_back(v.label);
        outcome.runs.push_back(run);
    }

    write_csv(dir + "/comparison.csv",
              {"variant", "final_eval_mean", "final_eval_std", "best_eval"}, table_rows);
    write_text_file(dir + "/variants.txt", table_labels);
    write_svg_plot(dir + "/comparison.svg", suite + " ablation on " + base.env_id, "iteration",
                   "evaluation return", series);
    return outcome;
}

}  // namespace qil::runner
