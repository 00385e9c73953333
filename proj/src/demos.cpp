#include "qil/demos.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "qil/errors.hpp"

namespace qil::demos {

std::size_t DemoDataset::n_pairs() const {
    std::size_t n = 0;
    for (const auto& tr : trajectories) n += tr.actions.size();
    return n;
}

void DemoDataset::recompute_stats() {
    mean_return = 0;
    std_return = 0;
    if (trajectories.empty()) return;
    for (const auto& tr : trajectories) mean_return += tr.ret;
    mean_return /= static_cast<double>(trajectories.size());
    double var = 0;
    for (const auto& tr : trajectories) var += (tr.ret - mean_return) * (tr.ret - mean_return);
    std_return = std::sqrt(var / static_cast<double>(trajectories.size()));
}

DemoDataset DemoDataset::subset(std::size_t n_trajectories) const {
    if (n_trajectories == 0 || n_trajectories > trajectories.size())
        throw std::invalid_argument("DemoDataset::subset: asked for " +
                                    std::to_string(n_trajectories) + " of " +
                                    std::to_string(trajectories.size()) + " trajectories");
    DemoDataset out;
    out.env_id = env_id;
    out.source = source;
    out.trajectories.assign(trajectories.begin(), trajectories.begin() + n_trajectories);
    out.recompute_stats();
    return out;
}

DemoDataset from_trajectories(const std::vector<envs::Trajectory>& trajs,
                              const std::string& source) {
    DemoDataset out;
    out.source = source;
    for (const auto& tr : trajs) {
        if (out.env_id.empty()) out.env_id = tr.env_id;
        if (tr.env_id != out.env_id)
            throw std::invalid_argument("from_trajectories: mixed env ids in one dataset");
        DemoTrajectory d;
        d.seed = tr.seed;
        d.ret = tr.total_return;
        d.states.reserve(tr.size());
        d.actions.reserve(tr.size());
        for (const auto& t : tr.transitions) {
            d.states.push_back(t.state);
            d.actions.push_back(t.action);
        }
        out.trajectories.push_back(std::move(d));
    }
    out.recompute_stats();
    return out;
}

void write_demos(const std::string& path, const DemoDataset& demos) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open demo file for writing: " + path);
    for (const auto& tr : demos.trajectories) {
        nlohmann::ordered_json j;
        j["env_id"] = demos.env_id;
        j["seed"] = tr.seed;
        j["states"] = tr.states;
        j["actions"] = tr.actions;
        j["returns"] = tr.ret;
        out << j.dump() << "\n";
    }
}

DemoDataset read_demos(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open demo file: " + path);
    DemoDataset out;
    out.source = "external_file";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw ConfigError("bad JSON on line " + std::to_string(line_no) + " of " + path + ": " +
                              e.what());
        }
        DemoTrajectory tr;
        const std::string env_id = j.at("env_id").get<std::string>();
        if (out.env_id.empty()) out.env_id = env_id;
        if (env_id != out.env_id)
            throw ConfigError("mixed env ids in " + path + " (line " + std::to_string(line_no) + ")");
        tr.seed = j.at("seed").get<std::uint64_t>();
        tr.states = j.at("states").get<std::vector<std::vector<double>>>();
        tr.actions = j.at("actions").get<std::vector<double>>();
        tr.ret = j.at("returns").get<double>();
        if (tr.states.size() != tr.actions.size())
            throw ConfigError("state/action length mismatch in " + path + " (line " +
                              std::to_string(line_no) + ")");
        out.trajectories.push_back(std::move(tr));
    }
    if (out.trajectories.empty()) throw ConfigError("no trajectories in " + path);
    out.recompute_stats();
    return out;
}

std::size_t verify_replay(const DemoDataset& demos, double tol) {
    for (std::size_t k = 0; k < demos.trajectories.size(); ++k) {
        const DemoTrajectory& tr = demos.trajectories[k];
        auto env = envs::make_env(demos.env_id);
        env->reset(tr.seed);
        double ret = 0;
        for (double a : tr.actions) {
            if (env->done())
                throw std::runtime_error("verify_replay: trajectory " + std::to_string(k) +
                                         " longer than episode");
            ret += env->step(a).true_reward;
        }
        if (std::abs(ret - tr.ret) > tol)
            throw std::runtime_error("verify_replay: trajectory " + std::to_string(k) +
                                     " return mismatch: stored " + std::to_string(tr.ret) +
                                     ", replayed " + std::to_string(ret));
    }
    return demos.trajectories.size();
}

}  // namespace qil::demos
