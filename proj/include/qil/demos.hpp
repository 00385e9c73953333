#pragma once

// Demonstration datasets and their JSON Lines on-disk format. One line per
// trajectory:
//   {"env_id": "...", "seed": 123, "states": [[...], ...],
//    "actions": [...], "returns": -97.0}
// states[i] is the observation the expert saw when it chose actions[i];
// "returns" is the episode's total true reward. Replaying the stored action
// sequence on the env reset with the stored seed reproduces that return
// exactly (episode randomness lives in the reset only).

#include <cstdint>
#include <string>
#include <vector>

#include "qil/envs.hpp"

namespace qil::demos {

struct DemoTrajectory {
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> states;
    std::vector<double> actions;
    double ret = 0;
};

struct DemoDataset {
    std::string env_id;
    std::string source;  // "trained_expert" or "external_file"
    std::vector<DemoTrajectory> trajectories;
    double mean_return = 0;
    double std_return = 0;

    std::size_t n_pairs() const;
    void recompute_stats();
    DemoDataset subset(std::size_t n_trajectories) const;  // first n
};

DemoDataset from_trajectories(const std::vector<envs::Trajectory>& trajs, const std::string& source);

void write_demos(const std::string& path, const DemoDataset& demos);
DemoDataset read_demos(const std::string& path);

// Re-run the stored action sequences and check every stored return matches.
// Returns the number of trajectories checked; throws on mismatch.
std::size_t verify_replay(const DemoDataset& demos, double tol = 1e-9);

}  // namespace qil::demos
