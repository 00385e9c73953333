#pragma once

// Batch kernels for the training loops. Every kernel has a serial reference
// path and an OpenMP path selected by Mode; both produce bit-identical
// results for any thread count because per-item contributions are
// accumulated chunk-by-chunk in a fixed order (parallelism only distributes
// chunks, never reorders the reduction). tools/bench_kernels.cpp compares
// the two paths' throughput.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qil/envs.hpp"
#include "qil/vqc.hpp"

namespace qil::kernels {

enum class Mode { Serial, OpenMp };

inline Mode default_mode() {
#ifdef _OPENMP
    return Mode::OpenMp;
#else
    return Mode::Serial;
#endif
}

inline constexpr std::size_t kChunk = 64;

// out[j] = sum over chunks (in order) of sum over items i in the chunk (in
// order) of item i's contribution. `accumulate(i, acc)` must add item i into
// acc[0..out_dim). The chunked order makes Serial and OpenMp bit-identical.
template <typename F>
std::vector<double> chunked_sum(std::size_t n_items, std::size_t out_dim, F&& accumulate,
                                Mode mode) {
    const std::size_t n_chunks = (n_items + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> partial(n_chunks);
    const bool parallel = (mode == Mode::OpenMp);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::size_t c = 0; c < n_chunks; ++c) {
        std::vector<double> acc(out_dim, 0.0);
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(begin + kChunk, n_items);
        for (std::size_t i = begin; i < end; ++i) accumulate(i, acc.data());
        partial[c] = std::move(acc);
    }
    std::vector<double> out(out_dim, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (std::size_t j = 0; j < out_dim; ++j) out[j] += partial[c][j];
    return out;
}

// Acting policy: maps a raw observation to an action (index for discrete
// envs, force for 1-D box envs), drawing from rng. Must be callable from
// multiple threads at once.
using ActFn = std::function<double(const std::vector<double>&, std::mt19937_64&)>;

ActFn policy_actor(const vqc::VqcPolicy& policy);

// n episodes, each seeded from (base_seed, episode index); deterministic
// for any mode/thread count.
std::vector<envs::Trajectory> collect_trajectories(const std::string& env_id, const ActFn& act,
                                                   int n_episodes, std::uint64_t base_seed,
                                                   Mode mode);

struct EvalStats {
    double mean = 0;
    double stddev = 0;
    long long env_steps = 0;
    std::vector<double> returns;
};

EvalStats evaluate_policy(const std::string& env_id, const ActFn& act, int episodes,
                          std::uint64_t seed, Mode mode);

// Mean NLL and its gradient over a batch; the behavioral-cloning inner loop.
struct NllResult {
    double loss = 0;
    std::vector<double> grad;  // flat ParamLayout order, d(mean NLL)/d theta
};

NllResult nll_batch(const vqc::VqcPolicy& policy,
                    const std::vector<const std::vector<double>*>& states_norm,
                    const std::vector<int>& actions, Mode mode);
NllResult nll_batch_gaussian(const vqc::VqcPolicy& policy,
                             const std::vector<const std::vector<double>*>& states_norm,
                             const std::vector<const std::vector<double>*>& actions, Mode mode);

// sum_i weights[i] * d log pi(a_i | s_i) / d theta. The REINFORCE core.
std::vector<double> weighted_score_sum(const vqc::VqcPolicy& policy,
                                       const std::vector<const std::vector<double>*>& states_norm,
                                       const std::vector<int>& actions,
                                       const std::vector<double>& weights, Mode mode);
std::vector<double> weighted_score_sum_gaussian(
    const vqc::VqcPolicy& policy, const std::vector<const std::vector<double>*>& states_norm,
    const std::vector<const std::vector<double>*>& actions, const std::vector<double>& weights,
    Mode mode);

// Mean policy entropy over a set of normalized states.
double mean_entropy(const vqc::VqcPolicy& policy,
                    const std::vector<const std::vector<double>*>& states_norm, Mode mode);

}  // namespace qil::kernels
