// Times the serial reference kernels against the OpenMP path on the
// training-loop hot spots, and the adjoint gradient against parameter
// shift. The serial/OpenMP pairs must agree bit-for-bit; the max |diff|
// column makes that visible.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qil/kernels.hpp"
#include "qil/rng.hpp"
#include "qil/vqc.hpp"

using Clock = std::chrono::steady_clock;
using qil::kernels::Mode;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel benchmark"};
    int n_qubits = 4, n_layers = 4, n_samples = 2000, repeats = 3;
    app.add_option("--qubits", n_qubits)->check(CLI::Range(1, 12));
    app.add_option("--layers", n_layers)->check(CLI::Range(1, 8));
    app.add_option("--samples", n_samples)->check(CLI::PositiveNumber);
    app.add_option("--repeats", repeats)->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    qil::vqc::CircuitArchitecture arch;
    arch.n_qubits = n_qubits;
    arch.n_layers = n_layers;
    arch.observables = {qil::qsim::PauliObservable::parse("Z0"),
                        qil::qsim::PauliObservable::parse(n_qubits > 1 ? "Z0Z1" : "Z0")};
    qil::vqc::EncodingSpec enc;
    enc.state_bounds.assign(n_qubits, 1.0);
    std::mt19937_64 rng = qil::make_rng(7);
    qil::vqc::VqcPolicy policy{arch, enc, qil::vqc::PolicyParameters::init(arch, rng), false};

    std::vector<std::vector<double>> states(n_samples);
    std::vector<const std::vector<double>*> state_ptrs(n_samples);
    std::vector<int> actions(n_samples);
    std::vector<double> weights(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        states[i].resize(n_qubits);
        for (int q = 0; q < n_qubits; ++q) states[i][q] = qil::uniform(rng, -1.0, 1.0);
        state_ptrs[i] = &states[i];
        actions[i] = static_cast<int>(rng() % 2);
        weights[i] = qil::uniform(rng, -1.0, 1.0);
    }

#ifdef _OPENMP
    std::printf("OpenMP enabled, %d max threads\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run the serial path\n");
#endif
    std::printf("%d qubits, %d layers, %d samples, best of %d\n\n", n_qubits, n_layers, n_samples,
                repeats);
    std::printf("%-22s %12s %12s %9s %11s\n", "kernel", "serial ms", "openmp ms", "speedup",
                "max |diff|");

    const auto bench = [&](const char* name, auto&& run) {
        double best_serial = 1e300, best_omp = 1e300;
        std::vector<double> out_serial, out_omp;
        for (int r = 0; r < repeats; ++r) {
            Clock::time_point t0 = Clock::now();
            out_serial = run(Mode::Serial);
            best_serial = std::min(best_serial, ms_since(t0));
            t0 = Clock::now();
            out_omp = run(Mode::OpenMp);
            best_omp = std::min(best_omp, ms_since(t0));
        }
        std::printf("%-22s %12.2f %12.2f %8.2fx %11.3g\n", name, best_serial, best_omp,
                    best_serial / best_omp, max_abs_diff(out_serial, out_omp));
    };

    bench("nll_batch", [&](Mode m) {
        qil::kernels::NllResult r = qil::kernels::nll_batch(policy, state_ptrs, actions, m);
        r.grad.push_back(r.loss);
        return r.grad;
    });
    bench("weighted_score_sum", [&](Mode m) {
        return qil::kernels::weighted_score_sum(policy, state_ptrs, actions, weights, m);
    });
    bench("mean_entropy", [&](Mode m) {
        return std::vector<double>{qil::kernels::mean_entropy(policy, state_ptrs, m)};
    });

    // Gradient backends on a single sample, amortized over the batch.
    const auto grad_bench = [&](const char* name, qil::vqc::GradBackend backend) {
        Clock::time_point t0 = Clock::now();
        std::vector<double> sink(policy.layout().total(), 0.0);
        for (int i = 0; i < n_samples; ++i) {
            const qil::vqc::LogProbGrad g =
                policy.log_prob_gradient(states[i], actions[i], backend);
            for (std::size_t j = 0; j < sink.size(); ++j) sink[j] += g.grad[j];
        }
        std::printf("%-22s %12.2f ms total, %.3f ms/sample\n", name, ms_since(t0),
                    ms_since(t0) / n_samples);
        return sink;
    };
    std::printf("\ngradient backends (serial, %d samples):\n", n_samples);
    const std::vector<double> g_adj = grad_bench("adjoint", qil::vqc::GradBackend::Adjoint);
    const std::vector<double> g_ps = grad_bench("parameter-shift", qil::vqc::GradBackend::ParameterShift);
    std::printf("backend max |diff|: %.3g\n", max_abs_diff(g_adj, g_ps));
    return 0;
}
