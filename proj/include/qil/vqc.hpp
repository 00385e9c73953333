#pragma once

// Data re-uploading variational circuits and the policies built on them.
//
// Circuit layout, for L layers on n qubits (one qubit per state dimension):
//   layer l:  RY(phi[l,q,0]) RZ(phi[l,q,1]) on every qubit
//             ring of CNOTs (0,1), (1,2), ..., (n-1,0)
//             RY(lambda[l,q] * s_q) on every qubit   (the "upload")
//   then a final variational sub-layer RY/RZ closes the circuit,
// so phi has (L+1)*n*2 entries and lambda has L*n.
//
// A softmax policy reads one observable per action, scales each observable's
// terms by trainable weights nu, and applies a softmax at inverse temperature
// beta. A Gaussian policy uses the nu-scaled expectations as the mean of an
// isotropic normal with trainable log-sigma.
//
// Gradients come in two interchangeable backends: exact adjoint-mode
// differentiation (default; one backward sweep per observable) and the
// parameter-shift rule, which evaluates the circuit at angle +/- pi/2 per
// parameter. Both are exact for this gate set and must agree to near machine
// precision; tests enforce that.

#include <array>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qil/qsim.hpp"

namespace qil::vqc {

enum class Entangler { RingCnot, RingCz };

struct CircuitArchitecture {
    int n_qubits = 0;
    int n_layers = 0;
    Entangler entangler = Entangler::RingCnot;
    std::vector<qsim::PauliObservable> observables;  // one per action (or action dim)

    int n_actions() const { return static_cast<int>(observables.size()); }
    int n_lambda() const { return n_layers * n_qubits; }
    int n_phi() const { return (n_layers + 1) * n_qubits * 2; }

    void validate() const;  // throws ConfigError on nonsense
};

struct EncodingSpec {
    std::vector<double> state_bounds;  // divide observations element-wise
    bool clamp = true;                 // clamp encoding angles to [-pi, pi]
};

struct PolicyParameters {
    std::vector<double> lambda;           // [layer * n_qubits + qubit]
    std::vector<double> phi;              // [sublayer * 2n + 2*qubit + rot], rot 0=RY 1=RZ
    std::vector<std::vector<double>> nu;  // [action][term]
    double log_sigma = 0.0;               // Gaussian policies only
    double beta = 1.0;                    // softmax inverse temperature (fixed, not trained)

    // phi ~ Uniform[0, 2pi), lambda = 1, nu = 1, sigma = 0.5.
    static PolicyParameters init(const CircuitArchitecture& arch, std::mt19937_64& rng);
};

// Flat parameter order: [lambda | phi | nu (action-major) | log_sigma if Gaussian].
struct ParamLayout {
    int n_qubits = 0;
    int n_lambda = 0;
    int n_phi = 0;
    int n_nu = 0;
    std::vector<int> nu_offsets;  // per action, relative to the nu block
    bool has_sigma = false;

    int lambda_index(int layer, int qubit) const { return layer * n_qubits + qubit; }
    int phi_index(int sublayer, int qubit, int rot) const {
        return n_lambda + sublayer * 2 * n_qubits + 2 * qubit + rot;
    }
    int nu_index(int action, int term) const {
        return n_lambda + n_phi + nu_offsets[action] + term;
    }
    int sigma_index() const { return n_lambda + n_phi + n_nu; }
    int total() const { return n_lambda + n_phi + n_nu + (has_sigma ? 1 : 0); }
};

// Encoding angles for one layer: lambda_layer * (observation / state_bounds),
// clamped to [-pi, pi] when spec.clamp is set.
std::vector<double> encode(std::span<const double> observation, const EncodingSpec& spec,
                           std::span<const double> lambda_layer);

// observation / state_bounds (no clamping; clamping applies to angles).
std::vector<double> normalize_observation(std::span<const double> observation,
                                          const EncodingSpec& spec);

struct ActionDistribution {
    bool gaussian = false;
    std::vector<double> probs;      // softmax
    std::vector<double> log_probs;  // softmax
    std::vector<double> mean;       // gaussian
    double sigma = 0.0;             // gaussian

    int n_actions() const { return static_cast<int>(gaussian ? mean.size() : probs.size()); }
    int sample(std::mt19937_64& rng) const;                      // discrete
    std::vector<double> sample_continuous(std::mt19937_64& rng) const;
    double log_prob(int action) const;
    double log_prob(std::span<const double> action) const;
    double entropy() const;
};

// Everything the circuit forward pass produces for one observation.
struct CircuitEval {
    std::vector<std::vector<double>> term_exps;  // [action][term]: coeff * <Pauli string>
    std::vector<double> raw_values;              // per action, nu NOT applied
    std::vector<double> scaled_values;           // per action, nu applied
};

enum class GradBackend { Adjoint, ParameterShift };

struct LogProbGrad {
    double log_prob = 0.0;
    std::vector<double> grad;  // flat ParamLayout order
};

struct ExpectationGrad {
    double value = 0.0;
    std::vector<double> d_mu;  // d<O>/d(lambda|phi), size n_lambda + n_phi
};

struct VqcPolicy {
    CircuitArchitecture arch;
    EncodingSpec enc;
    PolicyParameters params;
    bool gaussian = false;

    ParamLayout layout() const;
    std::vector<double> normalize(std::span<const double> observation) const {
        return normalize_observation(observation, enc);
    }

    // Forward passes. All take a normalized observation of size n_qubits.
    CircuitEval evaluate(std::span<const double> s_norm) const;
    ActionDistribution distribution(std::span<const double> s_norm) const;
    ActionDistribution distribution_from(const CircuitEval& eval) const;

    // d log pi(a|s) / d theta for every trainable parameter (Lemma-style
    // softmax score: beta * (grad<O_a> - sum_a' pi(a') grad<O_a'>)).
    LogProbGrad log_prob_gradient(std::span<const double> s_norm, int action,
                                  GradBackend backend = GradBackend::Adjoint) const;
    LogProbGrad log_prob_gradient(std::span<const double> s_norm, std::span<const double> action,
                                  GradBackend backend = GradBackend::Adjoint) const;

    // d<O_a>/d(lambda,phi) for the raw (nu-free) observable `action`.
    ExpectationGrad expectation_gradient(std::span<const double> s_norm, int action,
                                         GradBackend backend = GradBackend::Adjoint) const;

    // theta <- theta + scale * (per-group learning rate) * grad.
    // lrs = {lr_lambda, lr_phi, lr_nu}; lr_sigma applies to log_sigma.
    void apply_update(std::span<const double> flat_grad, const std::array<double, 3>& lrs,
                      double lr_sigma, double scale);

    nlohmann::ordered_json to_json() const;
    static VqcPolicy from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static VqcPolicy load(const std::string& path);
};

// Spec'd free-function views of the policy ops.
std::vector<double> build_and_run(const PolicyParameters& params, const CircuitArchitecture& arch,
                                  const EncodingSpec& enc, std::span<const double> s_norm);
ActionDistribution softmax_policy(const std::vector<std::vector<double>>& term_exps,
                                  const std::vector<std::vector<double>>& nu, double beta);
ActionDistribution gaussian_policy(const std::vector<std::vector<double>>& term_exps,
                                   const std::vector<std::vector<double>>& nu, double sigma);

// Weighted merge of nu-scaled observables into one (used to fold a full
// softmax score into a single adjoint sweep). Weightless terms are dropped.
qsim::PauliObservable merge_scaled_observables(const CircuitArchitecture& arch,
                                               const std::vector<std::vector<double>>& nu,
                                               std::span<const double> weights);

// Low-level circuit interface, exposed for tests and the simulator oracle.
struct CompiledGate {
    qsim::Gate gate;
    int ptype = 0;     // 0 none, 1 phi, 2 lambda
    int pindex = 0;    // index into the combined (lambda|phi) gradient block
    double chain = 0;  // d(angle)/d(parameter); 0 when the clamp is active
};

std::vector<CompiledGate> compile_circuit(const PolicyParameters& params,
                                          const CircuitArchitecture& arch, const EncodingSpec& enc,
                                          std::span<const double> s_norm);
qsim::Statevector run_compiled(const std::vector<CompiledGate>& gates, int n_qubits);

// Exact gradient of <obs> w.r.t. (lambda, phi) for a compiled circuit.
ExpectationGrad adjoint_gradient(const std::vector<CompiledGate>& gates, int n_qubits,
                                 const qsim::PauliObservable& obs);
ExpectationGrad shift_gradient(const std::vector<CompiledGate>& gates, int n_qubits,
                               const qsim::PauliObservable& obs);

}  // namespace qil::vqc
