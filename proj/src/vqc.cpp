#include "qil/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

#include "qil/errors.hpp"
#include "qil/rng.hpp"

namespace qil::vqc {

using qsim::cplx;
using qsim::Gate;
using qsim::GateKind;
using qsim::PauliObservable;
using qsim::PauliTerm;
using qsim::Statevector;

void CircuitArchitecture::validate() const {
    if (n_qubits < 1 || n_qubits > qsim::kMaxQubits)
        throw ConfigError("architecture: qubit count " + std::to_string(n_qubits) + " out of range");
    if (n_layers < 1 || n_layers > 64)
        throw ConfigError("architecture: layer count " + std::to_string(n_layers) + " out of range");
    if (observables.empty()) throw ConfigError("architecture: needs at least one observable");
    for (const auto& o : observables) {
        if (o.terms.empty()) throw ConfigError("architecture: empty observable");
        if (o.max_qubit() >= n_qubits)
            throw ConfigError("architecture: observable " + o.to_string() + " exceeds " +
                              std::to_string(n_qubits) + " qubits");
    }
}

PolicyParameters PolicyParameters::init(const CircuitArchitecture& arch, std::mt19937_64& rng) {
    arch.validate();
    PolicyParameters p;
    p.lambda.assign(arch.n_lambda(), 1.0);
    p.phi.resize(arch.n_phi());
    for (double& v : p.phi) v = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    p.nu.resize(arch.observables.size());
    for (std::size_t a = 0; a < arch.observables.size(); ++a)
        p.nu[a].assign(arch.observables[a].terms.size(), 1.0);
    p.log_sigma = std::log(0.5);
    p.beta = 1.0;
    return p;
}

std::vector<double> normalize_observation(std::span<const double> observation,
                                          const EncodingSpec& spec) {
    if (observation.size() != spec.state_bounds.size())
        throw std::invalid_argument("normalize_observation: observation dim " +
                                    std::to_string(observation.size()) + " != bounds dim " +
                                    std::to_string(spec.state_bounds.size()));
    std::vector<double> out(observation.size());
    for (std::size_t i = 0; i < observation.size(); ++i) {
        if (!(spec.state_bounds[i] > 0.0))
            throw std::invalid_argument("normalize_observation: bounds must be positive");
        if (!std::isfinite(observation[i]))
            throw std::invalid_argument("normalize_observation: non-finite observation");
        out[i] = observation[i] / spec.state_bounds[i];
    }
    return out;
}

namespace {

inline double clamp_angle(double raw, bool clamp, double* chain, double d_raw) {
    if (clamp && raw > std::numbers::pi) {
        *chain = 0.0;
        return std::numbers::pi;
    }
    if (clamp && raw < -std::numbers::pi) {
        *chain = 0.0;
        return -std::numbers::pi;
    }
    *chain = d_raw;
    return raw;
}

}  // namespace

std::vector<double> encode(std::span<const double> observation, const EncodingSpec& spec,
                           std::span<const double> lambda_layer) {
    std::vector<double> norm = normalize_observation(observation, spec);
    if (lambda_layer.size() != norm.size())
        throw std::invalid_argument("encode: lambda size != observation size");
    std::vector<double> angles(norm.size());
    double chain;
    for (std::size_t i = 0; i < norm.size(); ++i)
        angles[i] = clamp_angle(lambda_layer[i] * norm[i], spec.clamp, &chain, norm[i]);
    return angles;
}

std::vector<CompiledGate> compile_circuit(const PolicyParameters& params,
                                          const CircuitArchitecture& arch, const EncodingSpec& enc,
                                          std::span<const double> s_norm) {
    const int n = arch.n_qubits;
    const int L = arch.n_layers;
    if (static_cast<int>(s_norm.size()) != n)
        throw std::invalid_argument("compile_circuit: observation dim " +
                                    std::to_string(s_norm.size()) + " != qubit count " +
                                    std::to_string(n));
    if (static_cast<int>(params.lambda.size()) != arch.n_lambda())
        throw std::invalid_argument("compile_circuit: lambda size mismatch");
    if (static_cast<int>(params.phi.size()) != arch.n_phi())
        throw std::invalid_argument("compile_circuit: phi size mismatch");
    for (double v : s_norm)
        if (!std::isfinite(v)) throw std::invalid_argument("compile_circuit: non-finite observation");

    const int n_lambda = arch.n_lambda();
    std::vector<CompiledGate> gates;
    gates.reserve(static_cast<std::size_t>(L) * (4 * n) + 2 * n);

    auto push_variational = [&](int sublayer) {
        for (int q = 0; q < n; ++q) {
            const int i_ry = sublayer * 2 * n + 2 * q;
            gates.push_back({Gate::ry(q, params.phi[i_ry]), 1, n_lambda + i_ry, 1.0});
            gates.push_back({Gate::rz(q, params.phi[i_ry + 1]), 1, n_lambda + i_ry + 1, 1.0});
        }
    };

    for (int l = 0; l < L; ++l) {
        push_variational(l);
        if (n >= 2) {
            for (int q = 0; q < n; ++q) {
                Gate g = (arch.entangler == Entangler::RingCnot) ? Gate::cnot(q, (q + 1) % n)
                                                                 : Gate::cz(q, (q + 1) % n);
                gates.push_back({g, 0, 0, 0.0});
            }
        }
        for (int q = 0; q < n; ++q) {
            const int idx = l * n + q;
            double chain;
            const double angle = clamp_angle(params.lambda[idx] * s_norm[q], enc.clamp, &chain,
                                             s_norm[q]);
            gates.push_back({Gate::ry(q, angle), 2, idx, chain});
        }
    }
    push_variational(L);
    return gates;
}

qsim::Statevector run_compiled(const std::vector<CompiledGate>& gates, int n_qubits) {
    Statevector s = qsim::zero_state(n_qubits);
    for (const CompiledGate& cg : gates) qsim::apply_gate(s, cg.gate);
    return s;
}

namespace {

// <bra| P_qubit |ket> without materializing P|ket>.
cplx pauli_bilinear(const Statevector& bra, const Statevector& ket, int qubit, char pauli) {
    const std::size_t mask = std::size_t{1} << (ket.n_qubits - 1 - qubit);
    const std::size_t dim = ket.dim();
    cplx total{0, 0};
    switch (pauli) {
        case 'X':
            for (std::size_t i = 0; i < dim; ++i) total += std::conj(bra.amps[i]) * ket.amps[i ^ mask];
            break;
        case 'Y':
            for (std::size_t i = 0; i < dim; ++i) {
                const cplx v = (i & mask) ? cplx{0, 1} * ket.amps[i & ~mask]
                                          : cplx{0, -1} * ket.amps[i | mask];
                total += std::conj(bra.amps[i]) * v;
            }
            break;
        case 'Z':
            for (std::size_t i = 0; i < dim; ++i) {
                const double sign = (i & mask) ? -1.0 : 1.0;
                total += sign * std::conj(bra.amps[i]) * ket.amps[i];
            }
            break;
        default:
            throw std::invalid_argument("pauli_bilinear: unknown Pauli");
    }
    return total;
}

char rotation_generator(GateKind k) {
    switch (k) {
        case GateKind::RX: return 'X';
        case GateKind::RY: return 'Y';
        case GateKind::RZ: return 'Z';
        default: throw std::invalid_argument("rotation_generator: not a rotation gate");
    }
}

int mu_size(const std::vector<CompiledGate>& gates) {
    int size = 0;
    for (const CompiledGate& cg : gates)
        if (cg.ptype != 0) size = std::max(size, cg.pindex + 1);
    return size;
}

}  // namespace

ExpectationGrad adjoint_gradient(const std::vector<CompiledGate>& gates, int n_qubits,
                                 const PauliObservable& obs) {
    ExpectationGrad out;
    out.d_mu.assign(mu_size(gates), 0.0);

    Statevector ket = run_compiled(gates, n_qubits);
    out.value = qsim::expectation(ket, obs);
    Statevector bra = qsim::apply_observable(ket, obs);

    // Walk the circuit backwards. At gate k, ket is the state after gates
    // 0..k and bra is O|psi> with gates k+1.. undone; for R_P(theta) =
    // exp(-i theta P / 2) the derivative is Im <bra| P |ket>.
    for (int k = static_cast<int>(gates.size()) - 1; k >= 0; --k) {
        const CompiledGate& cg = gates[k];
        if (cg.ptype != 0 && cg.chain != 0.0) {
            const char p = rotation_generator(cg.gate.kind);
            out.d_mu[cg.pindex] += cg.chain * std::imag(pauli_bilinear(bra, ket, cg.gate.q0, p));
        }
        const Gate inv = cg.gate.inverse();
        qsim::apply_gate(ket, inv);
        qsim::apply_gate(bra, inv);
    }
    return out;
}

ExpectationGrad shift_gradient(const std::vector<CompiledGate>& gates, int n_qubits,
                               const PauliObservable& obs) {
    ExpectationGrad out;
    out.d_mu.assign(mu_size(gates), 0.0);
    out.value = qsim::expectation(run_compiled(gates, n_qubits), obs);

    std::vector<int> param_gates;
    for (std::size_t k = 0; k < gates.size(); ++k)
        if (gates[k].ptype != 0 && gates[k].chain != 0.0) param_gates.push_back(static_cast<int>(k));

    std::vector<double> results(param_gates.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < param_gates.size(); ++j) {
        const int k = param_gates[j];
        std::vector<CompiledGate> shifted = gates;
        shifted[k].gate.angle += std::numbers::pi / 2.0;
        const double plus = qsim::expectation(run_compiled(shifted, n_qubits), obs);
        shifted[k].gate.angle -= std::numbers::pi;
        const double minus = qsim::expectation(run_compiled(shifted, n_qubits), obs);
        results[j] = 0.5 * (plus - minus) * gates[k].chain;
    }
    for (std::size_t j = 0; j < param_gates.size(); ++j)
        out.d_mu[gates[param_gates[j]].pindex] += results[j];
    return out;
}

PauliObservable merge_scaled_observables(const CircuitArchitecture& arch,
                                         const std::vector<std::vector<double>>& nu,
                                         std::span<const double> weights) {
    if (weights.size() != arch.observables.size())
        throw std::invalid_argument("merge_scaled_observables: weight count mismatch");
    std::map<std::vector<std::pair<int, char>>, double> merged;
    for (std::size_t a = 0; a < arch.observables.size(); ++a) {
        const auto& terms = arch.observables[a].terms;
        if (nu[a].size() != terms.size())
            throw std::invalid_argument("merge_scaled_observables: nu size mismatch");
        for (std::size_t i = 0; i < terms.size(); ++i)
            merged[terms[i].paulis] += weights[a] * nu[a][i] * terms[i].coeff;
    }
    PauliObservable out;
    for (const auto& [paulis, coeff] : merged)
        if (coeff != 0.0) out.terms.push_back({coeff, paulis});
    return out;
}

ParamLayout VqcPolicy::layout() const {
    ParamLayout l;
    l.n_qubits = arch.n_qubits;
    l.n_lambda = arch.n_lambda();
    l.n_phi = arch.n_phi();
    l.nu_offsets.resize(arch.observables.size());
    int off = 0;
    for (std::size_t a = 0; a < arch.observables.size(); ++a) {
        l.nu_offsets[a] = off;
        off += static_cast<int>(arch.observables[a].terms.size());
    }
    l.n_nu = off;
    l.has_sigma = gaussian;
    return l;
}

CircuitEval VqcPolicy::evaluate(std::span<const double> s_norm) const {
    const auto gates = compile_circuit(params, arch, enc, s_norm);
    const Statevector state = run_compiled(gates, arch.n_qubits);

    CircuitEval ev;
    ev.term_exps.resize(arch.observables.size());
    ev.raw_values.resize(arch.observables.size());
    ev.scaled_values.resize(arch.observables.size());
    for (std::size_t a = 0; a < arch.observables.size(); ++a) {
        const auto& terms = arch.observables[a].terms;
        ev.term_exps[a].resize(terms.size());
        double raw = 0.0, scaled = 0.0;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const double e = qsim::expectation(state, PauliObservable{{terms[i]}});
            ev.term_exps[a][i] = e;
            raw += e;
            scaled += params.nu[a][i] * e;
        }
        ev.raw_values[a] = raw;
        ev.scaled_values[a] = scaled;
    }
    return ev;
}

namespace {

ActionDistribution softmax_from_values(std::span<const double> values, double beta) {
    ActionDistribution d;
    d.gaussian = false;
    const std::size_t n = values.size();
    std::vector<double> logits(n);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        logits[i] = beta * values[i];
        max_logit = std::max(max_logit, logits[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(logits[i] - max_logit);
    const double lse = max_logit + std::log(z);
    d.log_probs.resize(n);
    d.probs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.log_probs[i] = logits[i] - lse;
        d.probs[i] = std::exp(d.log_probs[i]);
    }
    return d;
}

std::vector<double> scale_by_nu(const std::vector<std::vector<double>>& term_exps,
                                const std::vector<std::vector<double>>& nu) {
    if (term_exps.size() != nu.size())
        throw std::invalid_argument("policy: term expectation / nu action count mismatch");
    std::vector<double> out(term_exps.size());
    for (std::size_t a = 0; a < term_exps.size(); ++a) {
        if (term_exps[a].size() != nu[a].size())
            throw std::invalid_argument("policy: term expectation / nu term count mismatch");
        double v = 0.0;
        for (std::size_t i = 0; i < term_exps[a].size(); ++i) v += nu[a][i] * term_exps[a][i];
        out[a] = v;
    }
    return out;
}

}  // namespace

ActionDistribution softmax_policy(const std::vector<std::vector<double>>& term_exps,
                                  const std::vector<std::vector<double>>& nu, double beta) {
    return softmax_from_values(scale_by_nu(term_exps, nu), beta);
}

ActionDistribution gaussian_policy(const std::vector<std::vector<double>>& term_exps,
                                   const std::vector<std::vector<double>>& nu, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_policy: sigma must be positive");
    ActionDistribution d;
    d.gaussian = true;
    d.mean = scale_by_nu(term_exps, nu);
    d.sigma = sigma;
    return d;
}

ActionDistribution VqcPolicy::distribution_from(const CircuitEval& eval) const {
    if (gaussian) return gaussian_policy(eval.term_exps, params.nu, std::exp(params.log_sigma));
    return softmax_from_values(eval.scaled_values, params.beta);
}

ActionDistribution VqcPolicy::distribution(std::span<const double> s_norm) const {
    return distribution_from(evaluate(s_norm));
}

std::vector<double> build_and_run(const PolicyParameters& params, const CircuitArchitecture& arch,
                                  const EncodingSpec& enc, std::span<const double> s_norm) {
    VqcPolicy p{arch, enc, params, false};
    return p.evaluate(s_norm).raw_values;
}

int ActionDistribution::sample(std::mt19937_64& rng) const {
    if (gaussian) throw std::logic_error("ActionDistribution: discrete sample on Gaussian policy");
    return sample_categorical(rng, probs);
}

std::vector<double> ActionDistribution::sample_continuous(std::mt19937_64& rng) const {
    if (!gaussian) throw std::logic_error("ActionDistribution: continuous sample on softmax policy");
    std::vector<double> a(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) a[i] = mean[i] + sigma * normal01(rng);
    return a;
}

double ActionDistribution::log_prob(int action) const {
    if (gaussian) throw std::logic_error("ActionDistribution: discrete log_prob on Gaussian policy");
    if (action < 0 || action >= static_cast<int>(log_probs.size()))
        throw std::invalid_argument("ActionDistribution: action index out of range");
    return log_probs[action];
}

double ActionDistribution::log_prob(std::span<const double> action) const {
    if (!gaussian) throw std::logic_error("ActionDistribution: continuous log_prob on softmax policy");
    if (action.size() != mean.size())
        throw std::invalid_argument("ActionDistribution: action dim mismatch");
    static const double log2pi = std::log(2.0 * std::numbers::pi);
    double lp = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double d = action[i] - mean[i];
        lp += -0.5 * log2pi - std::log(sigma) - d * d / (2.0 * sigma * sigma);
    }
    return lp;
}

double ActionDistribution::entropy() const {
    if (gaussian) {
        static const double log2pie = std::log(2.0 * std::numbers::pi * std::numbers::e);
        return static_cast<double>(mean.size()) * (0.5 * log2pie + std::log(sigma));
    }
    double h = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (probs[i] > 0.0) h -= probs[i] * log_probs[i];
    return h;
}

namespace {

ExpectationGrad gradient_for(const std::vector<CompiledGate>& gates, int n_qubits,
                             const PauliObservable& obs, GradBackend backend) {
    return backend == GradBackend::Adjoint ? adjoint_gradient(gates, n_qubits, obs)
                                           : shift_gradient(gates, n_qubits, obs);
}

}  // namespace

LogProbGrad VqcPolicy::log_prob_gradient(std::span<const double> s_norm, int action,
                                         GradBackend backend) const {
    if (gaussian) throw std::logic_error("log_prob_gradient: discrete action on Gaussian policy");
    const ParamLayout lay = layout();
    if (action < 0 || action >= arch.n_actions())
        throw std::invalid_argument("log_prob_gradient: action out of range");

    const auto gates = compile_circuit(params, arch, enc, s_norm);
    const Statevector state = run_compiled(gates, arch.n_qubits);

    CircuitEval ev;
    ev.term_exps.resize(arch.observables.size());
    ev.scaled_values.resize(arch.observables.size());
    for (std::size_t a = 0; a < arch.observables.size(); ++a) {
        const auto& terms = arch.observables[a].terms;
        ev.term_exps[a].resize(terms.size());
        double scaled = 0.0;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            ev.term_exps[a][i] = qsim::expectation(state, PauliObservable{{terms[i]}});
            scaled += params.nu[a][i] * ev.term_exps[a][i];
        }
        ev.scaled_values[a] = scaled;
    }
    const ActionDistribution dist = softmax_from_values(ev.scaled_values, params.beta);

    // d log pi(a)/d mu = beta * d/d mu (<O_a> - sum_a' pi(a') <O_a'>); the
    // bracket is itself an observable, so one adjoint sweep covers it.
    std::vector<double> weights(arch.n_actions());
    for (int a = 0; a < arch.n_actions(); ++a)
        weights[a] = (a == action ? 1.0 : 0.0) - dist.probs[a];
    const PauliObservable merged = merge_scaled_observables(arch, params.nu, weights);
    const ExpectationGrad eg = gradient_for(gates, arch.n_qubits, merged, backend);

    LogProbGrad out;
    out.log_prob = dist.log_probs[action];
    out.grad.assign(lay.total(), 0.0);
    for (std::size_t i = 0; i < eg.d_mu.size(); ++i) out.grad[i] = params.beta * eg.d_mu[i];
    for (int b = 0; b < arch.n_actions(); ++b)
        for (std::size_t i = 0; i < ev.term_exps[b].size(); ++i)
            out.grad[lay.nu_index(b, static_cast<int>(i))] =
                params.beta * ev.term_exps[b][i] * weights[b];
    return out;
}

LogProbGrad VqcPolicy::log_prob_gradient(std::span<const double> s_norm,
                                         std::span<const double> action,
                                         GradBackend backend) const {
    if (!gaussian) throw std::logic_error("log_prob_gradient: continuous action on softmax policy");
    const ParamLayout lay = layout();
    if (action.size() != arch.observables.size())
        throw std::invalid_argument("log_prob_gradient: action dim mismatch");

    const auto gates = compile_circuit(params, arch, enc, s_norm);
    const CircuitEval ev = evaluate(s_norm);
    const double sigma = std::exp(params.log_sigma);
    const double var = sigma * sigma;

    std::vector<double> resid(action.size());  // d log p / d mean_d
    for (std::size_t d = 0; d < action.size(); ++d)
        resid[d] = (action[d] - ev.scaled_values[d]) / var;

    const PauliObservable merged = merge_scaled_observables(arch, params.nu, resid);
    const ExpectationGrad eg = gradient_for(gates, arch.n_qubits, merged, backend);

    LogProbGrad out;
    out.grad.assign(lay.total(), 0.0);
    static const double log2pi = std::log(2.0 * std::numbers::pi);
    double lp = 0.0, dsig = 0.0;
    for (std::size_t d = 0; d < action.size(); ++d) {
        const double diff = action[d] - ev.scaled_values[d];
        lp += -0.5 * log2pi - params.log_sigma - diff * diff / (2.0 * var);
        dsig += -1.0 + diff * diff / var;
    }
    out.log_prob = lp;
    for (std::size_t i = 0; i < eg.d_mu.size(); ++i) out.grad[i] = eg.d_mu[i];
    for (std::size_t d = 0; d < action.size(); ++d)
        for (std::size_t i = 0; i < ev.term_exps[d].size(); ++i)
            out.grad[lay.nu_index(static_cast<int>(d), static_cast<int>(i))] =
                resid[d] * ev.term_exps[d][i];
    out.grad[lay.sigma_index()] = dsig;
    return out;
}

ExpectationGrad VqcPolicy::expectation_gradient(std::span<const double> s_norm, int action,
                                                GradBackend backend) const {
    if (action < 0 || action >= arch.n_actions())
        throw std::invalid_argument("expectation_gradient: observable index out of range");
    const auto gates = compile_circuit(params, arch, enc, s_norm);
    return gradient_for(gates, arch.n_qubits, arch.observables[action], backend);
}

void VqcPolicy::apply_update(std::span<const double> flat_grad, const std::array<double, 3>& lrs,
                             double lr_sigma, double scale) {
    const ParamLayout lay = layout();
    if (static_cast<int>(flat_grad.size()) != lay.total())
        throw std::invalid_argument("apply_update: gradient size mismatch");
    for (int i = 0; i < lay.n_lambda; ++i) params.lambda[i] += scale * lrs[0] * flat_grad[i];
    for (int i = 0; i < lay.n_phi; ++i)
        params.phi[i] += scale * lrs[1] * flat_grad[lay.n_lambda + i];
    for (std::size_t a = 0; a < params.nu.size(); ++a)
        for (std::size_t i = 0; i < params.nu[a].size(); ++i)
            params.nu[a][i] += scale * lrs[2] * flat_grad[lay.nu_index(static_cast<int>(a),
                                                                       static_cast<int>(i))];
    if (lay.has_sigma) params.log_sigma += scale * lr_sigma * flat_grad[lay.sigma_index()];
}

namespace {

nlohmann::ordered_json observable_to_json(const PauliObservable& obs) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const PauliTerm& t : obs.terms) {
        std::string paulis;
        for (const auto& [q, p] : t.paulis) paulis += p + std::to_string(q);
        terms.push_back({{"coeff", t.coeff}, {"paulis", paulis.empty() ? "I" : paulis}});
    }
    return terms;
}

PauliObservable observable_from_json(const nlohmann::json& j) {
    PauliObservable obs;
    for (const auto& tj : j) {
        const std::string paulis = tj.at("paulis").get<std::string>();
        PauliTerm term;
        term.coeff = tj.at("coeff").get<double>();
        if (paulis != "I") {
            PauliObservable parsed = PauliObservable::parse(paulis);
            term.paulis = parsed.terms[0].paulis;
        }
        obs.terms.push_back(term);
    }
    return obs;
}

}  // namespace

nlohmann::ordered_json VqcPolicy::to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["kind"] = gaussian ? "gaussian" : "softmax";
    nlohmann::ordered_json arch_j;
    arch_j["n_qubits"] = arch.n_qubits;
    arch_j["n_layers"] = arch.n_layers;
    arch_j["entangler"] = arch.entangler == Entangler::RingCnot ? "ring_cnot" : "ring_cz";
    nlohmann::ordered_json obs_j = nlohmann::ordered_json::array();
    for (const auto& o : arch.observables) obs_j.push_back(observable_to_json(o));
    arch_j["observables"] = obs_j;
    j["arch"] = arch_j;
    j["encoding"] = {{"state_bounds", enc.state_bounds}, {"clamp", enc.clamp}};
    j["beta"] = params.beta;
    j["lambda"] = params.lambda;
    j["phi"] = params.phi;
    j["nu"] = params.nu;
    j["log_sigma"] = params.log_sigma;
    return j;
}

VqcPolicy VqcPolicy::from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1)
        throw ConfigError("checkpoint: unsupported format_version");
    VqcPolicy p;
    p.gaussian = j.at("kind").get<std::string>() == "gaussian";
    const auto& arch_j = j.at("arch");
    p.arch.n_qubits = arch_j.at("n_qubits").get<int>();
    p.arch.n_layers = arch_j.at("n_layers").get<int>();
    const std::string ent = arch_j.at("entangler").get<std::string>();
    if (ent == "ring_cnot") {
        p.arch.entangler = Entangler::RingCnot;
    } else if (ent == "ring_cz") {
        p.arch.entangler = Entangler::RingCz;
    } else {
        throw ConfigError("checkpoint: unknown entangler \"" + ent + "\"");
    }
    for (const auto& oj : arch_j.at("observables")) p.arch.observables.push_back(observable_from_json(oj));
    p.enc.state_bounds = j.at("encoding").at("state_bounds").get<std::vector<double>>();
    p.enc.clamp = j.at("encoding").at("clamp").get<bool>();
    p.params.beta = j.at("beta").get<double>();
    p.params.lambda = j.at("lambda").get<std::vector<double>>();
    p.params.phi = j.at("phi").get<std::vector<double>>();
    p.params.nu = j.at("nu").get<std::vector<std::vector<double>>>();
    p.params.log_sigma = j.at("log_sigma").get<double>();
    p.arch.validate();
    if (static_cast<int>(p.params.lambda.size()) != p.arch.n_lambda() ||
        static_cast<int>(p.params.phi.size()) != p.arch.n_phi() ||
        p.params.nu.size() != p.arch.observables.size())
        throw ConfigError("checkpoint: parameter shapes do not match architecture");
    return p;
}

void VqcPolicy::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
    out << to_json().dump(2) << "\n";
}

VqcPolicy VqcPolicy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("bad checkpoint JSON in " + path + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace qil::vqc
