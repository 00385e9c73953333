#pragma once

// Dense statevector simulator. A state over n qubits holds all 2^n complex
// amplitudes; gates act in place by iterating over amplitude index pairs.
// Qubit 0 is the most significant bit of the amplitude index, so for a
// two-qubit register the basis order is |00>, |01>, |10>, |11> and
// tensor_product(a, b) is a plain Kronecker product with `a` as the left
// factor.

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace qil::qsim {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 20;

struct Statevector {
    int n_qubits = 0;
    std::vector<cplx> amps;

    std::size_t dim() const { return amps.size(); }
    double norm_sq() const;
};

// |0...0> on n qubits. Throws ConfigError (see errors.hpp) outside 1..20.
Statevector zero_state(int n_qubits);

enum class GateKind { H, X, Y, Z, RX, RY, RZ, CNOT, CZ };

bool is_rotation(GateKind k);
bool is_two_qubit(GateKind k);
std::string gate_name(GateKind k);

struct Gate {
    GateKind kind;
    int q0 = -1;       // target for 1-qubit gates, control for CNOT/CZ
    int q1 = -1;       // target for 2-qubit gates
    double angle = 0;  // rotations only

    static Gate h(int q) { return {GateKind::H, q}; }
    static Gate x(int q) { return {GateKind::X, q}; }
    static Gate y(int q) { return {GateKind::Y, q}; }
    static Gate z(int q) { return {GateKind::Z, q}; }
    static Gate rx(int q, double a) { return {GateKind::RX, q, -1, a}; }
    static Gate ry(int q, double a) { return {GateKind::RY, q, -1, a}; }
    static Gate rz(int q, double a) { return {GateKind::RZ, q, -1, a}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, control, target}; }
    static Gate cz(int a, int b) { return {GateKind::CZ, a, b}; }

    Gate inverse() const;
};

// 2x2 matrix of a single-qubit gate, row major. Rotations use the half-angle
// convention R_P(theta) = exp(-i * theta * P / 2).
std::array<cplx, 4> gate_matrix_1q(GateKind k, double angle);

// Apply a gate in place. Throws std::invalid_argument on out-of-range or
// duplicate qubit indices. Preserves the norm (all gates are unitary).
void apply_gate(Statevector& state, const Gate& g);

// Apply a bare Pauli (X, Y or Z) to one qubit in place. Used when building
// observable-weighted vectors for expectation values and adjoint gradients.
void apply_pauli(Statevector& state, int qubit, char pauli);

// Observable: weighted sum of Pauli strings, e.g. 1.5 * Z0 Z1 - 0.5 * X2.
struct PauliTerm {
    double coeff = 1.0;
    std::vector<std::pair<int, char>> paulis;  // (qubit, 'X'|'Y'|'Z'), qubits strictly increasing
};

struct PauliObservable {
    std::vector<PauliTerm> terms;

    int max_qubit() const;
    std::string to_string() const;

    // Parse strings like "Z0Z1Z2Z3", "-Z0Z1", "0.5*X0Z2". Whitespace is not
    // allowed; an optional leading sign or "<number>*" prefix sets the
    // coefficient. Single-term only (sums are built programmatically).
    static PauliObservable parse(const std::string& text);
};

// <psi| O |psi>, real by hermiticity. Throws std::invalid_argument if the
// observable touches a qubit outside the register.
double expectation(const Statevector& state, const PauliObservable& obs);

// O|psi> as an (unnormalized) vector; used by the adjoint differentiation.
Statevector apply_observable(const Statevector& state, const PauliObservable& obs);

// Kronecker product with `a` as the left factor: for product states,
// amplitude order matches Statevector's qubit-0-most-significant layout.
Statevector tensor_product(const Statevector& a, const Statevector& b);

}  // namespace qil::qsim
