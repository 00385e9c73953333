#include "qil/qsim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "qil/errors.hpp"

namespace qil::qsim {

namespace {

// Qubit 0 is the most significant bit of the amplitude index.
inline std::size_t bit_mask(int n_qubits, int qubit) {
    return std::size_t{1} << (n_qubits - 1 - qubit);
}

void check_qubit(const Statevector& s, int q, const char* who) {
    if (q < 0 || q >= s.n_qubits)
        throw std::invalid_argument(std::string(who) + ": qubit index " + std::to_string(q) +
                                    " out of range for " + std::to_string(s.n_qubits) + " qubits");
}

}  // namespace

double Statevector::norm_sq() const {
    double total = 0.0;
    for (const cplx& a : amps) total += std::norm(a);
    return total;
}

Statevector zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
        throw ConfigError("zero_state: qubit count must be in 1.." + std::to_string(kMaxQubits) +
                          ", got " + std::to_string(n_qubits));
    Statevector s;
    s.n_qubits = n_qubits;
    s.amps.assign(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
    s.amps[0] = cplx{1.0, 0.0};
    return s;
}

bool is_rotation(GateKind k) {
    return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

bool is_two_qubit(GateKind k) {
    return k == GateKind::CNOT || k == GateKind::CZ;
}

std::string gate_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CZ: return "CZ";
    }
    return "?";
}

Gate Gate::inverse() const {
    Gate g = *this;
    if (is_rotation(kind)) g.angle = -angle;  // everything else is self-inverse
    return g;
}

std::array<cplx, 4> gate_matrix_1q(GateKind k, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    const double r = 1.0 / std::sqrt(2.0);
    switch (k) {
        case GateKind::H: return {cplx{r, 0}, cplx{r, 0}, cplx{r, 0}, cplx{-r, 0}};
        case GateKind::X: return {cplx{0, 0}, cplx{1, 0}, cplx{1, 0}, cplx{0, 0}};
        case GateKind::Y: return {cplx{0, 0}, cplx{0, -1}, cplx{0, 1}, cplx{0, 0}};
        case GateKind::Z: return {cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{-1, 0}};
        case GateKind::RX: return {cplx{c, 0}, cplx{0, -s}, cplx{0, -s}, cplx{c, 0}};
        case GateKind::RY: return {cplx{c, 0}, cplx{-s, 0}, cplx{s, 0}, cplx{c, 0}};
        case GateKind::RZ: return {cplx{c, -s}, cplx{0, 0}, cplx{0, 0}, cplx{c, s}};
        default:
            throw std::invalid_argument("gate_matrix_1q: " + gate_name(k) + " is not a 1-qubit gate");
    }
}

namespace {

void apply_1q_matrix(Statevector& s, int qubit, const std::array<cplx, 4>& m) {
    const std::size_t mask = bit_mask(s.n_qubits, qubit);
    const std::size_t lo = mask - 1;
    const std::size_t hi = ~lo;
    const std::size_t half = s.dim() >> 1;
    cplx* a = s.amps.data();
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t i0 = ((i & hi) << 1) | (i & lo);
        const std::size_t i1 = i0 | mask;
        const cplx a0 = a[i0];
        const cplx a1 = a[i1];
        a[i0] = m[0] * a0 + m[1] * a1;
        a[i1] = m[2] * a0 + m[3] * a1;
    }
}

}  // namespace

void apply_gate(Statevector& state, const Gate& g) {
    check_qubit(state, g.q0, "apply_gate");
    if (is_two_qubit(g.kind)) {
        check_qubit(state, g.q1, "apply_gate");
        if (g.q0 == g.q1)
            throw std::invalid_argument("apply_gate: control and target must differ");
        const std::size_t cmask = bit_mask(state.n_qubits, g.q0);
        const std::size_t tmask = bit_mask(state.n_qubits, g.q1);
        cplx* a = state.amps.data();
        const std::size_t dim = state.dim();
        if (g.kind == GateKind::CNOT) {
            for (std::size_t i = 0; i < dim; ++i)
                if ((i & cmask) && !(i & tmask)) std::swap(a[i], a[i | tmask]);
        } else {  // CZ
            for (std::size_t i = 0; i < dim; ++i)
                if ((i & cmask) && (i & tmask)) a[i] = -a[i];
        }
        return;
    }
    // Diagonal fast path for Z and RZ, generic 2x2 path otherwise.
    if (g.kind == GateKind::Z || g.kind == GateKind::RZ) {
        const std::size_t mask = bit_mask(state.n_qubits, g.q0);
        cplx* a = state.amps.data();
        const std::size_t dim = state.dim();
        if (g.kind == GateKind::Z) {
            for (std::size_t i = 0; i < dim; ++i)
                if (i & mask) a[i] = -a[i];
        } else {
            const cplx p0{std::cos(g.angle / 2.0), -std::sin(g.angle / 2.0)};
            const cplx p1 = std::conj(p0);
            for (std::size_t i = 0; i < dim; ++i) a[i] *= (i & mask) ? p1 : p0;
        }
        return;
    }
    apply_1q_matrix(state, g.q0, gate_matrix_1q(g.kind, g.angle));
}

void apply_pauli(Statevector& state, int qubit, char pauli) {
    check_qubit(state, qubit, "apply_pauli");
    const std::size_t mask = bit_mask(state.n_qubits, qubit);
    cplx* a = state.amps.data();
    const std::size_t dim = state.dim();
    switch (pauli) {
        case 'X':
            for (std::size_t i = 0; i < dim; ++i)
                if (!(i & mask)) std::swap(a[i], a[i | mask]);
            break;
        case 'Y':
            for (std::size_t i = 0; i < dim; ++i)
                if (!(i & mask)) {
                    const cplx a0 = a[i];
                    const cplx a1 = a[i | mask];
                    a[i] = cplx{0, -1} * a1;
                    a[i | mask] = cplx{0, 1} * a0;
                }
            break;
        case 'Z':
            for (std::size_t i = 0; i < dim; ++i)
                if (i & mask) a[i] = -a[i];
            break;
        default:
            throw std::invalid_argument(std::string("apply_pauli: unknown Pauli '") + pauli + "'");
    }
}

int PauliObservable::max_qubit() const {
    int m = -1;
    for (const PauliTerm& t : terms)
        for (const auto& [q, p] : t.paulis) m = std::max(m, q);
    return m;
}

std::string PauliObservable::to_string() const {
    std::ostringstream out;
    bool first = true;
    for (const PauliTerm& t : terms) {
        if (!first) out << " + ";
        first = false;
        if (t.coeff == -1.0) {
            out << "-";
        } else if (t.coeff != 1.0) {
            out << t.coeff << "*";
        }
        if (t.paulis.empty()) out << "I";
        for (const auto& [q, p] : t.paulis) out << p << q;
    }
    return out.str();
}

PauliObservable PauliObservable::parse(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("PauliObservable::parse: empty string");
    PauliTerm term;
    std::size_t i = 0;
    if (text[i] == '-' || text[i] == '+' || std::isdigit(static_cast<unsigned char>(text[i]))) {
        // Optional sign, or an explicit "<number>*" coefficient prefix.
        if ((text[i] == '-' || text[i] == '+') &&
            (i + 1 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            term.coeff = (text[i] == '-') ? -1.0 : 1.0;
            ++i;
        } else {
            std::size_t star = text.find('*', i);
            if (star == std::string::npos)
                throw std::invalid_argument("PauliObservable::parse: numeric coefficient needs '*' in \"" +
                                            text + "\"");
            char* end = nullptr;
            term.coeff = std::strtod(text.c_str() + i, &end);
            if (end != text.c_str() + star)
                throw std::invalid_argument("PauliObservable::parse: bad coefficient in \"" + text + "\"");
            i = star + 1;
        }
    }
    if (i >= text.size())
        throw std::invalid_argument("PauliObservable::parse: missing Pauli string in \"" + text + "\"");
    while (i < text.size()) {
        const char p = text[i];
        if (p != 'X' && p != 'Y' && p != 'Z')
            throw std::invalid_argument("PauliObservable::parse: expected X/Y/Z at position " +
                                        std::to_string(i) + " in \"" + text + "\"");
        ++i;
        if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
            throw std::invalid_argument("PauliObservable::parse: missing qubit index in \"" + text + "\"");
        int q = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            q = q * 10 + (text[i] - '0');
            ++i;
        }
        term.paulis.emplace_back(q, p);
    }
    std::sort(term.paulis.begin(), term.paulis.end());
    for (std::size_t k = 1; k < term.paulis.size(); ++k)
        if (term.paulis[k].first == term.paulis[k - 1].first)
            throw std::invalid_argument("PauliObservable::parse: duplicate qubit in \"" + text + "\"");
    return PauliObservable{{term}};
}

double expectation(const Statevector& state, const PauliObservable& obs) {
    if (obs.max_qubit() >= state.n_qubits)
        throw std::invalid_argument("expectation: observable qubit " + std::to_string(obs.max_qubit()) +
                                    " out of range for " + std::to_string(state.n_qubits) + " qubits");
    double total = 0.0;
    Statevector scratch;
    for (const PauliTerm& term : obs.terms) {
        scratch = state;
        for (const auto& [q, p] : term.paulis) apply_pauli(scratch, q, p);
        double dot = 0.0;
        for (std::size_t i = 0; i < state.dim(); ++i)
            dot += std::real(std::conj(state.amps[i]) * scratch.amps[i]);
        total += term.coeff * dot;
    }
    return total;
}

Statevector apply_observable(const Statevector& state, const PauliObservable& obs) {
    if (obs.max_qubit() >= state.n_qubits)
        throw std::invalid_argument("apply_observable: observable qubit out of range");
    Statevector out = state;
    for (cplx& a : out.amps) a = cplx{0, 0};
    Statevector scratch;
    for (const PauliTerm& term : obs.terms) {
        scratch = state;
        for (const auto& [q, p] : term.paulis) apply_pauli(scratch, q, p);
        for (std::size_t i = 0; i < state.dim(); ++i) out.amps[i] += term.coeff * scratch.amps[i];
    }
    return out;
}

Statevector tensor_product(const Statevector& a, const Statevector& b) {
    if (a.n_qubits + b.n_qubits > kMaxQubits)
        throw ConfigError("tensor_product: combined register exceeds " + std::to_string(kMaxQubits) +
                          " qubits");
    Statevector out;
    out.n_qubits = a.n_qubits + b.n_qubits;
    out.amps.resize(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j) out.amps[i * b.dim() + j] = a.amps[i] * b.amps[j];
    return out;
}

}  // namespace qil::qsim
