#pragma once

// Exact tabular-MDP machinery and the numerical audit of the imitation
// error bound for softmax policies under bounded readout error:
//   |J_E - J_theta| <= (2 R_MAX / (1-gamma)^2) * (|sinh(2 beta eps)| + sqrt(2 delta)),
// with delta = E_{s ~ d_E}[KL(pi_E(.|s) || pi~_theta(.|s))] computed, not
// assumed. Every link of the chain (occupancy TV, state-action TV, value
// gap, the sinh perturbation bound, both Pinsker constants) is checked
// separately so a violation pinpoints the broken step.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qil::theory {

struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition;  // [(s * n_actions + a) * n_states + s']
    std::vector<double> reward;      // [s * n_actions + a], |r| <= r_max
    double gamma = 0.9;
    std::vector<double> rho0;  // initial state distribution
    double r_max = 1.0;

    double t(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
    }
    double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
    void validate() const;  // throws std::invalid_argument on broken invariants
};

struct TabularPolicy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> p;  // [s * n_actions + a], rows sum to 1

    std::span<const double> row(int s) const {
        return {p.data() + static_cast<std::size_t>(s) * n_actions,
                static_cast<std::size_t>(n_actions)};
    }
    void validate() const;
};

// Random instances for the audit. States/actions are drawn in
// [2, max_states] x [2, max_actions]; rewards in [-r_max, r_max].
TabularMdp random_mdp(std::mt19937_64& rng, int max_states, int max_actions, double gamma,
                      double r_max = 1.0);
TabularPolicy random_policy(std::mt19937_64& rng, int n_states, int n_actions);
// Logits mimic observable expectations: uniform in [-1, 1].
std::vector<double> random_logits(std::mt19937_64& rng, int n_states, int n_actions);

TabularPolicy softmax_policy_from_logits(const std::vector<double>& logits, int n_states,
                                         int n_actions, double beta);

// pi~ = softmax(beta * (logits + u)) with per-entry |u| <= eps: uniform draws
// or the adversarial extreme (+eps where the unperturbed policy is already
// at least 1/|A|, -eps elsewhere), which pushes toward the sinh bound.
TabularPolicy perturb_policy(const std::vector<double>& logits, int n_states, int n_actions,
                             double beta, double eps, bool adversarial, std::mt19937_64& rng);

// Discounted occupancies: d solves (I - gamma P_pi^T) d = (1 - gamma) rho0,
// rho(s, a) = d(s) pi(a|s). Both are distributions.
struct Occupancy {
    std::vector<double> d;    // per state
    std::vector<double> rho;  // [s * n_actions + a]
};
Occupancy occupancy(const TabularMdp& mdp, const TabularPolicy& pi);

// J = 1/(1-gamma) * sum_{s,a} rho(s,a) r(s,a).
double exact_return(const TabularMdp& mdp, const TabularPolicy& pi);

// 1/2 sum |p - q| and sum p log(p/q) (inf if q has a zero where p does not).
double tv_distance(std::span<const double> p, std::span<const double> q);
double kl_divergence(std::span<const double> p, std::span<const double> q);

// sum_s w(s) * D_TV(a(.|s), b(.|s)) and the KL analogue.
double expected_tv(std::span<const double> weights, const TabularPolicy& a,
                   const TabularPolicy& b);
double expected_kl(std::span<const double> weights, const TabularPolicy& a,
                   const TabularPolicy& b);

struct BoundCheck {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    double slack() const { return rhs - lhs; }
};

struct BoundReport {
    std::vector<BoundCheck> checks;
    double j_expert = 0;
    double j_theta = 0;
    double delta = 0;      // E_{d_E} KL(pi_E || pi~_theta)
    double sinh_term = 0;  // |sinh(2 beta eps)|

    double min_slack() const;
    bool ok(double tol = 1e-9) const { return min_slack() >= -tol; }
};

// Evaluates every inequality in the chain for one instance. pi_theta and
// pi_tilde must come from the same logits (pi_tilde within eps of them).
BoundReport check_bounds(const TabularMdp& mdp, const TabularPolicy& pi_e,
                         const TabularPolicy& pi_theta, const TabularPolicy& pi_tilde,
                         double beta, double eps);

struct VerifyConfig {
    int instances = 100;
    std::uint64_t seed = 0;
    int max_states = 5;
    int max_actions = 3;
    std::vector<double> gammas{0.9, 0.99};
    std::vector<double> betas{0.5, 1.0, 2.0};
    std::vector<double> epsilons{0.0, 0.01, 0.1};
};

struct InstanceResult {
    int mdp_index = 0;
    double gamma = 0;
    double beta = 0;
    double epsilon = 0;
    bool adversarial = false;
    BoundReport report;
};

struct VerifySummary {
    std::vector<InstanceResult> results;  // instances x |betas| x |epsilons| x 2
    double min_slack = 0;
    int violations = 0;  // reports with min slack < -1e-9
};

// The audit: random MDPs and policies, every (beta, epsilon, perturbation
// kind) combination per instance.
VerifySummary verify_bounds(const VerifyConfig& config);

}  // namespace qil::theory
