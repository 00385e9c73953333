#include "qil/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qil/rng.hpp"

namespace qil::theory {

namespace {

constexpr double kDistTol = 1e-12;

void check_distribution(std::span<const double> p, const char* what) {
    double sum = 0;
    for (double x : p) {
        if (x < -kDistTol) throw std::invalid_argument(std::string(what) + ": negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::invalid_argument(std::string(what) + ": does not sum to 1");
}

}  // namespace

void TabularMdp::validate() const {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("TabularMdp: need at least one state and action");
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("TabularMdp: gamma must lie in [0, 1)");
    if (transition.size() != static_cast<std::size_t>(n_states) * n_actions * n_states ||
        reward.size() != static_cast<std::size_t>(n_states) * n_actions ||
        rho0.size() != static_cast<std::size_t>(n_states))
        throw std::invalid_argument("TabularMdp: table sizes do not match n_states/n_actions");
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            double sum = 0;
            for (int s2 = 0; s2 < n_states; ++s2) {
                const double x = t(s, a, s2);
                if (x < -kDistTol) throw std::invalid_argument("TabularMdp: negative transition");
                sum += x;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
        }
    check_distribution(rho0, "TabularMdp rho0");
    for (double x : reward)
        if (std::abs(x) > r_max + kDistTol)
            throw std::invalid_argument("TabularMdp: |reward| exceeds r_max");
}

void TabularPolicy::validate() const {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("TabularPolicy: need at least one state and action");
    if (p.size() != static_cast<std::size_t>(n_states) * n_actions)
        throw std::invalid_argument("TabularPolicy: table size mismatch");
    for (int s = 0; s < n_states; ++s) {
        double sum = 0;
        for (int a = 0; a < n_actions; ++a) sum += p[static_cast<std::size_t>(s) * n_actions + a];
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("TabularPolicy: row does not sum to 1");
    }
}

TabularMdp random_mdp(std::mt19937_64& rng, int max_states, int max_actions, double gamma,
                      double r_max) {
    if (max_states < 2 || max_actions < 2)
        throw std::invalid_argument("random_mdp: need room for at least 2 states and actions");
    TabularMdp m;
    m.n_states = 2 + randint(rng, max_states - 1);
    m.n_actions = 2 + randint(rng, max_actions - 1);
    m.gamma = gamma;
    m.r_max = r_max;
    m.transition.resize(static_cast<std::size_t>(m.n_states) * m.n_actions * m.n_states);
    m.reward.resize(static_cast<std::size_t>(m.n_states) * m.n_actions);
    m.rho0.resize(m.n_states);
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a) {
            double sum = 0;
            const std::size_t base = (static_cast<std::size_t>(s) * m.n_actions + a) * m.n_states;
            for (int s2 = 0; s2 < m.n_states; ++s2) {
                // Small floor keeps rows comfortably away from degenerate.
                const double w = 0.05 + uniform01(rng);
                m.transition[base + s2] = w;
                sum += w;
            }
            for (int s2 = 0; s2 < m.n_states; ++s2) m.transition[base + s2] /= sum;
        }
    for (double& x : m.reward) x = uniform(rng, -r_max, r_max);
    double sum = 0;
    for (double& x : m.rho0) {
        x = 0.05 + uniform01(rng);
        sum += x;
    }
    for (double& x : m.rho0) x /= sum;
    return m;
}

TabularPolicy random_policy(std::mt19937_64& rng, int n_states, int n_actions) {
    TabularPolicy pi;
    pi.n_states = n_states;
    pi.n_actions = n_actions;
    pi.p.resize(static_cast<std::size_t>(n_states) * n_actions);
    for (int s = 0; s < n_states; ++s) {
        double sum = 0;
        for (int a = 0; a < n_actions; ++a) {
            const double w = 0.05 + uniform01(rng);
            pi.p[static_cast<std::size_t>(s) * n_actions + a] = w;
            sum += w;
        }
        for (int a = 0; a < n_actions; ++a) pi.p[static_cast<std::size_t>(s) * n_actions + a] /= sum;
    }
    return pi;
}

std::vector<double> random_logits(std::mt19937_64& rng, int n_states, int n_actions) {
    std::vector<double> logits(static_cast<std::size_t>(n_states) * n_actions);
    for (double& x : logits) x = uniform(rng, -1.0, 1.0);
    return logits;
}

TabularPolicy softmax_policy_from_logits(const std::vector<double>& logits, int n_states,
                                         int n_actions, double beta) {
    if (logits.size() != static_cast<std::size_t>(n_states) * n_actions)
        throw std::invalid_argument("softmax_policy_from_logits: logits size mismatch");
    TabularPolicy pi;
    pi.n_states = n_states;
    pi.n_actions = n_actions;
    pi.p.resize(logits.size());
    for (int s = 0; s < n_states; ++s) {
        const std::size_t base = static_cast<std::size_t>(s) * n_actions;
        double mx = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < n_actions; ++a) mx = std::max(mx, beta * logits[base + a]);
        double z = 0;
        for (int a = 0; a < n_actions; ++a) {
            pi.p[base + a] = std::exp(beta * logits[base + a] - mx);
            z += pi.p[base + a];
        }
        for (int a = 0; a < n_actions; ++a) pi.p[base + a] /= z;
    }
    return pi;
}

TabularPolicy perturb_policy(const std::vector<double>& logits, int n_states, int n_actions,
                             double beta, double eps, bool adversarial, std::mt19937_64& rng) {
    if (eps < 0) throw std::invalid_argument("perturb_policy: eps must be nonnegative");
    std::vector<double> noisy = logits;
    if (eps > 0) {
        if (adversarial) {
            const TabularPolicy pi = softmax_policy_from_logits(logits, n_states, n_actions, beta);
            const double threshold = 1.0 / static_cast<double>(n_actions);
            for (std::size_t i = 0; i < noisy.size(); ++i)
                noisy[i] += pi.p[i] >= threshold ? eps : -eps;
        } else {
            for (double& x : noisy) x += uniform(rng, -eps, eps);
        }
    }
    return softmax_policy_from_logits(noisy, n_states, n_actions, beta);
}

Occupancy occupancy(const TabularMdp& mdp, const TabularPolicy& pi) {
    mdp.validate();
    pi.validate();
    if (pi.n_states != mdp.n_states || pi.n_actions != mdp.n_actions)
        throw std::invalid_argument("occupancy: policy shape does not match the MDP");
    const int n = mdp.n_states;

    // A = I - gamma P_pi^T with P_pi(s'|s) = sum_a pi(a|s) T(s'|s,a);
    // solve A d = (1-gamma) rho0 by Gaussian elimination, partial pivoting.
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (int s = 0; s < n; ++s)
        for (int s2 = 0; s2 < n; ++s2) {
            double p = 0;
            for (int act = 0; act < mdp.n_actions; ++act)
                p += pi.p[static_cast<std::size_t>(s) * mdp.n_actions + act] * mdp.t(s, act, s2);
            a[static_cast<std::size_t>(s2) * n + s] = (s == s2 ? 1.0 : 0.0) - mdp.gamma * p;
        }
    std::vector<double> d(n);
    for (int s = 0; s < n; ++s) d[s] = (1.0 - mdp.gamma) * mdp.rho0[s];

    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[static_cast<std::size_t>(row) * n + col]) >
                std::abs(a[static_cast<std::size_t>(piv) * n + col]))
                piv = row;
        if (std::abs(a[static_cast<std::size_t>(piv) * n + col]) < 1e-14)
            throw std::runtime_error("occupancy: singular flow system");
        if (piv != col) {
            for (int k = 0; k < n; ++k)
                std::swap(a[static_cast<std::size_t>(piv) * n + k],
                          a[static_cast<std::size_t>(col) * n + k]);
            std::swap(d[piv], d[col]);
        }
        for (int row = col + 1; row < n; ++row) {
            const double f = a[static_cast<std::size_t>(row) * n + col] /
                             a[static_cast<std::size_t>(col) * n + col];
            if (f == 0.0) continue;
            for (int k = col; k < n; ++k)
                a[static_cast<std::size_t>(row) * n + k] -=
                    f * a[static_cast<std::size_t>(col) * n + k];
            d[row] -= f * d[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double s = d[row];
        for (int k = row + 1; k < n; ++k) s -= a[static_cast<std::size_t>(row) * n + k] * d[k];
        d[row] = s / a[static_cast<std::size_t>(row) * n + row];
    }

    Occupancy out;
    out.d = std::move(d);
    // Clip the tiny negative round-off and renormalize.
    double sum = 0;
    for (double& x : out.d) {
        if (x < 0 && x > -1e-12) x = 0;
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::runtime_error("occupancy: solution does not sum to 1");
    for (double& x : out.d) x /= sum;
    out.rho.resize(static_cast<std::size_t>(n) * mdp.n_actions);
    for (int s = 0; s < n; ++s)
        for (int act = 0; act < mdp.n_actions; ++act)
            out.rho[static_cast<std::size_t>(s) * mdp.n_actions + act] =
                out.d[s] * pi.p[static_cast<std::size_t>(s) * mdp.n_actions + act];
    return out;
}

double exact_return(const TabularMdp& mdp, const TabularPolicy& pi) {
    const Occupancy occ = occupancy(mdp, pi);
    double j = 0;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            j += occ.rho[static_cast<std::size_t>(s) * mdp.n_actions + a] * mdp.r(s, a);
    return j / (1.0 - mdp.gamma);
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

double expected_tv(std::span<const double> weights, const TabularPolicy& a,
                   const TabularPolicy& b) {
    if (static_cast<int>(weights.size()) != a.n_states || a.n_states != b.n_states ||
        a.n_actions != b.n_actions)
        throw std::invalid_argument("expected_tv: shape mismatch");
    double s = 0;
    for (int st = 0; st < a.n_states; ++st) s += weights[st] * tv_distance(a.row(st), b.row(st));
    return s;
}

double expected_kl(std::span<const double> weights, const TabularPolicy& a,
                   const TabularPolicy& b) {
    if (static_cast<int>(weights.size()) != a.n_states || a.n_states != b.n_states ||
        a.n_actions != b.n_actions)
        throw std::invalid_argument("expected_kl: shape mismatch");
    double s = 0;
    for (int st = 0; st < a.n_states; ++st) s += weights[st] * kl_divergence(a.row(st), b.row(st));
    return s;
}

double BoundReport::min_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (const BoundCheck& c : checks) m = std::min(m, c.slack());
    return m;
}

BoundReport check_bounds(const TabularMdp& mdp, const TabularPolicy& pi_e,
                         const TabularPolicy& pi_theta, const TabularPolicy& pi_tilde,
                         double beta, double eps) {
    const Occupancy occ_e = occupancy(mdp, pi_e);
    const Occupancy occ_t = occupancy(mdp, pi_theta);
    const double gamma = mdp.gamma;

    // Policy-level TV expectations under the expert state occupancy.
    const double tv_theta_e = expected_tv(occ_e.d, pi_theta, pi_e);
    const double tv_tilde_theta = expected_tv(occ_e.d, pi_tilde, pi_theta);
    const double tv_tilde_e = expected_tv(occ_e.d, pi_tilde, pi_e);

    BoundReport rep;
    rep.j_expert = exact_return(mdp, pi_e);
    rep.j_theta = exact_return(mdp, pi_theta);
    rep.delta = expected_kl(occ_e.d, pi_e, pi_tilde);
    rep.sinh_term = std::abs(std::sinh(2.0 * beta * eps));

    // State-occupancy TV against the policy TV expectation.
    rep.checks.push_back({"occupancy_tv", tv_distance(occ_t.d, occ_e.d),
                          gamma / (1.0 - gamma) * tv_theta_e});
    // State-action occupancy TV.
    rep.checks.push_back({"state_action_tv", tv_distance(occ_t.rho, occ_e.rho),
                          1.0 / (1.0 - gamma) * tv_theta_e});
    // Value gap against the state-action occupancy TV.
    rep.checks.push_back({"value_gap", std::abs(rep.j_expert - rep.j_theta),
                          2.0 * mdp.r_max / (1.0 - gamma) * tv_distance(occ_t.rho, occ_e.rho)});
    // Readout perturbation stays inside the sinh envelope.
    rep.checks.push_back({"perturbation_sinh", tv_tilde_theta, rep.sinh_term});
    // Pinsker at the loose (sqrt(2 KL)) and tight (sqrt(KL / 2)) constants.
    rep.checks.push_back({"pinsker_loose", tv_tilde_e, std::sqrt(2.0 * rep.delta)});
    rep.checks.push_back({"pinsker_tight", tv_tilde_e, std::sqrt(rep.delta / 2.0)});
    // The headline bound, with both Pinsker constants threaded through.
    const double scale = 2.0 * mdp.r_max / ((1.0 - gamma) * (1.0 - gamma));
    rep.checks.push_back({"final_bound", std::abs(rep.j_expert - rep.j_theta),
                          scale * (rep.sinh_term + std::sqrt(2.0 * rep.delta))});
    rep.checks.push_back({"final_bound_tight", std::abs(rep.j_expert - rep.j_theta),
                          scale * (rep.sinh_term + std::sqrt(rep.delta / 2.0))});
    return rep;
}

VerifySummary verify_bounds(const VerifyConfig& config) {
    if (config.instances < 1) throw std::invalid_argument("verify_bounds: need instances >= 1");
    VerifySummary summary;
    summary.min_slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < config.instances; ++i) {
        std::mt19937_64 rng = make_rng(config.seed, 0x7d1ULL, static_cast<std::uint64_t>(i));
        const double gamma = config.gammas[i % config.gammas.size()];
        const TabularMdp mdp = random_mdp(rng, config.max_states, config.max_actions, gamma);
        const TabularPolicy pi_e = random_policy(rng, mdp.n_states, mdp.n_actions);
        const std::vector<double> logits = random_logits(rng, mdp.n_states, mdp.n_actions);
        for (double beta : config.betas)
            for (double eps : config.epsilons)
                for (int adv = 0; adv < 2; ++adv) {
                    const TabularPolicy pi_theta =
                        softmax_policy_from_logits(logits, mdp.n_states, mdp.n_actions, beta);
                    const TabularPolicy pi_tilde = perturb_policy(
                        logits, mdp.n_states, mdp.n_actions, beta, eps, adv == 1, rng);
                    InstanceResult res;
                    res.mdp_index = i;
                    res.gamma = gamma;
                    res.beta = beta;
                    res.epsilon = eps;
                    res.adversarial = adv == 1;
                    res.report = check_bounds(mdp, pi_e, pi_theta, pi_tilde, beta, eps);
                    summary.min_slack = std::min(summary.min_slack, res.report.min_slack());
                    if (!res.report.ok()) ++summary.violations;
                    summary.results.push_back(std::move(res));
                }
    }
    return summary;
}

}  // namespace qil::theory
