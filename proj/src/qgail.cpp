#include "qil/qgail.hpp"

#include <algorithm>
#include <cmath>

#include "qil/errors.hpp"
#include "qil/rng.hpp"

namespace qil::qgail {

using kernels::Mode;

// --------------------------------------------------------------------- MLP

namespace {

double vec_norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// One power-iteration round for a rows x cols matrix; returns the sigma
// estimate and refreshes u in place.
double power_iterate(const std::vector<double>& w, int rows, int cols, std::vector<double>& u,
                     int iters) {
    std::vector<double> v(cols);
    double sigma = 0;
    for (int it = 0; it < iters; ++it) {
        // v = W^T u, normalized
        std::fill(v.begin(), v.end(), 0.0);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) v[c] += w[r * cols + c] * u[r];
        const double nv = vec_norm(v);
        if (nv < 1e-300) return 0.0;
        for (double& x : v) x /= nv;
        // u = W v, normalized; |W v| is the sigma estimate
        std::fill(u.begin(), u.end(), 0.0);
        for (int r = 0; r < rows; ++r) {
            double s = 0;
            for (int c = 0; c < cols; ++c) s += w[r * cols + c] * v[c];
            u[r] = s;
        }
        sigma = vec_norm(u);
        if (sigma < 1e-300) return 0.0;
        for (double& x : u) x /= sigma;
    }
    return sigma;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kDClip = 1e-6;

}  // namespace

MlpDiscriminator MlpDiscriminator::init(int in_dim, std::mt19937_64& rng, bool spectral_norm) {
    if (in_dim < 1) throw std::invalid_argument("MlpDiscriminator: input dim must be positive");
    MlpDiscriminator d;
    d.in_dim = in_dim;
    d.spectral_norm = spectral_norm;
    auto init_layer = [&rng](std::vector<double>& w, std::vector<double>& b, int rows, int cols) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        w.resize(static_cast<std::size_t>(rows) * cols);
        b.resize(rows);
        for (double& x : w) x = uniform(rng, -bound, bound);
        for (double& x : b) x = uniform(rng, -bound, bound);
    };
    init_layer(d.w1, d.b1, kHidden, in_dim);
    init_layer(d.w2, d.b2, kHidden, kHidden);
    init_layer(d.w3, d.b3, 1, kHidden);
    d.u1.resize(kHidden);
    d.u2.resize(kHidden);
    d.u3.resize(1);
    for (double& x : d.u1) x = normal01(rng);
    for (double& x : d.u2) x = normal01(rng);
    for (double& x : d.u3) x = normal01(rng);
    // Burn the power iteration in so the first normalize() is already
    // accurate; afterwards each update warm-starts from the previous u.
    power_iterate(d.w1, kHidden, in_dim, d.u1, 50);
    power_iterate(d.w2, kHidden, kHidden, d.u2, 50);
    power_iterate(d.w3, 1, kHidden, d.u3, 50);
    if (spectral_norm) d.normalize();
    return d;
}

double MlpDiscriminator::logit(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != in_dim)
        throw std::invalid_argument("MlpDiscriminator: input dim mismatch");
    std::array<double, kHidden> h1, h2;
    for (int j = 0; j < kHidden; ++j) {
        double z = b1[j];
        for (int i = 0; i < in_dim; ++i) z += w1[j * in_dim + i] * x[i];
        h1[j] = std::tanh(z);
    }
    for (int j = 0; j < kHidden; ++j) {
        double z = b2[j];
        for (int i = 0; i < kHidden; ++i) z += w2[j * kHidden + i] * h1[i];
        h2[j] = std::tanh(z);
    }
    double z = b3[0];
    for (int i = 0; i < kHidden; ++i) z += w3[i] * h2[i];
    return z;
}

double MlpDiscriminator::forward(std::span<const double> x) const { return sigmoid(logit(x)); }

double MlpDiscriminator::ascent_step(const std::vector<std::vector<double>>& agent_x,
                                     const std::vector<std::vector<double>>& expert_x, double lr,
                                     Mode mode) {
    if (agent_x.empty() || expert_x.empty())
        throw std::invalid_argument("MlpDiscriminator::ascent_step: empty batch");
    const std::size_t n_a = agent_x.size();
    const std::size_t n_e = expert_x.size();
    const std::size_t sz_w1 = w1.size(), sz_w2 = w2.size(), sz_w3 = w3.size();
    const std::size_t n_params = sz_w1 + kHidden + sz_w2 + kHidden + sz_w3 + 1;

    // Flat gradient layout [w1 b1 w2 b2 w3 b3]; one extra slot accumulates J.
    std::vector<double> g = kernels::chunked_sum(
        n_a + n_e, n_params + 1,
        [&](std::size_t item, double* acc) {
            const bool is_agent = item < n_a;
            const std::vector<double>& x = is_agent ? agent_x[item] : expert_x[item - n_a];
            std::array<double, kHidden> h1, h2;
            for (int j = 0; j < kHidden; ++j) {
                double z = b1[j];
                for (int i = 0; i < in_dim; ++i) z += w1[j * in_dim + i] * x[i];
                h1[j] = std::tanh(z);
            }
            for (int j = 0; j < kHidden; ++j) {
                double z = b2[j];
                for (int i = 0; i < kHidden; ++i) z += w2[j * kHidden + i] * h1[i];
                h2[j] = std::tanh(z);
            }
            double z3 = b3[0];
            for (int i = 0; i < kHidden; ++i) z3 += w3[i] * h2[i];
            const double d = sigmoid(z3);

            // dJ/dz3: agent term is log D, expert term is log(1-D).
            const double c = is_agent ? (1.0 - d) / static_cast<double>(n_a)
                                      : -d / static_cast<double>(n_e);
            acc[n_params] += is_agent
                                 ? std::log(std::max(d, 1e-12)) / static_cast<double>(n_a)
                                 : std::log(std::max(1.0 - d, 1e-12)) / static_cast<double>(n_e);

            double* gw1 = acc;
            double* gb1 = gw1 + sz_w1;
            double* gw2 = gb1 + kHidden;
            double* gb2 = gw2 + sz_w2;
            double* gw3 = gb2 + kHidden;
            double* gb3 = gw3 + sz_w3;

            gb3[0] += c;
            std::array<double, kHidden> dz2;
            for (int j = 0; j < kHidden; ++j) {
                gw3[j] += c * h2[j];
                dz2[j] = c * w3[j] * (1.0 - h2[j] * h2[j]);
            }
            std::array<double, kHidden> dh1{};
            for (int j = 0; j < kHidden; ++j) {
                gb2[j] += dz2[j];
                for (int i = 0; i < kHidden; ++i) {
                    gw2[j * kHidden + i] += dz2[j] * h1[i];
                    dh1[i] += w2[j * kHidden + i] * dz2[j];
                }
            }
            for (int j = 0; j < kHidden; ++j) {
                const double dz1 = dh1[j] * (1.0 - h1[j] * h1[j]);
                gb1[j] += dz1;
                for (int i = 0; i < in_dim; ++i) gw1[j * in_dim + i] += dz1 * x[i];
            }
        },
        mode);

    const double objective = g[n_params];
    std::size_t off = 0;
    for (std::size_t i = 0; i < sz_w1; ++i) w1[i] += lr * g[off + i];
    off += sz_w1;
    for (int i = 0; i < kHidden; ++i) b1[i] += lr * g[off + i];
    off += kHidden;
    for (std::size_t i = 0; i < sz_w2; ++i) w2[i] += lr * g[off + i];
    off += sz_w2;
    for (int i = 0; i < kHidden; ++i) b2[i] += lr * g[off + i];
    off += kHidden;
    for (std::size_t i = 0; i < sz_w3; ++i) w3[i] += lr * g[off + i];
    off += sz_w3;
    b3[0] += lr * g[off];

    if (spectral_norm) normalize();
    return objective;
}

double MlpDiscriminator::estimate_sigma(int which) {
    switch (which) {
        case 1: return power_iterate(w1, kHidden, in_dim, u1, power_iters);
        case 2: return power_iterate(w2, kHidden, kHidden, u2, power_iters);
        case 3: return power_iterate(w3, 1, kHidden, u3, power_iters);
        default: throw std::invalid_argument("estimate_sigma: matrix index must be 1, 2 or 3");
    }
}

void MlpDiscriminator::normalize() {
    const double s1 = estimate_sigma(1);
    if (s1 > 1e-300)
        for (double& x : w1) x /= s1;
    const double s2 = estimate_sigma(2);
    if (s2 > 1e-300)
        for (double& x : w2) x /= s2;
    const double s3 = estimate_sigma(3);
    if (s3 > 1e-300)
        for (double& x : w3) x /= s3;
}

// ----------------------------------------------------- VQC discriminator

VqcDiscriminator VqcDiscriminator::init(int in_dim, int n_layers, std::mt19937_64& rng) {
    VqcDiscriminator d;
    d.arch.n_qubits = in_dim;
    d.arch.n_layers = n_layers;
    std::string all_z;
    for (int q = 0; q < in_dim; ++q) all_z += "Z" + std::to_string(q);
    d.arch.observables = {qsim::PauliObservable::parse(all_z)};
    d.enc.state_bounds.assign(in_dim, 1.0);
    d.enc.clamp = true;
    d.params = vqc::PolicyParameters::init(d.arch, rng);
    return d;
}

double VqcDiscriminator::readout_scale() const {
    double m = 0;
    for (std::size_t i = 0; i < arch.observables[0].terms.size(); ++i)
        m += std::abs(params.nu[0][i] * arch.observables[0].terms[i].coeff);
    return std::max(m, 1e-9);  // keep the map well-defined if nu collapses to 0
}

double VqcDiscriminator::forward(std::span<const double> x) const {
    const vqc::VqcPolicy view{arch, enc, params, false};
    const double r = view.evaluate(x).scaled_values[0];
    const double m = readout_scale();
    return std::clamp((r + m) / (2.0 * m), kDClip, 1.0 - kDClip);
}

double VqcDiscriminator::ascent_step(const std::vector<std::vector<double>>& agent_x,
                                     const std::vector<std::vector<double>>& expert_x,
                                     const std::array<double, 3>& lrs, Mode mode) {
    if (agent_x.empty() || expert_x.empty())
        throw std::invalid_argument("VqcDiscriminator::ascent_step: empty batch");
    const vqc::VqcPolicy view{arch, enc, params, false};
    const vqc::ParamLayout lay = view.layout();
    const std::size_t n_params = static_cast<std::size_t>(lay.total());
    const std::size_t n_a = agent_x.size();
    const std::size_t n_e = expert_x.size();
    const std::vector<double> one{1.0};

    std::vector<double> g = kernels::chunked_sum(
        n_a + n_e, n_params + 1,
        [&](std::size_t item, double* acc) {
            const bool is_agent = item < n_a;
            const std::vector<double>& x = is_agent ? agent_x[item] : expert_x[item - n_a];
            const auto gates = vqc::compile_circuit(params, arch, enc, x);
            const vqc::CircuitEval ev = view.evaluate(x);
            const double r = ev.scaled_values[0];
            const double m = readout_scale();
            const double raw_d = (r + m) / (2.0 * m);
            const double d = std::clamp(raw_d, kDClip, 1.0 - kDClip);
            acc[n_params] += is_agent ? std::log(d) / static_cast<double>(n_a)
                                      : std::log(1.0 - d) / static_cast<double>(n_e);
            if (raw_d <= kDClip || raw_d >= 1.0 - kDClip) return;  // clipped: flat region

            const double dj_dd = is_agent ? 1.0 / (d * static_cast<double>(n_a))
                                          : -1.0 / ((1.0 - d) * static_cast<double>(n_e));
            // D = (r + M)/2M with M = sum |nu_i c_i|:
            //   dD/dr = 1/2M, dD/dnu_j = t_j/2M - r sign(nu_j)|c_j| / 2M^2.
            const auto merged = vqc::merge_scaled_observables(arch, params.nu, one);
            const vqc::ExpectationGrad eg = vqc::adjoint_gradient(gates, arch.n_qubits, merged);
            for (std::size_t j = 0; j < eg.d_mu.size(); ++j)
                acc[j] += dj_dd * eg.d_mu[j] / (2.0 * m);
            for (std::size_t j = 0; j < ev.term_exps[0].size(); ++j) {
                const double dm = (params.nu[0][j] >= 0 ? 1.0 : -1.0) *
                                  std::abs(arch.observables[0].terms[j].coeff);
                const double dd = ev.term_exps[0][j] / (2.0 * m) - r * dm / (2.0 * m * m);
                acc[lay.nu_index(0, static_cast<int>(j))] += dj_dd * dd;
            }
        },
        mode);

    const double objective = g[n_params];
    for (int i = 0; i < lay.n_lambda; ++i) params.lambda[i] += lrs[0] * g[i];
    for (int i = 0; i < lay.n_phi; ++i) params.phi[i] += lrs[1] * g[lay.n_lambda + i];
    for (std::size_t i = 0; i < params.nu[0].size(); ++i)
        params.nu[0][i] += lrs[2] * g[lay.nu_index(0, static_cast<int>(i))];
    return objective;
}

// ---------------------------------------------------------------- rewards

RewardKind parse_reward_kind(const std::string& name) {
    if (name == "neg_log_d") return RewardKind::NegLogD;
    if (name == "log_one_minus_d") return RewardKind::LogOneMinusD;
    if (name == "diff_log") return RewardKind::DiffLog;
    throw ConfigError("unknown reward kind \"" + name +
                      "\" (want neg_log_d, log_one_minus_d or diff_log)");
}

std::string reward_kind_name(RewardKind kind) {
    switch (kind) {
        case RewardKind::NegLogD: return "neg_log_d";
        case RewardKind::LogOneMinusD: return "log_one_minus_d";
        case RewardKind::DiffLog: return "diff_log";
    }
    return "?";
}

double virtual_reward(double d, RewardKind kind) {
    if (!(d >= 0.0 && d <= 1.0))
        throw std::invalid_argument("virtual_reward: D must lie in [0, 1]");
    d = std::clamp(d, kDClip, 1.0 - kDClip);
    switch (kind) {
        case RewardKind::NegLogD: return -std::log(d);
        case RewardKind::LogOneMinusD: return std::log(1.0 - d);
        case RewardKind::DiffLog: return -(std::log(d) - std::log(1.0 - d));
    }
    return 0;
}

std::vector<double> returns_to_go(const std::vector<double>& rewards, double gamma) {
    std::vector<double> out(rewards.size());
    double acc = 0;
    for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
        acc = rewards[t] + gamma * acc;
        out[t] = acc;
    }
    return out;
}

// --------------------------------------------------------------- baseline

LinearBaseline::LinearBaseline(int state_dim_, int horizon_) {
    if (state_dim_ < 1 || horizon_ < 1)
        throw std::invalid_argument("LinearBaseline: bad state dim or horizon");
    state_dim = state_dim_;
    horizon = horizon_;
    coef.assign(n_features(), 0.0);
}

std::vector<double> LinearBaseline::features(std::span<const double> s_norm, int t) const {
    if (static_cast<int>(s_norm.size()) != state_dim)
        throw std::invalid_argument("LinearBaseline: state dim mismatch");
    std::vector<double> f;
    f.reserve(n_features());
    for (double v : s_norm) f.push_back(v);
    for (double v : s_norm) f.push_back(v * v);
    const double u = static_cast<double>(t) / static_cast<double>(horizon);
    f.push_back(u);
    f.push_back(u * u);
    f.push_back(u * u * u);
    f.push_back(1.0);
    return f;
}

double LinearBaseline::predict(std::span<const double> s_norm, int t) const {
    if (!fitted) return 0.0;
    const std::vector<double> f = features(s_norm, t);
    double v = 0;
    for (int i = 0; i < n_features(); ++i) v += coef[i] * f[i];
    return v;
}

namespace {

// Solve A x = b for symmetric positive definite A (in place), plain Cholesky.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (s <= 0) return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return true;
}

}  // namespace

void LinearBaseline::fit(const std::vector<Sample>& batch, double ridge) {
    if (batch.empty()) throw std::invalid_argument("LinearBaseline::fit: empty batch");
    const int nf = n_features();
    std::vector<double> ata(static_cast<std::size_t>(nf) * nf, 0.0);
    std::vector<double> atb(nf, 0.0);
    for (const Sample& s : batch) {
        const std::vector<double> f = features(*s.s_norm, s.t);
        for (int i = 0; i < nf; ++i) {
            atb[i] += f[i] * s.target;
            for (int j = 0; j <= i; ++j) ata[i * nf + j] += f[i] * f[j];
        }
    }
    for (int i = 0; i < nf; ++i)
        for (int j = i + 1; j < nf; ++j) ata[i * nf + j] = ata[j * nf + i];

    // Bump the ridge if the normal equations come out numerically singular.
    for (double reg = ridge;; reg *= 10.0) {
        std::vector<double> a = ata;
        std::vector<double> x = atb;
        for (int i = 0; i < nf; ++i) a[i * nf + i] += reg;
        if (cholesky_solve(a, x, nf)) {
            coef = std::move(x);
            fitted = true;
            return;
        }
        if (reg > 1e6) throw std::runtime_error("LinearBaseline::fit: singular normal equations");
    }
}

void LinearBaseline::gradient_step(const std::vector<Sample>& batch, double lr) {
    if (batch.empty()) throw std::invalid_argument("LinearBaseline::gradient_step: empty batch");
    const int nf = n_features();
    std::vector<double> g(nf, 0.0);
    for (const Sample& s : batch) {
        const std::vector<double> f = features(*s.s_norm, s.t);
        double pred = 0;
        for (int i = 0; i < nf; ++i) pred += coef[i] * f[i];
        const double err = pred - s.target;
        for (int i = 0; i < nf; ++i) g[i] += 2.0 * err * f[i];
    }
    for (int i = 0; i < nf; ++i) coef[i] -= lr * g[i] / static_cast<double>(batch.size());
    fitted = true;
}

// ---------------------------------------------------------------- policy

std::vector<double> reinforce_gradient(const vqc::VqcPolicy& policy,
                                       const std::vector<ScoredTrajectory>& batch,
                                       const LinearBaseline& baseline, double gamma,
                                       Mode mode) {
    if (batch.empty()) throw std::invalid_argument("reinforce_gradient: empty batch");
    std::vector<const std::vector<double>*> states;
    std::vector<int> actions;
    std::vector<const std::vector<double>*> actions_c;
    std::vector<double> weights;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const ScoredTrajectory& tr : batch) {
        std::vector<double> rewards;
        rewards.reserve(tr.steps.size());
        for (const ScoredStep& st : tr.steps) rewards.push_back(st.reward);
        const std::vector<double> rtg = returns_to_go(rewards, gamma);
        for (std::size_t t = 0; t < tr.steps.size(); ++t) {
            const ScoredStep& st = tr.steps[t];
            states.push_back(&st.s_norm);
            if (policy.gaussian) {
                actions_c.push_back(&st.action_c);
            } else {
                actions.push_back(st.action);
            }
            weights.push_back((rtg[t] - baseline.predict(st.s_norm, st.t)) * inv_n);
        }
    }
    if (states.empty()) throw std::invalid_argument("reinforce_gradient: batch has no steps");
    return policy.gaussian
               ? kernels::weighted_score_sum_gaussian(policy, states, actions_c, weights, mode)
               : kernels::weighted_score_sum(policy, states, actions, weights, mode);
}

double ppo_surrogate(const vqc::VqcPolicy& policy, const std::vector<ScoredStep>& steps,
                     const std::vector<double>& advantages, double clip, Mode mode) {
    if (steps.size() != advantages.size())
        throw std::invalid_argument("ppo_surrogate: advantage count mismatch");
    if (steps.empty()) throw std::invalid_argument("ppo_surrogate: empty batch");
    std::vector<double> sum = kernels::chunked_sum(
        steps.size(), 1,
        [&](std::size_t i, double* acc) {
            const ScoredStep& st = steps[i];
            const vqc::ActionDistribution dist = policy.distribution(st.s_norm);
            const double logp = policy.gaussian ? dist.log_prob(std::span<const double>(st.action_c))
                                                : dist.log_prob(st.action);
            const double ratio = std::exp(logp - st.log_prob_old);
            const double a = advantages[i];
            acc[0] += std::min(ratio * a, std::clamp(ratio, 1.0 - clip, 1.0 + clip) * a);
        },
        mode);
    return sum[0] / static_cast<double>(steps.size());
}

PpoStatus ppo_update(vqc::VqcPolicy& policy, const std::vector<ScoredTrajectory>& batch,
                     const LinearBaseline& baseline, double gamma, double clip, double target_kl,
                     int epochs, const std::array<double, 3>& lrs, double lr_sigma, Mode mode) {
    std::vector<ScoredStep> steps;
    std::vector<double> advantages;
    for (const ScoredTrajectory& tr : batch) {
        std::vector<double> rewards;
        for (const ScoredStep& st : tr.steps) rewards.push_back(st.reward);
        const std::vector<double> rtg = returns_to_go(rewards, gamma);
        for (std::size_t t = 0; t < tr.steps.size(); ++t) {
            steps.push_back(tr.steps[t]);
            advantages.push_back(rtg[t] - baseline.predict(tr.steps[t].s_norm, tr.steps[t].t));
        }
    }
    if (steps.empty()) throw std::invalid_argument("ppo_update: batch has no steps");

    PpoStatus status;
    status.surrogate_before = ppo_surrogate(policy, steps, advantages, clip, mode);
    const std::size_t n = steps.size();
    const std::size_t n_params = static_cast<std::size_t>(policy.layout().total());

    for (int epoch = 0; epoch < epochs; ++epoch) {
        // One pass: surrogate gradient plus the KL estimate of the current
        // policy against the sampler.
        std::vector<double> acc = kernels::chunked_sum(
            n, n_params + 1,
            [&](std::size_t i, double* out) {
                const ScoredStep& st = steps[i];
                const vqc::LogProbGrad g =
                    policy.gaussian
                        ? policy.log_prob_gradient(st.s_norm, std::span<const double>(st.action_c))
                        : policy.log_prob_gradient(st.s_norm, st.action);
                const double ratio = std::exp(g.log_prob - st.log_prob_old);
                const double a = advantages[i];
                const bool clipped = (a >= 0 && ratio > 1.0 + clip) || (a < 0 && ratio < 1.0 - clip);
                if (!clipped) {
                    const double w = ratio * a;
                    for (std::size_t j = 0; j < n_params; ++j) out[j] += w * g.grad[j];
                }
                out[n_params] += st.log_prob_old - g.log_prob;
            },
            mode);
        status.approx_kl = acc[n_params] / static_cast<double>(n);
        if (epoch > 0 && status.approx_kl > target_kl) break;
        std::vector<double> grad(n_params);
        for (std::size_t j = 0; j < n_params; ++j) grad[j] = acc[j] / static_cast<double>(n);
        policy.apply_update(grad, lrs, lr_sigma, +1.0);
        ++status.epochs_run;
    }
    status.surrogate_after = ppo_surrogate(policy, steps, advantages, clip, mode);
    return status;
}

// ------------------------------------------------------------------ train

namespace {

std::vector<double> disc_input(const std::vector<double>& s_norm, double action, bool discrete,
                               int n_actions) {
    std::vector<double> x = s_norm;
    if (discrete) {
        const int a = static_cast<int>(action);
        for (int i = 0; i < n_actions; ++i) x.push_back(i == a ? 1.0 : 0.0);
    } else {
        x.push_back(action);
    }
    return x;
}

}  // namespace

QgailResult qgail_train(const demos::DemoDataset& demo_set, const QgailConfig& config,
                        const vqc::VqcPolicy& initial_policy) {
    const auto env = envs::make_env(config.env_id);
    const envs::EnvSpec& sp = env->spec();
    if (demo_set.env_id != sp.id)
        throw ConfigError("qgail_train: demos are for " + demo_set.env_id + ", env is " + sp.id);
    if (demo_set.trajectories.empty()) throw ConfigError("qgail_train: empty demo dataset");
    if (initial_policy.gaussian == sp.discrete)
        throw ConfigError("qgail_train: policy kind does not match the env's action space");
    if (sp.discrete && initial_policy.arch.n_actions() != sp.n_actions)
        throw ConfigError("qgail_train: policy has " +
                          std::to_string(initial_policy.arch.n_actions()) + " observables, env has " +
                          std::to_string(sp.n_actions) + " actions");

    vqc::VqcPolicy policy = initial_policy;
    const std::array<double, 3> lrs{config.train_lambda ? config.lr_policy[0] : 0.0,
                                    config.lr_policy[1],
                                    config.train_nu ? config.lr_policy[2] : 0.0};

    // Expert pairs as discriminator inputs, built once.
    std::vector<std::vector<double>> expert_inputs;
    expert_inputs.reserve(demo_set.n_pairs());
    for (const auto& tr : demo_set.trajectories)
        for (std::size_t i = 0; i < tr.actions.size(); ++i)
            expert_inputs.push_back(disc_input(policy.normalize(tr.states[i]), tr.actions[i],
                                               sp.discrete, sp.n_actions));

    const int disc_in = sp.state_dim + (sp.discrete ? sp.n_actions : 1);
    std::mt19937_64 init_rng = make_rng(config.seed, 0xd15cULL);
    MlpDiscriminator disc = MlpDiscriminator::init(disc_in, init_rng, config.spectral_norm);
    VqcDiscriminator qdisc;
    if (config.quantum_disc) qdisc = VqcDiscriminator::init(disc_in, config.disc_vqc_layers, init_rng);

    LinearBaseline baseline(sp.state_dim, sp.max_steps);
    std::mt19937_64 train_rng = make_rng(config.seed, 0x7a11ULL);

    QgailResult result;
    result.best_policy = policy;
    const kernels::ActFn actor = kernels::policy_actor(policy);

    for (int iter = 0; iter < config.iterations; ++iter) {
        if (result.env_episodes + config.traj_per_iter > config.max_env_episodes) break;

        const auto trajs = kernels::collect_trajectories(
            config.env_id, actor, config.traj_per_iter, mix_seed(config.seed, 0xc0deULL, iter),
            config.mode);
        result.env_episodes += static_cast<long long>(trajs.size());

        // Score the batch with the current discriminator.
        std::vector<ScoredTrajectory> scored(trajs.size());
        std::vector<std::vector<double>> agent_inputs;
        double entropy_sum = 0, reward_sum = 0;
        std::size_t n_steps = 0;
        for (std::size_t k = 0; k < trajs.size(); ++k) {
            scored[k].steps.reserve(trajs[k].size());
            for (const envs::Transition& t : trajs[k].transitions) {
                ScoredStep st;
                st.s_norm = policy.normalize(t.state);
                st.t = t.t;
                std::vector<double> x = disc_input(st.s_norm, t.action, sp.discrete, sp.n_actions);
                const double d = config.quantum_disc ? qdisc.forward(x) : disc.forward(x);
                st.reward = virtual_reward(d, config.reward_kind);
                const vqc::ActionDistribution dist = policy.distribution(st.s_norm);
                entropy_sum += dist.entropy();
                if (sp.discrete) {
                    st.action = static_cast<int>(t.action);
                    st.log_prob_old = dist.log_prob(st.action);
                } else {
                    st.action_c = {t.action};
                    st.log_prob_old = dist.log_prob(std::span<const double>(st.action_c));
                }
                reward_sum += st.reward;
                agent_inputs.push_back(std::move(x));
                scored[k].steps.push_back(std::move(st));
                ++n_steps;
            }
        }
        result.env_steps += static_cast<long long>(n_steps);

        // Policy ascent using the baseline fitted on the previous batch.
        if (config.ppo) {
            ppo_update(policy, scored, baseline, config.gamma, config.ppo_clip,
                       config.ppo_target_kl, config.ppo_epochs, lrs, config.lr_sigma, config.mode);
        } else {
            const std::vector<double> g =
                reinforce_gradient(policy, scored, baseline, config.gamma, config.mode);
            policy.apply_update(g, lrs, config.lr_sigma, +1.0);
        }

        // Refit the baseline on this batch for the next iteration.
        {
            std::vector<LinearBaseline::Sample> samples;
            samples.reserve(n_steps);
            for (const ScoredTrajectory& tr : scored) {
                std::vector<double> rewards;
                for (const ScoredStep& st : tr.steps) rewards.push_back(st.reward);
                const std::vector<double> rtg = returns_to_go(rewards, config.gamma);
                for (std::size_t t = 0; t < tr.steps.size(); ++t)
                    samples.push_back({&tr.steps[t].s_norm, tr.steps[t].t, rtg[t]});
            }
            if (config.baseline_gradient_mode) {
                baseline.gradient_step(samples, config.lr_baseline);
            } else {
                baseline.fit(samples);
            }
        }

        // Discriminator ascent on this batch vs an equal-sized expert sample.
        std::vector<std::vector<double>> expert_batch(agent_inputs.size());
        for (std::size_t i = 0; i < agent_inputs.size(); ++i)
            expert_batch[i] = expert_inputs[train_rng() % expert_inputs.size()];
        QgailRecord rec;
        if (config.quantum_disc) {
            rec.disc_objective =
                qdisc.ascent_step(agent_inputs, expert_batch, config.lr_disc_vqc, config.mode);
        } else {
            rec.disc_objective = disc.ascent_step(agent_inputs, expert_batch, config.lr_disc,
                                                  config.mode);
            if (config.disc_observer) config.disc_observer(disc);
        }

        rec.iteration = iter;
        rec.episodes = result.env_episodes;
        rec.entropy = entropy_sum / static_cast<double>(n_steps);
        rec.mean_virtual_reward = reward_sum / static_cast<double>(n_steps);

        const bool last =
            iter == config.iterations - 1 ||
            result.env_episodes + config.traj_per_iter > config.max_env_episodes;
        if (iter % config.eval_interval == 0 || last) {
            const kernels::EvalStats st =
                kernels::evaluate_policy(config.env_id, kernels::policy_actor(policy),
                                         config.eval_episodes,
                                         mix_seed(config.seed, 0xeba1ULL, iter), config.mode);
            rec.evaluated = true;
            rec.eval_mean = st.mean;
            rec.eval_std = st.stddev;
            if (st.mean > result.best_eval) {
                result.best_eval = st.mean;
                result.best_policy = policy;
            }
            result.curve.push_back(rec);
            if (!std::isnan(config.target_return) && st.mean >= config.target_return) {
                result.reached_target = true;
                break;
            }
        } else {
            result.curve.push_back(rec);
        }
    }

    result.final_policy = policy;
    if (result.best_eval == -std::numeric_limits<double>::infinity()) {
        result.best_policy = result.final_policy;
    }
    return result;
}

}  // namespace qil::qgail
