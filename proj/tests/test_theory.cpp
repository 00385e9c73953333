#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qil/rng.hpp"
#include "qil/theory.hpp"

using namespace qil;
using theory::TabularMdp;
using theory::TabularPolicy;

TEST_CASE("validation rejects malformed MDPs and policies") {
    std::mt19937_64 rng = make_rng(61);
    TabularMdp mdp = theory::random_mdp(rng, 4, 3, 0.9);
    CHECK_NOTHROW(mdp.validate());

    TabularMdp bad = mdp;
    bad.transition[0] += 0.1;  // row no longer sums to one
    CHECK_THROWS(bad.validate());

    bad = mdp;
    bad.reward[0] = mdp.r_max + 1;
    CHECK_THROWS(bad.validate());

    bad = mdp;
    bad.gamma = 1.0;
    CHECK_THROWS(bad.validate());

    bad = mdp;
    bad.rho0[0] += 0.2;
    CHECK_THROWS(bad.validate());

    TabularPolicy pi = theory::random_policy(rng, mdp.n_states, mdp.n_actions);
    CHECK_NOTHROW(pi.validate());
    pi.p[0] += 0.5;
    CHECK_THROWS(pi.validate());
}

TEST_CASE("occupancy: gamma = 0 reduces to the initial distribution") {
    std::mt19937_64 rng = make_rng(62);
    TabularMdp mdp = theory::random_mdp(rng, 5, 3, 0.9);
    mdp.gamma = 0.0;
    const TabularPolicy pi = theory::random_policy(rng, mdp.n_states, mdp.n_actions);
    const theory::Occupancy occ = theory::occupancy(mdp, pi);
    for (int s = 0; s < mdp.n_states; ++s)
        CHECK(occ.d[s] == doctest::Approx(mdp.rho0[s]).epsilon(1e-12));
    // rho factorizes as d(s) * pi(a|s).
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            CHECK(occ.rho[s * mdp.n_actions + a] ==
                  doctest::Approx(occ.d[s] * pi.p[s * mdp.n_actions + a]).epsilon(1e-12));
}

TEST_CASE("occupancy: single-state MDP concentrates all mass") {
    TabularMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.transition = {1.0, 1.0};  // both actions loop
    mdp.reward = {0.3, -0.2};
    mdp.gamma = 0.9;
    mdp.rho0 = {1.0};
    mdp.validate();
    TabularPolicy pi{1, 2, {0.25, 0.75}};
    const theory::Occupancy occ = theory::occupancy(mdp, pi);
    CHECK(occ.d[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(occ.rho[0] == doctest::Approx(0.25).epsilon(1e-14));

    // Constant reward c yields J = c / (1 - gamma).
    TabularMdp flat = mdp;
    flat.reward = {0.5, 0.5};
    CHECK(theory::exact_return(flat, pi) == doctest::Approx(0.5 / (1 - 0.9)).epsilon(1e-12));
}

TEST_CASE("occupancy matches the truncated power series") {
    std::mt19937_64 rng = make_rng(63);
    for (int trial = 0; trial < 10; ++trial) {
        TabularMdp mdp = theory::random_mdp(rng, 5, 3, trial % 2 == 0 ? 0.9 : 0.99);
        const TabularPolicy pi = theory::random_policy(rng, mdp.n_states, mdp.n_actions);
        const theory::Occupancy occ = theory::occupancy(mdp, pi);
        const std::vector<double> series = oracles::occupancy_series(mdp, pi, 1e-14);
        double sum = 0;
        for (int s = 0; s < mdp.n_states; ++s) {
            CHECK(occ.d[s] == doctest::Approx(series[s]).epsilon(1e-10));
            sum += occ.d[s];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("exact return matches Monte Carlo rollouts") {
    std::mt19937_64 rng = make_rng(64);
    TabularMdp mdp = theory::random_mdp(rng, 4, 3, 0.9);
    const TabularPolicy pi = theory::random_policy(rng, mdp.n_states, mdp.n_actions);
    const double exact = theory::exact_return(mdp, pi);
    const oracles::McEstimate mc = oracles::mc_return(mdp, pi, 8000, 300, rng);
    CHECK(std::abs(exact - mc.mean) < 3 * mc.se + 1e-6);
}

TEST_CASE("divergences: hand values and edge cases") {
    const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
    CHECK(theory::tv_distance(p, q) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(theory::tv_distance(p, p) == 0.0);
    const double want_kl = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
    CHECK(theory::kl_divergence(p, q) == doctest::Approx(want_kl).epsilon(1e-14));
    CHECK(theory::kl_divergence(p, p) == 0.0);
    const std::vector<double> point{1.0, 0.0};
    CHECK(std::isinf(theory::kl_divergence(p, point)));  // support mismatch
    CHECK(theory::kl_divergence(point, q) ==
          doctest::Approx(std::log(1.0 / 0.25)).epsilon(1e-14));  // 0 log 0 = 0
    const std::vector<double> wide{0.1, 0.2, 0.7};
    CHECK_THROWS(theory::tv_distance(p, wide));
}

TEST_CASE("pinsker: tv^2 <= kl/2 on random distribution pairs") {
    std::mt19937_64 rng = make_rng(65);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        std::vector<double> p(n), q(n);
        double sp = 0, sq = 0;
        for (int i = 0; i < n; ++i) {
            p[i] = 0.05 + uniform01(rng);
            q[i] = 0.05 + uniform01(rng);
            sp += p[i];
            sq += q[i];
        }
        for (int i = 0; i < n; ++i) {
            p[i] /= sp;
            q[i] /= sq;
        }
        const double tv = theory::tv_distance(p, q);
        const double kl = theory::kl_divergence(p, q);
        CHECK(tv * tv <= kl / 2 + 1e-12);
    }
}

TEST_CASE("softmax perturbations respect the exp(2 beta eps) envelope") {
    std::mt19937_64 rng = make_rng(66);
    for (int trial = 0; trial < 50; ++trial) {
        const int S = 3, A = 3;
        const double beta = 0.5 + uniform01(rng) * 1.5;
        const double eps = uniform01(rng) * 0.2;
        const std::vector<double> logits = theory::random_logits(rng, S, A);
        const TabularPolicy pi = theory::softmax_policy_from_logits(logits, S, A, beta);
        for (bool adversarial : {false, true}) {
            const TabularPolicy tilde =
                theory::perturb_policy(logits, S, A, beta, eps, adversarial, rng);
            tilde.validate();
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const double ratio = tilde.p[s * A + a] / pi.p[s * A + a];
                    CHECK(ratio <= std::exp(2 * beta * eps) + 1e-12);
                    CHECK(ratio >= std::exp(-2 * beta * eps) - 1e-12);
                }
        }
        // eps = 0 reproduces the softmax policy exactly.
        const TabularPolicy same = theory::perturb_policy(logits, S, A, beta, 0.0, false, rng);
        for (std::size_t i = 0; i < same.p.size(); ++i) CHECK(same.p[i] == pi.p[i]);
    }
    CHECK_THROWS(theory::perturb_policy(theory::random_logits(rng, 2, 2), 2, 2, 1.0, -0.1,
                                        false, rng));
}

TEST_CASE("expected perturbation TV stays below |sinh(2 beta eps)|") {
    std::mt19937_64 rng = make_rng(67);
    for (int trial = 0; trial < 1000; ++trial) {
        const int S = 2 + static_cast<int>(rng() % 4), A = 2 + static_cast<int>(rng() % 2);
        const double beta = 0.5 + uniform01(rng) * 1.5;
        const double eps = uniform01(rng) * 0.1;
        const std::vector<double> logits = theory::random_logits(rng, S, A);
        const TabularPolicy pi = theory::softmax_policy_from_logits(logits, S, A, beta);
        const TabularPolicy tilde =
            theory::perturb_policy(logits, S, A, beta, eps, trial % 2 == 0, rng);
        std::vector<double> weights(S, 1.0 / S);
        const double lhs = theory::expected_tv(weights, tilde, pi);
        CHECK(lhs <= std::abs(std::sinh(2 * beta * eps)) + 1e-12);
    }
}

TEST_CASE("sinh envelope grows monotonically in beta * eps") {
    double prev = -1;
    for (double x : {0.0, 0.1, 0.5, 1.0, 2.0}) {
        const double v = std::abs(std::sinh(2 * x * 0.1));
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("check_bounds arithmetic on a fixed instance") {
    std::mt19937_64 rng = make_rng(68);
    TabularMdp mdp = theory::random_mdp(rng, 4, 3, 0.9);
    const int S = mdp.n_states, A = mdp.n_actions;
    const double beta = 1.0, eps = 0.05;
    const TabularPolicy pi_e = theory::random_policy(rng, S, A);
    const std::vector<double> logits = theory::random_logits(rng, S, A);
    const TabularPolicy pi_theta = theory::softmax_policy_from_logits(logits, S, A, beta);
    const TabularPolicy tilde = theory::perturb_policy(logits, S, A, beta, eps, true, rng);

    const theory::BoundReport rep = theory::check_bounds(mdp, pi_e, pi_theta, tilde, beta, eps);
    REQUIRE(rep.checks.size() == 8);
    CHECK(rep.ok());
    CHECK(rep.min_slack() >= -1e-9);

    // Recompute the headline quantities independently.
    const theory::Occupancy occ_e = theory::occupancy(mdp, pi_e);
    const theory::Occupancy occ_t = theory::occupancy(mdp, pi_theta);
    CHECK(rep.j_expert == doctest::Approx(theory::exact_return(mdp, pi_e)).epsilon(1e-12));
    CHECK(rep.j_theta == doctest::Approx(theory::exact_return(mdp, pi_theta)).epsilon(1e-12));
    CHECK(rep.delta == doctest::Approx(theory::expected_kl(occ_e.d, pi_e, tilde)).epsilon(1e-12));
    CHECK(rep.sinh_term == doctest::Approx(std::abs(std::sinh(2 * beta * eps))).epsilon(1e-12));

    const auto find = [&](const std::string& name) {
        for (const theory::BoundCheck& c : rep.checks)
            if (c.name == name) return c;
        FAIL("missing check ", name);
        return theory::BoundCheck{};
    };

    const double tv_theta_e = theory::expected_tv(occ_e.d, pi_theta, pi_e);
    const double tv_tilde_theta = theory::expected_tv(occ_e.d, tilde, pi_theta);
    const double tv_tilde_e = theory::expected_tv(occ_e.d, tilde, pi_e);

    const theory::BoundCheck occ_tv = find("occupancy_tv");
    CHECK(occ_tv.lhs == doctest::Approx(theory::tv_distance(occ_t.d, occ_e.d)).epsilon(1e-12));
    CHECK(occ_tv.rhs ==
          doctest::Approx(mdp.gamma / (1 - mdp.gamma) * tv_theta_e).epsilon(1e-12));

    const theory::BoundCheck sa_tv = find("state_action_tv");
    const double tv_rho = theory::tv_distance(occ_t.rho, occ_e.rho);
    CHECK(sa_tv.lhs == doctest::Approx(tv_rho).epsilon(1e-12));
    CHECK(sa_tv.rhs == doctest::Approx(tv_theta_e / (1 - mdp.gamma)).epsilon(1e-12));

    const theory::BoundCheck value_gap = find("value_gap");
    CHECK(value_gap.lhs == doctest::Approx(std::abs(rep.j_expert - rep.j_theta)).epsilon(1e-12));
    CHECK(value_gap.rhs ==
          doctest::Approx(2 * mdp.r_max / (1 - mdp.gamma) * tv_rho).epsilon(1e-12));

    const theory::BoundCheck sinh_check = find("perturbation_sinh");
    CHECK(sinh_check.lhs == doctest::Approx(tv_tilde_theta).epsilon(1e-12));
    CHECK(sinh_check.rhs == doctest::Approx(rep.sinh_term).epsilon(1e-12));

    const theory::BoundCheck pl = find("pinsker_loose");
    const theory::BoundCheck pt = find("pinsker_tight");
    CHECK(pl.lhs == doctest::Approx(tv_tilde_e).epsilon(1e-12));
    CHECK(pl.lhs == pt.lhs);  // both bound the same expected TV
    CHECK(pl.rhs == doctest::Approx(std::sqrt(2 * rep.delta)).epsilon(1e-12));
    CHECK(pt.rhs == doctest::Approx(std::sqrt(rep.delta / 2)).epsilon(1e-12));

    const double scale = 2 * mdp.r_max / ((1 - mdp.gamma) * (1 - mdp.gamma));
    const theory::BoundCheck final_bound = find("final_bound");
    CHECK(final_bound.lhs == value_gap.lhs);
    CHECK(final_bound.rhs ==
          doctest::Approx(scale * (rep.sinh_term + std::sqrt(2 * rep.delta))).epsilon(1e-12));

    const theory::BoundCheck tight = find("final_bound_tight");
    CHECK(tight.rhs ==
          doctest::Approx(scale * (rep.sinh_term + std::sqrt(rep.delta / 2))).epsilon(1e-12));
    CHECK(tight.rhs <= final_bound.rhs);
}

TEST_CASE("verify_bounds sweeps the grid with zero violations") {
    theory::VerifyConfig cfg;
    cfg.instances = 10;
    cfg.seed = 123;
    const theory::VerifySummary summary = theory::verify_bounds(cfg);
    // 10 MDPs x 3 betas x 3 epsilons x {uniform, adversarial}.
    CHECK(summary.results.size() == 10 * 3 * 3 * 2);
    CHECK(summary.violations == 0);
    CHECK(summary.min_slack >= -1e-9);

    // Deterministic for a fixed seed.
    const theory::VerifySummary again = theory::verify_bounds(cfg);
    CHECK(again.min_slack == summary.min_slack);

    // The grid actually contains the advertised parameter values.
    bool saw_eps0 = false, saw_adversarial = false, saw_beta2 = false, saw_gamma99 = false;
    for (const theory::InstanceResult& r : summary.results) {
        if (r.epsilon == 0.0) saw_eps0 = true;
        if (r.adversarial) saw_adversarial = true;
        if (r.beta == 2.0) saw_beta2 = true;
        if (r.gamma == 0.99) saw_gamma99 = true;
        CHECK(r.report.checks.size() == 8);
    }
    CHECK(saw_eps0);
    CHECK(saw_adversarial);
    CHECK(saw_beta2);
    CHECK(saw_gamma99);

    CHECK_THROWS(theory::verify_bounds(theory::VerifyConfig{.instances = 0}));
}
