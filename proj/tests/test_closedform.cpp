#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "treepin/closedform.hpp"

using namespace treepin;

namespace {
const DisorderSpec kStdGauss = DisorderSpec::gaussian(0.0, 1.0);
const DisorderSpec kFairBern = DisorderSpec::bernoulli(0.5, -1.0, 1.0);
// p < 1/4 keeps beta_c finite for every arity used below
const DisorderSpec kRareBern = DisorderSpec::bernoulli(0.2, -1.0, 1.0);
const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);
}  // namespace

TEST_CASE("f_gap") {
    CHECK(f_gap(kStdGauss, 2, 0.0) == doctest::Approx(kLog2).epsilon(1e-14));
    CHECK(f_gap(kFairBern, 3, 0.0) == doctest::Approx(kLog3).epsilon(1e-14));
    // Gaussian f(beta) = log 2 - beta^2/2 vanishes at sqrt(2 log 2)
    CHECK(std::fabs(f_gap(kStdGauss, 2, std::sqrt(2.0 * kLog2))) < 1e-10);
    for (const auto& spec : {kStdGauss, kFairBern}) {
        double prev = f_gap(spec, 2, 0.05);
        for (double b = 0.15; b < 4.0; b += 0.1) {
            const double cur = f_gap(spec, 2, b);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("beta_c bisection matches the Gaussian closed form") {
    for (int d : {2, 3, 4}) {
        for (double sigma : {0.5, 1.0, 2.0}) {
            const auto cd = beta_c(DisorderSpec::gaussian(0.0, sigma), d);
            REQUIRE(cd.finite());
            CHECK(std::fabs(cd.beta_c - std::sqrt(2.0 * std::log(double(d))) / sigma) < 1e-8);
            CHECK(std::fabs(f_gap(DisorderSpec::gaussian(0.0, sigma), d, cd.beta_c)) < 1e-9);
            CHECK(cd.phi_cap == doctest::Approx(cd.lambda_at_beta_c + std::log(double(d))));
        }
    }
}

TEST_CASE("beta_c is infinite for bounded disorder with a heavy top atom") {
    // bounded disorder with P(V = ess sup) >= 1/d has no root
    CHECK_FALSE(beta_c(DisorderSpec::bernoulli(0.6, -1.0, 1.0), 2).finite());
    CHECK(beta_c(DisorderSpec::bernoulli(0.4, -1.0, 1.0), 2).finite());
    CHECK_FALSE(beta_c(DisorderSpec::bernoulli(0.4, -1.0, 1.0), 4).finite());
    CHECK(beta_c(DisorderSpec::bernoulli(0.2, -1.0, 1.0), 4).finite());
    // unbounded disorder always has one
    CHECK(beta_c(DisorderSpec::gaussian(10.0, 0.3), 2).finite());
}

TEST_CASE("beta_c rejects degenerate disorder") {
    CHECK_THROWS_AS(beta_c(DisorderSpec::constant(1.0), 2), DegenerateDisorder);
    CHECK_THROWS_AS(beta_c(DisorderSpec::bernoulli(1.0, 0.0, 1.0), 2), DegenerateDisorder);
    CHECK_THROWS_AS(beta_c(DisorderSpec::bernoulli(0.0, 0.0, 1.0), 2), DegenerateDisorder);
}

TEST_CASE("beta_c is invariant under mean shifts") {
    const auto a = beta_c(DisorderSpec::gaussian(0.0, 1.0), 3);
    const auto b = beta_c(DisorderSpec::gaussian(5.0, 1.0), 3);
    CHECK(std::fabs(a.beta_c - b.beta_c) < 1e-10);
    const auto c = beta_c(DisorderSpec::shifted(kRareBern, 3.0), 2);
    const auto e = beta_c(kRareBern, 2);
    REQUIRE(c.finite());
    CHECK(std::fabs(c.beta_c - e.beta_c) < 1e-10);
}

TEST_CASE("critical cache is transparent") {
    const auto cached = beta_c(kStdGauss, 2);
    set_critical_cache_enabled(false);
    const auto fresh = beta_c(kStdGauss, 2);
    set_critical_cache_enabled(true);
    CHECK(cached.beta_c == fresh.beta_c);
    CHECK(cached.lambda_at_beta_c == fresh.lambda_at_beta_c);
    CHECK(cached.phi_cap == fresh.phi_cap);
}

TEST_CASE("phi branches and continuity") {
    CHECK(phi(kStdGauss, 2, 0.0) == doctest::Approx(kLog2));
    CHECK(phi(kStdGauss, 2, 2.0) == doctest::Approx(2.3548200450309494).epsilon(1e-8));
    const double bc = beta_c(kStdGauss, 2).beta_c;
    CHECK(std::fabs(phi(kStdGauss, 2, bc - 1e-7) - phi(kStdGauss, 2, bc + 1e-7)) < 1e-6);
    // infinite beta_c: always the weak-disorder branch
    const auto heavy = DisorderSpec::bernoulli(0.6, -1.0, 1.0);
    CHECK(phi(heavy, 2, 50.0) ==
          doctest::Approx(heavy.log_mgf(50.0) + kLog2));
}

TEST_CASE("phi upper bound and strictness above beta_c") {
    for (const auto& spec : {kStdGauss, kFairBern}) {
        const auto cd = beta_c(spec, 3);
        for (double b = 0.1; b < 4.0; b += 0.1) {
            const double cap = spec.log_mgf(b) + kLog3;
            CHECK(phi(spec, 3, b) <= cap + 1e-12);
            if (cd.finite() && b > cd.beta_c * 1.01) CHECK(cap - phi(spec, 3, b) > 1e-12);
        }
    }
}

TEST_CASE("phi is convex and nondecreasing") {
    for (const auto& spec : {kStdGauss, kFairBern}) {
        double prev = phi(spec, 2, 0.0);
        double prev_slope = -1e300;
        for (double b = 0.1; b <= 5.0; b += 0.1) {
            const double cur = phi(spec, 2, b);
            CHECK(cur >= prev - 1e-12);
            const double slope = (cur - prev) / 0.1;
            CHECK(slope >= prev_slope - 1e-12);
            prev = cur;
            prev_slope = slope;
        }
    }
}

TEST_CASE("phi_tilde") {
    CHECK_THROWS_AS(phi_tilde(kStdGauss, 3, 3, 1.0), ConfigError);
    CHECK(phi_tilde(kStdGauss, 3, 2, 0.0) == doctest::Approx(kLog2));
    CHECK(phi_tilde(kStdGauss, 4, 2, 0.5) == doctest::Approx(0.125 + kLog2).epsilon(1e-12));
    // strong-disorder branch still uses the arity-d critical point
    const auto cd = beta_c(kStdGauss, 4);
    const double b = 2.0 * cd.beta_c;
    CHECK(phi_tilde(kStdGauss, 4, 2, b) ==
          doctest::Approx(b / cd.beta_c * (cd.lambda_at_beta_c + kLog2)));
}

TEST_CASE("deterministic model closed forms") {
    CHECK(f_det(1.7, 0.0, 3, 2) == doctest::Approx(kLog3));
    CHECK(u_c_det(1.0, 2, 1) == doctest::Approx(kLog2).epsilon(1e-14));
    // both branches meet at the critical curve
    for (double beta : {0.5, 1.0, 2.0}) {
        const double uc = u_c_det(beta, 3, 2);
        CHECK(f_det(beta, uc, 3, 2) == doctest::Approx(kLog3).epsilon(1e-12));
        CHECK(beta * uc + kLog2 == doctest::Approx(kLog3).epsilon(1e-12));
    }
    CHECK_THROWS_AS(u_c_det(0.0, 2, 1), BetaZero);
}

TEST_CASE("branch model closed forms (Gaussian example)") {
    const double bc = std::sqrt(2.0 * kLog2);
    for (double b : {0.3, 0.7, 1.0}) {
        CHECK(u_c_br(kStdGauss, 2, b) == doctest::Approx(0.5 * b + kLog2 / b).epsilon(1e-10));
    }
    for (double b : {bc, 1.5, 3.0}) {
        CHECK(u_c_br(kStdGauss, 2, b) == doctest::Approx(bc).epsilon(1e-8));
    }
    CHECK(u_c_br(kStdGauss, 2, 2.0) == doctest::Approx(1.1774100225154747).epsilon(1e-8));
    CHECK_THROWS_AS(u_c_br(kStdGauss, 2, 0.0), BetaZero);

    // f_br = max of the pinned line and phi
    for (double b : {0.5, 2.0}) {
        const double uc = u_c_br(kStdGauss, 2, b);
        CHECK(f_br(kStdGauss, 2, b, uc + 1.0) == doctest::Approx(b * (uc + 1.0)));
        CHECK(f_br(kStdGauss, 2, b, uc - 1.0) == doctest::Approx(phi(kStdGauss, 2, b)));
    }
}

TEST_CASE("quenched randomness shifts the critical curve") {
    for (const auto& spec : {kStdGauss, kFairBern}) {
        for (double b = 0.1; b <= 4.0; b += 0.13) {
            CHECK(u_c_br(spec, 2, b) > u_c_det(b, 2, 1) + 1e-9);
        }
    }
}

TEST_CASE("small-beta asymptotics of the branch critical curve") {
    // mean-zero bulk: beta * u_c - (sigma^2 beta^2 / 2 + log d) -> 0
    double prev = 1e300;
    for (double b : {0.8, 0.4, 0.2, 0.1, 0.05}) {
        const double gap = std::fabs(u_c_br(kFairBern, 2, b) * b - (0.5 * b * b + kLog2));
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("F line") {
    CHECK(F_line(kStdGauss, 3, 2, 1.0) == doctest::Approx(0.90546510810816438).epsilon(1e-12));
    CHECK(F_line(kStdGauss, 2, 1, 1.3) ==
          doctest::Approx((kStdGauss.log_mgf(1.3) + kLog2) / 1.3));
    CHECK_THROWS_AS(F_line(kStdGauss, 3, 2, 0.0), BetaZero);
    // the depinning threshold Psi equals F evaluated at beta_c
    const auto cd = beta_c(kStdGauss, 3);
    const double psi = (cd.phi_cap - kLog2) / cd.beta_c;
    CHECK(F_line(kStdGauss, 3, 2, cd.beta_c) == doctest::Approx(psi).epsilon(1e-12));
}

TEST_CASE("J line") {
    const auto cd = beta_c(kStdGauss, 3);
    CHECK_THROWS_AS(J_line(kStdGauss, 3, 2, 0.5), OutOfDomain);
    CHECK_THROWS_AS(J_line(kStdGauss, 3, 2, cd.beta_c), OutOfDomain);
    // J(beta_c+) -> F(beta_c)
    const double fbc = F_line(kStdGauss, 3, 2, cd.beta_c);
    CHECK(std::fabs(J_line(kStdGauss, 3, 2, cd.beta_c * (1.0 + 1e-6)) - fbc) < 1e-3);
    // d1 = 1 collapses J to phi/beta
    const double b = 2.0 * cd.beta_c;
    CHECK(J_line(kStdGauss, 3, 1, b) == doctest::Approx(phi(kStdGauss, 3, b) / b).epsilon(1e-12));
}

TEST_CASE("boundary curves are strictly ordered above the critical point") {
    const std::vector<std::pair<int, int>> arities = {{3, 2}, {4, 2}, {4, 3}};
    for (const auto& spec : {kStdGauss, kRareBern}) {
        for (auto [d, d1] : arities) {
            const auto cd = beta_c(spec, d);
            REQUIRE(cd.finite());
            const double fbc = (cd.phi_cap - std::log(double(d1))) / cd.beta_c;
            for (int i = 1; i <= 50; ++i) {
                const double b = cd.beta_c * (1.0 + 3.0 * i / 50.0);  // (beta_c, 4 beta_c]
                const double j = J_line(spec, d, d1, b);
                const double mid = (phi(spec, d, b) - std::log(double(d1))) / b;
                const double f = F_line(spec, d, d1, b);
                CHECK(j - fbc > 1e-12);
                CHECK(mid - j > 1e-12);
                CHECK(f - mid > 1e-12);
            }
        }
    }
}

TEST_CASE("theta branch selection") {
    CHECK(log_theta(kStdGauss, 2, 0.0) == doctest::Approx(2.0 * kLog2));
    CHECK(log_theta(kStdGauss, 2, 2.0) == doctest::Approx(8.0 + kLog2).epsilon(1e-12));
    const auto cd = beta_c(kStdGauss, 2);
    for (double b = cd.beta_c * 1.05; b < 4.0; b += 0.2) {
        CHECK(log_theta(kStdGauss, 2, b) ==
              doctest::Approx(kStdGauss.log_mgf(2.0 * b) + kLog2));
    }
}

TEST_CASE("t_star, L and the J identity") {
    const auto cd = beta_c(kStdGauss, 3);
    const double b = 1.7 * cd.beta_c;
    CHECK_THROWS_AS(t_star(kStdGauss, 3, 1, b), DegenerateDefectArity);
    CHECK_THROWS_AS(t_star(kStdGauss, 3, 2, 0.5 * cd.beta_c), OutOfDomain);
    const double ts = t_star(kStdGauss, 3, 2, b);
    CHECK(ts > 0.0);
    CHECK(ts < 1.0);
    CHECK(L_func(kStdGauss, 3, b, 1.0) == doctest::Approx(phi(kStdGauss, 3, b)).epsilon(1e-14));
    CHECK_THROWS_AS(L_func(kStdGauss, 3, b, 0.0), OutOfDomain);
    // J = (L(t*) - log d1) / beta
    CHECK(std::fabs(J_line(kStdGauss, 3, 2, b) -
                    (L_func(kStdGauss, 3, b, ts) - kLog2) / b) < 1e-10);
    // boundary identity (Theta / d^2 e^{2 lambda})^{1-t*} = d1^{t*}
    const double lhs =
        (1.0 - ts) * (log_theta(kStdGauss, 3, b) - 2.0 * kStdGauss.log_mgf(b) - 2.0 * kLog3);
    CHECK(std::fabs(lhs - ts * kLog2) < 1e-10);
}

TEST_CASE("second moment of the homogeneous partition function") {
    // frozen from exact enumeration over the 4 assignments at n = 1
    CHECK(log_second_moment_hd(kFairBern, 2, 1.0, 1) ==
          doctest::Approx(std::log(12.286587073250894)).epsilon(1e-12));
    // deterministic disorder: Z = d, so E Z^2 = d^2
    CHECK(log_second_moment_hd(DisorderSpec::constant(0.0), 2, 1.7, 1) ==
          doctest::Approx(2.0 * kLog2).epsilon(1e-12));
    // Jensen: E Z^2 >= (E Z)^2 = (d e^{lambda})^{2n}
    for (const auto& spec : {kStdGauss, kFairBern}) {
        for (int d : {2, 3}) {
            for (double b : {0.3, 1.0, 2.0}) {
                for (int n : {1, 2, 5}) {
                    const double logE2 = log_second_moment_hd(spec, d, b, n);
                    const double logE1 = n * (spec.log_mgf(b) + std::log(double(d)));
                    CHECK(logE2 >= 2.0 * logE1 - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("mean of the G terms") {
    CHECK(log_mean_g(kFairBern, 2, 1, 1.0, 0, 3) ==
          doctest::Approx(0.0 + 2.0 * kLog2 + 3.0 * kFairBern.log_mgf(1.0)));
    CHECK_THROWS_AS(log_mean_g(kFairBern, 2, 1, 1.0, 3, 3), IndexOutOfRange);
    CHECK_THROWS_AS(log_mean_g(kFairBern, 2, 1, 1.0, -1, 3), IndexOutOfRange);
}

TEST_CASE("phase classification of the subtree model") {
    const auto cd = beta_c(kStdGauss, 3);
    const double below = 0.5 * cd.beta_c, above = 2.0 * cd.beta_c;
    const double fbc = (cd.phi_cap - kLog2) / cd.beta_c;

    CHECK(classify_st(kStdGauss, 3, 2, below, F_line(kStdGauss, 3, 2, below) + 1.0) ==
          PhaseLabel::FullyPinned);
    CHECK(classify_st(kStdGauss, 3, 2, below, F_line(kStdGauss, 3, 2, below) - 1.0) ==
          PhaseLabel::Depinned);
    CHECK(classify_st(kStdGauss, 3, 2, below, F_line(kStdGauss, 3, 2, below)) ==
          PhaseLabel::Boundary);

    CHECK(classify_st(kStdGauss, 3, 2, above, F_line(kStdGauss, 3, 2, above) + 1.0) ==
          PhaseLabel::FullyPinned);
    CHECK(classify_st(kStdGauss, 3, 2, above, fbc - 1.0) == PhaseLabel::Depinned);
    const double j = J_line(kStdGauss, 3, 2, above);
    const double f = F_line(kStdGauss, 3, 2, above);
    CHECK(classify_st(kStdGauss, 3, 2, above, 0.5 * (j + f)) == PhaseLabel::PartiallyPinned);
    CHECK(classify_st(kStdGauss, 3, 2, above, 0.5 * (fbc + j)) ==
          PhaseLabel::DepinnedOrPartiallyPinned);
    CHECK_THROWS_AS(classify_st(kStdGauss, 3, 2, 0.0, 1.0), OutOfDomain);
}

TEST_CASE("classification partitions vertical lines in order") {
    const auto cd = beta_c(kStdGauss, 3);
    const double b = 2.0 * cd.beta_c;
    // with tol = 0 the labels must appear in the order D, DPP, PP, FP as u grows
    int stage = 0;
    for (double u = -2.0; u <= 4.0; u += 0.002) {
        const PhaseLabel l = classify_st(kStdGauss, 3, 2, b, u, 0.0);
        int s;
        switch (l) {
            case PhaseLabel::Depinned: s = 0; break;
            case PhaseLabel::DepinnedOrPartiallyPinned: s = 1; break;
            case PhaseLabel::PartiallyPinned: s = 2; break;
            case PhaseLabel::FullyPinned: s = 3; break;
            default: s = stage; break;
        }
        CHECK(s >= stage);
        stage = s;
    }
    CHECK(stage == 3);
}
