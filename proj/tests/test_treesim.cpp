#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <vector>

#include "treepin/closedform.hpp"
#include "treepin/logsum.hpp"
#include "treepin/treesim.hpp"

using namespace treepin;

namespace {

const DisorderSpec kStdGauss = DisorderSpec::gaussian(0.0, 1.0);
const DisorderSpec kFairBern = DisorderSpec::bernoulli(0.5, -1.0, 1.0);
const double kLog2 = std::log(2.0);

ModelSpec make_model(DefectKind kind, int d, double u, DisorderSpec bulk = kStdGauss) {
    const int d1 = kind == DefectKind::BranchShift || kind == DefectKind::None ? 1 : d - 1;
    return ModelSpec::make(d, d1, std::move(bulk), kind, u);
}

const std::vector<DefectKind> kAllKinds = {DefectKind::None, DefectKind::BranchShift,
                                           DefectKind::SubtreeConstant, DefectKind::SubtreeShift};

}  // namespace

TEST_CASE("flat disorder gives n log d") {
    const ModelSpec m = ModelSpec::make(3, 1, DisorderSpec::constant(0.0), DefectKind::None, 0.0);
    for (int n : {1, 3, 6}) {
        const Realization r{m, 99, n};
        CHECK(log_partition(r, 1.7) == doctest::Approx(n * std::log(3.0)).epsilon(1e-12));
        CHECK(brute_force_log_partition(r, 1.7) ==
              doctest::Approx(n * std::log(3.0)).epsilon(1e-12));
    }
}

TEST_CASE("branch model depth 1 against the two-path formula") {
    const double beta = 0.8, u = 0.9;
    const ModelSpec m = ModelSpec::make(2, 1, kStdGauss, DefectKind::BranchShift, u);
    const std::uint64_t seed = 31;
    const double v1 = sample_node(kStdGauss, seed, NodeAddress{1, 1});
    const double v2 = sample_node(kStdGauss, seed, NodeAddress{1, 2});
    const double expect = std::log(std::exp(beta * (v1 + u)) + std::exp(beta * v2));
    CHECK(log_partition(Realization{m, seed, 1}, beta) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("recursive engine agrees with the brute-force oracle") {
    for (DefectKind kind : kAllKinds) {
        for (int d : {2, 3}) {
            const ModelSpec m = make_model(kind, d, 0.8);
            for (int n = 1; n <= 5; ++n) {
                for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                    const Realization r{m, seed, n};
                    const double a = log_partition(r, 1.1);
                    const double b = brute_force_log_partition(r, 1.1);
                    CHECK(std::fabs(a - b) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("parallel kernel is bit-identical to the serial reference") {
    const int saved = omp_get_max_threads();
    for (DefectKind kind : kAllKinds) {
        const ModelSpec m = make_model(kind, 2, -0.4, kFairBern);
        const Realization r{m, 7, 9};
        omp_set_num_threads(1);
        const double serial = log_partition_serial(r, 1.3);
        for (int t : {1, 2, 4, 8}) {
            omp_set_num_threads(t);
            CHECK(log_partition(r, 1.3) == serial);
        }
    }
    omp_set_num_threads(saved);
}

TEST_CASE("deterministic closed sum") {
    CHECK(log_partition_det(1.0, 0.0, 2, 1, 2) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(log_partition_det(1.0, 1.0, 2, 1, 1) ==
          doctest::Approx(std::log(1.0 + std::exp(1.0))).epsilon(1e-12));
    // generic engine on a constant-bulk subtree model reproduces the sum
    for (double beta : {0.5, 1.5}) {
        for (double u : {-0.7, 0.4, 1.2}) {
            const ModelSpec m =
                ModelSpec::make(3, 2, DisorderSpec::constant(0.0), DefectKind::SubtreeConstant, u);
            for (int n : {1, 3, 5}) {
                CHECK(log_partition(Realization{m, 0, n}, beta) ==
                      doctest::Approx(log_partition_det(beta, u, 3, 2, n)).epsilon(1e-11));
            }
        }
    }
    // large-n convergence toward the closed-form limit
    for (double beta : {0.5, 2.0}) {
        for (double du : {-1.0, 1.0}) {
            const double u = u_c_det(beta, 2, 1) + du;
            CHECK(std::fabs(log_partition_det(beta, u, 2, 1, 2000) / 2000.0 -
                            f_det(beta, u, 2, 1)) < 1e-3);
        }
    }
}

TEST_CASE("node budget limits") {
    CHECK_THROWS_AS(brute_force_log_partition(
                        Realization{make_model(DefectKind::None, 2, 0.0), 1, 21}, 1.0),
                    DepthTooLarge);
    set_node_budget(1000);
    CHECK_THROWS_AS(log_partition(Realization{make_model(DefectKind::None, 2, 0.0), 1, 10}, 1.0),
                    DepthTooLarge);
    set_node_budget(0);  // restore
    CHECK(std::isfinite(
        log_partition(Realization{make_model(DefectKind::None, 2, 0.0), 1, 10}, 1.0)));
}

TEST_CASE("exit-generation decomposition at depth 1") {
    const double beta = 1.2, u = 0.3;
    const ModelSpec m = ModelSpec::make(3, 2, kStdGauss, DefectKind::SubtreeConstant, u);
    const std::uint64_t seed = 5;
    const Realization r{m, seed, 1};
    const STDecomposition dec = st_decomposition(r, beta);
    REQUIRE(dec.n == 1);
    // G_{0,1} = sum over non-defect children of e^{beta V(y)}
    const double v3 = sample_node(kStdGauss, seed, NodeAddress{1, 3});
    CHECK(dec.log_g[0] == doctest::Approx(beta * v3).epsilon(1e-12));
    CHECK(dec.log_pinned_term == doctest::Approx(kLog2 + beta * u).epsilon(1e-12));
    CHECK(dec.recombined_log_z() ==
          doctest::Approx(log_partition(r, beta)).epsilon(1e-12));
}

TEST_CASE("decomposition recombines to the partition function") {
    for (DefectKind kind : {DefectKind::SubtreeConstant, DefectKind::BranchShift}) {
        for (int d : {2, 3}) {
            const ModelSpec m = make_model(kind, d, 0.6, kFairBern);
            for (int n = 1; n <= 6; ++n) {
                for (std::uint64_t seed = 1; seed <= 8; ++seed) {
                    const Realization r{m, seed, n};
                    const double direct = log_partition(r, 0.9);
                    const double recombined = st_decomposition(r, 0.9).recombined_log_z();
                    CHECK(std::fabs(direct - recombined) <=
                          1e-9 * std::max(1.0, std::fabs(direct)));
                }
            }
        }
    }
    CHECK_THROWS_AS(
        st_decomposition(Realization{make_model(DefectKind::None, 2, 0.0), 1, 3}, 1.0),
        WrongModelKind);
    CHECK_THROWS_AS(
        st_decomposition(Realization{make_model(DefectKind::SubtreeShift, 3, 1.0), 1, 3}, 1.0),
        WrongModelKind);
}

TEST_CASE("gibbs weights and dominant exit generation") {
    const ModelSpec m = ModelSpec::make(3, 2, kStdGauss, DefectKind::SubtreeConstant, 0.0);
    const Realization r{m, 11, 6};
    const STDecomposition dec = st_decomposition(r, 1.0);
    const double logz = dec.recombined_log_z();
    double total = 0.0;
    for (int k = 0; k <= dec.n; ++k) total += std::exp(dec.term(k) - logz);
    CHECK(std::fabs(total - 1.0) < 1e-12);

    // extreme potentials pin or expel the path
    const ModelSpec deep_pin = ModelSpec::make(3, 2, kStdGauss, DefectKind::SubtreeConstant, 40.0);
    CHECK(dominant_k(Realization{deep_pin, 11, 6}, 1.0) == 6);
    CHECK(gibbs_pinned_fraction(Realization{deep_pin, 11, 6}, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-6));
    const ModelSpec deep_out = ModelSpec::make(3, 2, kStdGauss, DefectKind::SubtreeConstant, -40.0);
    CHECK(dominant_k(Realization{deep_out, 11, 6}, 1.0) == 0);
    CHECK(gibbs_pinned_fraction(Realization{deep_out, 11, 6}, 1.0) < 0.02);
}

TEST_CASE("log Z is nondecreasing in the defect potential") {
    for (DefectKind kind : {DefectKind::SubtreeConstant, DefectKind::BranchShift,
                            DefectKind::SubtreeShift}) {
        const int d = 3;
        double prev = -1e300;
        for (double u = -2.0; u <= 2.0; u += 0.25) {
            ModelSpec m = make_model(kind, d, u, kFairBern);
            const double cur = log_partition(Realization{m, 3, 5}, 1.1);
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
    // deterministic model, exactly
    double prev = -1e300;
    for (double u = -2.0; u <= 2.0; u += 0.25) {
        const double cur = log_partition_det(1.1, u, 3, 2, 5);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("per-realization free energy is convex in beta") {
    for (DefectKind kind : kAllKinds) {
        const ModelSpec m = make_model(kind, 2, 0.5);
        const Realization r{m, 17, 7};
        std::vector<double> vals;
        const double db = 0.2;
        for (int i = 0; i < 20; ++i) vals.push_back(log_partition(r, -1.0 + db * i) / 7.0);
        for (std::size_t i = 2; i < vals.size(); ++i) {
            const double s0 = (vals[i - 1] - vals[i - 2]) / db;
            const double s1 = (vals[i] - vals[i - 1]) / db;
            CHECK(s1 >= s0 - 1e-10);
        }
    }
}

TEST_CASE("translation covariance of the homogeneous free energy") {
    const double beta = 1.3, c = 0.77;
    const ModelSpec base = ModelSpec::make(2, 1, kStdGauss, DefectKind::None, 0.0);
    const ModelSpec moved =
        ModelSpec::make(2, 1, DisorderSpec::shifted(kStdGauss, c), DefectKind::None, 0.0);
    for (std::uint64_t seed : {1ULL, 9ULL}) {
        const int n = 8;
        const double a = log_partition(Realization{base, seed, n}, beta) / n;
        const double b = log_partition(Realization{moved, seed, n}, beta) / n;
        CHECK(std::fabs(b - a - beta * c) < 1e-10);
    }
}

TEST_CASE("exact moment oracle: homogeneous first and second moments") {
    const ModelSpec m = ModelSpec::make(2, 1, kFairBern, DefectKind::None, 0.0);
    // E Z at n = 1 is d e^{lambda} = 2 cosh 1
    CHECK(log_exact_moment(m, 1.0, 1, 1) ==
          doctest::Approx(std::log(2.0 * std::cosh(1.0))).epsilon(1e-13));
    // frozen enumeration value, also matches the closed-form second moment
    CHECK(log_exact_moment(m, 1.0, 1, 2) ==
          doctest::Approx(std::log(12.286587073250894)).epsilon(1e-12));
    for (int n : {1, 2, 3}) {
        for (double beta : {0.3, 1.0, 2.0}) {
            const double lhs = log_exact_moment(m, beta, n, 1);
            const double rhs = n * (kFairBern.log_mgf(beta) + kLog2);
            CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
            const double lhs2 = log_exact_moment(m, beta, n, 2);
            const double rhs2 = log_second_moment_hd(kFairBern, 2, beta, n);
            CHECK(std::fabs(lhs2 - rhs2) <= 1e-12 * std::max(1.0, std::fabs(rhs2)));
        }
    }
}

TEST_CASE("exact moment oracle: G terms against the closed mean") {
    const ModelSpec m = ModelSpec::make(2, 1, kFairBern, DefectKind::SubtreeConstant, 0.4);
    for (int n : {1, 2, 3}) {
        for (int k = 0; k < n; ++k) {
            for (double beta : {0.3, 1.0}) {
                const double lhs = log_exact_moment_g(m, beta, k, n, 1);
                const double rhs = log_mean_g(kFairBern, 2, 1, beta, k, n);
                CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
            }
        }
    }
}

TEST_CASE("exact moment oracle: decomposition linearity at n = 2") {
    // E Z^ST = sum_k e^{beta k u} E G_k + d1^n e^{beta n u}
    const double beta = 0.7, u = 0.35;
    const ModelSpec m = ModelSpec::make(2, 1, kFairBern, DefectKind::SubtreeConstant, u);
    const int n = 2;
    RunningLse acc;
    for (int k = 0; k < n; ++k)
        acc.add(beta * k * u + log_mean_g(kFairBern, 2, 1, beta, k, n));
    acc.add(n * std::log(1.0) + beta * n * u);
    const double direct = log_exact_moment(m, beta, n, 1);
    CHECK(std::fabs(direct - acc.value()) <= 1e-12 * std::max(1.0, std::fabs(direct)));
}

TEST_CASE("exact moment oracle: G-term second moment and variance") {
    // Var(G_{k,n}) = d1^k (d-d1) Var(e^{beta V} Z^HD_{n-k-1}); at k = n-1 the
    // inner factor is e^{beta V} alone, so Var(G) = e^{lambda(2b)} - e^{2 lambda}
    const ModelSpec m = ModelSpec::make(2, 1, kFairBern, DefectKind::SubtreeConstant, 0.4);
    for (double beta : {0.4, 1.0}) {
        const int n = 2, k = 1;
        const double eg = std::exp(log_exact_moment_g(m, beta, k, n, 1));
        const double eg2 = std::exp(log_exact_moment_g(m, beta, k, n, 2));
        CHECK(eg2 >= eg * eg - 1e-12);  // Jensen
        const double expect = std::exp(kFairBern.log_mgf(2.0 * beta)) -
                              std::exp(2.0 * kFairBern.log_mgf(beta));
        CHECK(eg2 - eg * eg == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("exact moment oracle domain errors") {
    const ModelSpec cont = ModelSpec::make(2, 1, kStdGauss, DefectKind::None, 0.0);
    CHECK_THROWS_AS(log_exact_moment(cont, 1.0, 2, 1), ContinuousDisorder);
    const ModelSpec big = ModelSpec::make(2, 1, kFairBern, DefectKind::None, 0.0);
    CHECK_THROWS_AS(log_exact_moment(big, 1.0, 5, 1), SupportTooLarge);
    const ModelSpec m = ModelSpec::make(2, 1, kFairBern, DefectKind::None, 0.0);
    CHECK_THROWS_AS(log_exact_moment(m, 1.0, 2, 3), OutOfDomain);
    CHECK_THROWS_AS(log_exact_moment_g(m, 1.0, 2, 2, 1), IndexOutOfRange);
}

TEST_CASE("results do not depend on traversal order or thread count") {
    const int saved = omp_get_max_threads();
    const ModelSpec m = ModelSpec::make(3, 2, kStdGauss, DefectKind::SubtreeConstant, 0.8);
    const Realization r{m, 123, 7};
    omp_set_num_threads(4);
    const double four = log_partition(r, 1.5);
    omp_set_num_threads(2);
    const double two = log_partition(r, 1.5);
    omp_set_num_threads(1);
    const double one = log_partition(r, 1.5);
    omp_set_num_threads(saved);
    CHECK(four == two);
    CHECK(two == one);
    CHECK(one == log_partition_serial(r, 1.5));
}
