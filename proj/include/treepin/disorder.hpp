#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "treepin/errors.hpp"
#include "treepin/rng.hpp"

namespace treepin {

// Tree node (k, j): generation k >= 0, within-generation index j in [1, d^k].
// The root is (0, 1).  Child l in [1, d] of (k, j) is (k+1, d*(j-1)+l).
struct NodeAddress {
    std::uint32_t generation = 0;
    std::uint64_t index = 1;  // 1-based

    friend bool operator==(const NodeAddress&, const NodeAddress&) = default;
};

inline NodeAddress child_address(NodeAddress a, int d, int ell) {
    return NodeAddress{a.generation + 1, static_cast<std::uint64_t>(d) * (a.index - 1) + ell};
}

// (k, j) lies in the left-most d1-regular subtree iff every base-d digit of
// the child path from the root is below d1.
bool in_defect_subtree(NodeAddress a, int d, int d1);

// Disorder distribution with analytic cumulant functions and deterministic
// per-node sampling.  Shifted wraps a non-Shifted base (one level).
class DisorderSpec {
  public:
    enum class Kind { Gaussian, Bernoulli, Constant, Shifted };

    static DisorderSpec gaussian(double mu, double sigma);
    // P(V = hi) = p, P(V = lo) = 1 - p; requires lo < hi, p in [0,1].
    static DisorderSpec bernoulli(double p, double lo, double hi);
    static DisorderSpec constant(double c);
    static DisorderSpec shifted(DisorderSpec base, double shift);

    Kind kind() const { return kind_; }
    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double p() const { return p_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double c() const { return c_; }
    double shift() const { return shift_; }
    const DisorderSpec& base() const { return *base_; }

    // lambda(beta) = log E[exp(beta V)]
    double log_mgf(double beta) const;
    // lambda'(beta)
    double log_mgf_deriv(double beta) const;
    // lambda''(beta)
    double log_mgf_second(double beta) const;

    double mean() const;
    double variance() const;
    std::pair<double, double> mean_var() const { return {mean(), variance()}; }

    // Constant, or Bernoulli with p in {0, 1} (possibly behind a shift).
    bool degenerate() const;
    // essential supremum is finite (all variants except Gaussian)
    bool bounded_above() const;
    // P(V = ess sup V); only meaningful when bounded_above()
    double prob_at_top() const;

    bool operator==(const DisorderSpec& o) const;

  private:
    DisorderSpec() = default;

    Kind kind_ = Kind::Constant;
    double mu_ = 0, sigma_ = 0;        // Gaussian
    double p_ = 0, lo_ = 0, hi_ = 0;   // Bernoulli
    double c_ = 0;                     // Constant
    double shift_ = 0;                 // Shifted
    std::shared_ptr<const DisorderSpec> base_;
};

// Deterministic uniform in the open interval (0,1): same (seed, addr) always
// yields the same value on every platform and thread count.
double node_uniform(std::uint64_t seed, NodeAddress addr);

// V(addr) with the law of spec, via inverse-CDF transform of node_uniform.
double sample_node(const DisorderSpec& spec, std::uint64_t seed, NodeAddress addr);

}  // namespace treepin
