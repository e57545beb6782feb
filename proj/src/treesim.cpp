#include "treepin/treesim.hpp"

#include <omp.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "treepin/logsum.hpp"

namespace treepin {

namespace {

constexpr std::uint64_t kDefaultBudget = 100000000ULL;  // 1e8
constexpr std::uint64_t kBruteForceCap = 1000000ULL;    // 1e6
constexpr std::uint64_t kOracleCap = 1000000ULL;        // 1e6

std::atomic<std::uint64_t> g_budget_override{0};

// d^n, saturating at 2^63 so comparisons against budgets stay safe.
std::uint64_t pow_sat(std::uint64_t d, int n) {
    std::uint64_t r = 1;
    for (int i = 0; i < n; ++i) {
        if (r > (1ULL << 63) / d) return 1ULL << 63;
        r *= d;
    }
    return r;
}

void check_depth(const Realization& r) { require_within_budget(r.model.d, r.depth); }

// Depth-first log Z from the subtree rooted at 0-based node (gen, j0).
// in_tilde tracks defect-subtree membership incrementally.
double subtree_log_z(const ModelSpec& m, std::uint64_t seed, double beta, std::uint32_t gen,
                     std::uint64_t j0, bool in_tilde, int n) {
    if (static_cast<int>(gen) == n) return 0.0;
    RunningLse acc;
    for (int ell = 1; ell <= m.d; ++ell) {
        const std::uint64_t cj0 = j0 * m.d + (ell - 1);
        const bool ct = in_tilde && ell <= m.d1;
        const double v = node_value(m, seed, NodeAddress{gen + 1, cj0 + 1}, ct);
        acc.add(beta * v + subtree_log_z(m, seed, beta, gen + 1, cj0, ct, n));
    }
    return acc.value();
}

// Combine precomputed subtree values at generation g upward to the root,
// with exactly the arithmetic of subtree_log_z at generations < g.
double combine_from(const ModelSpec& m, std::uint64_t seed, double beta, std::uint32_t gen,
                    std::uint64_t j0, bool in_tilde, std::uint32_t g,
                    const std::vector<double>& vals) {
    if (gen == g) return vals[j0];
    RunningLse acc;
    for (int ell = 1; ell <= m.d; ++ell) {
        const std::uint64_t cj0 = j0 * m.d + (ell - 1);
        const bool ct = in_tilde && ell <= m.d1;
        const double v = node_value(m, seed, NodeAddress{gen + 1, cj0 + 1}, ct);
        acc.add(beta * v + combine_from(m, seed, beta, gen + 1, cj0, ct, g, vals));
    }
    return acc.value();
}

// Extended-precision streaming log-sum-exp for the exact oracles.
class RunningLseL {
  public:
    void add(long double x) {
        if (x <= max_) {
            sum_ += expl(x - max_);
        } else {
            sum_ = max_ == -std::numeric_limits<long double>::infinity()
                       ? 1.0L
                       : sum_ * expl(max_ - x) + 1.0L;
            max_ = x;
        }
    }
    long double value() const { return max_ + logl(sum_); }

  private:
    long double max_ = -std::numeric_limits<long double>::infinity();
    long double sum_ = 0.0L;
};

struct SupportAtom {
    double value;
    double log_prob;
};

std::vector<SupportAtom> finite_support(const DisorderSpec& s) {
    switch (s.kind()) {
        case DisorderSpec::Kind::Constant:
            return {{s.c(), 0.0}};
        case DisorderSpec::Kind::Bernoulli: {
            std::vector<SupportAtom> atoms;
            if (s.p() < 1.0) atoms.push_back({s.lo(), std::log1p(-s.p())});
            if (s.p() > 0.0) atoms.push_back({s.hi(), std::log(s.p())});
            return atoms;
        }
        case DisorderSpec::Kind::Shifted: {
            auto atoms = finite_support(s.base());
            for (auto& a : atoms) a.value += s.shift();
            return atoms;
        }
        case DisorderSpec::Kind::Gaussian:
            throw ContinuousDisorder("exact expectation oracle requires finite-support disorder");
    }
    return {};
}

// Node bookkeeping for the exact oracles: flat slot per tree node in
// generations 1..n, with defect membership and whether its value is random.
struct OracleLayout {
    int n;
    std::vector<std::uint64_t> gen_offset;  // slot of first node of each generation
    std::vector<bool> tilde;                // by slot
    std::vector<int> random_slot;           // slot -> index among enumerated nodes, or -1
    std::vector<std::uint64_t> random_nodes;  // enumerated slots in ascending order
};

OracleLayout make_layout(const ModelSpec& m, int n) {
    OracleLayout lay;
    lay.n = n;
    lay.gen_offset.assign(n + 2, 0);
    std::uint64_t total = 0;
    for (int g = 1; g <= n; ++g) {
        lay.gen_offset[g] = total;
        total += pow_sat(m.d, g);
    }
    lay.gen_offset[n + 1] = total;
    lay.tilde.assign(total, false);
    lay.random_slot.assign(total, -1);
    for (int g = 1; g <= n; ++g) {
        const std::uint64_t count = pow_sat(m.d, g);
        for (std::uint64_t j0 = 0; j0 < count; ++j0) {
            const std::uint64_t slot = lay.gen_offset[g] + j0;
            const bool t = m.has_defect() &&
                           in_defect_subtree(NodeAddress{static_cast<std::uint32_t>(g), j0 + 1},
                                             m.d, m.d1);
            lay.tilde[slot] = t;
            const bool fixed = t && m.defect == DefectKind::SubtreeConstant;
            if (!fixed) {
                lay.random_slot[slot] = static_cast<int>(lay.random_nodes.size());
                lay.random_nodes.push_back(slot);
            }
        }
    }
    return lay;
}

// Value of a node under the current assignment of enumerated base values.
double assigned_value(const ModelSpec& m, const OracleLayout& lay,
                      const std::vector<double>& assign, std::uint64_t slot) {
    if (lay.random_slot[slot] < 0) return m.u;  // fixed subtree-constant node
    double v = assign[lay.random_slot[slot]];
    if (lay.tilde[slot] &&
        (m.defect == DefectKind::BranchShift || m.defect == DefectKind::SubtreeShift))
        v += m.u;
    return v;
}

double assigned_log_z(const ModelSpec& m, const OracleLayout& lay,
                      const std::vector<double>& assign, double beta, int gen, std::uint64_t j0) {
    if (gen == lay.n) return 0.0;
    RunningLse acc;
    for (int ell = 1; ell <= m.d; ++ell) {
        const std::uint64_t cj0 = j0 * m.d + (ell - 1);
        const double v = assigned_value(m, lay, assign, lay.gen_offset[gen + 1] + cj0);
        acc.add(beta * v + assigned_log_z(m, lay, assign, beta, gen + 1, cj0));
    }
    return acc.value();
}

double assigned_log_g(const ModelSpec& m, const OracleLayout& lay,
                      const std::vector<double>& assign, double beta, int k) {
    RunningLse acc;
    const std::uint64_t count = pow_sat(m.d1, k);
    for (std::uint64_t t = 0; t < count; ++t) {
        // digits of t in base d1, reread in base d, give the defect-subtree node
        std::uint64_t j0 = 0, rem = t, place = 1;
        for (int i = 0; i < k; ++i) {
            j0 += (rem % m.d1) * place;
            rem /= m.d1;
            place *= m.d;
        }
        for (int ell = m.d1 + 1; ell <= m.d; ++ell) {
            const std::uint64_t cj0 = j0 * m.d + (ell - 1);
            const double v = assigned_value(m, lay, assign, lay.gen_offset[k + 1] + cj0);
            acc.add(beta * v + assigned_log_z(m, lay, assign, beta, k + 1, cj0));
        }
    }
    return acc.value();
}

double run_exact_oracle(const ModelSpec& m, double beta, int n, int power, int g_k) {
    if (power != 1 && power != 2) throw OutOfDomain("oracle power must be 1 or 2");
    if (n < 1) throw OutOfDomain("oracle requires n >= 1");
    if (g_k >= 0 &&
        !(m.defect == DefectKind::SubtreeConstant || m.defect == DefectKind::BranchShift))
        throw WrongModelKind("G-term oracle requires a subtree-constant or branch-shift model");
    const auto atoms = finite_support(m.bulk);
    const OracleLayout lay = make_layout(m, n);
    const std::size_t mcount = lay.random_nodes.size();
    const std::uint64_t s = atoms.size();
    std::uint64_t combos = 1;
    for (std::size_t i = 0; i < mcount; ++i) {
        if (combos > kOracleCap / s)
            throw SupportTooLarge("support^m exceeds " + std::to_string(kOracleCap));
        combos *= s;
    }

    std::vector<int> digits(mcount, 0);
    std::vector<double> assign(mcount);
    for (std::size_t i = 0; i < mcount; ++i) assign[i] = atoms[0].value;
    double logp = static_cast<double>(mcount) * atoms[0].log_prob;

    RunningLseL acc;
    for (std::uint64_t c = 0;; ++c) {
        const double val = g_k >= 0 ? assigned_log_g(m, lay, assign, beta, g_k)
                                    : assigned_log_z(m, lay, assign, beta, 0, 0);
        acc.add(static_cast<long double>(logp) + static_cast<long double>(power) * val);
        // odometer step
        std::size_t i = 0;
        for (; i < mcount; ++i) {
            logp -= atoms[digits[i]].log_prob;
            if (++digits[i] < static_cast<int>(s)) {
                assign[i] = atoms[digits[i]].value;
                logp += atoms[digits[i]].log_prob;
                break;
            }
            digits[i] = 0;
            assign[i] = atoms[0].value;
            logp += atoms[0].log_prob;
        }
        if (i == mcount) break;
    }
    return static_cast<double>(acc.value());
}

}  // namespace

double STDecomposition::term(int k) const {
    if (k < 0 || k > n) throw IndexOutOfRange("decomposition term index out of range");
    if (k == n) return log_pinned_term;
    return beta * k * u + log_g[k];
}

double STDecomposition::recombined_log_z() const {
    RunningLse acc;
    for (int k = 0; k <= n; ++k) acc.add(term(k));
    return acc.value();
}

void require_within_budget(int d, int n) {
    if (n < 1) throw OutOfDomain("tree depth must be >= 1");
    const std::uint64_t paths = pow_sat(d, n);
    if (paths > node_budget())
        throw DepthTooLarge("d^n = " + std::to_string(paths) + " exceeds node budget " +
                            std::to_string(node_budget()));
}

std::uint64_t node_budget() {
    const std::uint64_t o = g_budget_override.load(std::memory_order_relaxed);
    if (o != 0) return o;
    static const std::uint64_t env_budget = [] {
        if (const char* e = std::getenv("TREEPIN_NODE_BUDGET")) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(e, &end, 10);
            if (end != e && v > 0) return static_cast<std::uint64_t>(v);
        }
        return kDefaultBudget;
    }();
    return env_budget;
}

void set_node_budget(std::uint64_t budget) {
    g_budget_override.store(budget, std::memory_order_relaxed);
}

double log_partition_serial(const Realization& r, double beta) {
    if (!std::isfinite(beta)) throw OutOfDomain("beta must be finite");
    check_depth(r);
    return subtree_log_z(r.model, r.seed, beta, 0, 0, true, r.depth);
}

double log_partition(const Realization& r, double beta) {
    if (!std::isfinite(beta)) throw OutOfDomain("beta must be finite");
    check_depth(r);
    const ModelSpec& m = r.model;
    const int n = r.depth;
    const int threads = omp_get_max_threads();
    if (threads <= 1 || pow_sat(m.d, n) <= 256)
        return subtree_log_z(m, r.seed, beta, 0, 0, true, n);

    // split at the shallowest generation with enough subtrees to load-balance
    std::uint32_t g = 1;
    while (static_cast<int>(g) < n && pow_sat(m.d, g) < 4ULL * threads &&
           pow_sat(m.d, g + 1) <= 16384ULL)
        ++g;
    const std::uint64_t count = pow_sat(m.d, g);
    std::vector<double> vals(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(count); ++t) {
        const bool in_t =
            m.has_defect() && in_defect_subtree(NodeAddress{g, static_cast<std::uint64_t>(t) + 1},
                                                m.d, m.d1);
        vals[t] = subtree_log_z(m, r.seed, beta, g, t, in_t, n);
    }
    return combine_from(m, r.seed, beta, 0, 0, true, g, vals);
}

double log_partition_det(double beta, double u, int d, int d1, int n) {
    if (d < 2 || d1 < 1 || d1 >= d) throw ConfigError("arities must satisfy 2 <= d, 1 <= d1 < d");
    if (n < 1) throw OutOfDomain("depth must be >= 1");
    const double logd = std::log(static_cast<double>(d));
    const double logd1 = std::log(static_cast<double>(d1));
    RunningLse acc;
    for (int k = 0; k < n; ++k)
        acc.add(k * (beta * u + logd1) + std::log(static_cast<double>(d - d1)) +
                (n - k - 1) * logd);
    acc.add(n * (beta * u + logd1));
    return acc.value();
}

double brute_force_log_partition(const Realization& r, double beta) {
    if (!std::isfinite(beta)) throw OutOfDomain("beta must be finite");
    if (r.depth < 1) throw OutOfDomain("tree depth must be >= 1");
    const ModelSpec& m = r.model;
    const int n = r.depth;
    const std::uint64_t paths = pow_sat(m.d, n);
    if (paths > kBruteForceCap || paths > node_budget())
        throw DepthTooLarge("brute force requires d^n <= 1e6");

    std::vector<double> logw;
    logw.reserve(paths);
    std::vector<int> ell(n, 1);
    for (;;) {
        double h = 0.0;
        std::uint64_t j = 1;  // 1-based index tracked along the path
        for (int g = 0; g < n; ++g) {
            j = static_cast<std::uint64_t>(m.d) * (j - 1) + ell[g];
            h += node_value(m, r.seed, NodeAddress{static_cast<std::uint32_t>(g + 1), j});
        }
        logw.push_back(beta * h);
        int i = n - 1;
        while (i >= 0 && ell[i] == m.d) ell[i--] = 1;
        if (i < 0) break;
        ++ell[i];
    }

    // pairwise tree reduction
    while (logw.size() > 1) {
        std::vector<double> next;
        next.reserve((logw.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < logw.size(); i += 2) next.push_back(lse2(logw[i], logw[i + 1]));
        if (logw.size() % 2 == 1) next.push_back(logw.back());
        logw.swap(next);
    }
    return logw[0];
}

STDecomposition st_decomposition(const Realization& r, double beta) {
    const ModelSpec& m = r.model;
    if (m.defect != DefectKind::SubtreeConstant && m.defect != DefectKind::BranchShift)
        throw WrongModelKind(
            "exit-generation decomposition requires a subtree-constant or branch-shift model");
    if (!std::isfinite(beta)) throw OutOfDomain("beta must be finite");
    check_depth(r);
    const int n = r.depth;
    const bool branch = m.defect == DefectKind::BranchShift;

    STDecomposition dec;
    dec.n = n;
    dec.beta = beta;
    dec.u = m.u;
    dec.log_g.resize(n);

    double branch_sum = 0.0;  // S_k: unshifted disorder along the leftmost branch
    for (int k = 0; k < n; ++k) {
        RunningLse acc;
        const std::uint64_t count = pow_sat(m.d1, k);
        for (std::uint64_t t = 0; t < count; ++t) {
            std::uint64_t j0 = 0, rem = t, place = 1;
            for (int i = 0; i < k; ++i) {
                j0 += (rem % m.d1) * place;
                rem /= m.d1;
                place *= m.d;
            }
            for (int ell = m.d1 + 1; ell <= m.d; ++ell) {
                const std::uint64_t cj0 = j0 * m.d + (ell - 1);
                const double v =
                    node_value(m, r.seed, NodeAddress{static_cast<std::uint32_t>(k) + 1, cj0 + 1},
                               false);
                acc.add(beta * v +
                        subtree_log_z(m, r.seed, beta, k + 1, cj0, false, n));
            }
        }
        dec.log_g[k] = acc.value() + (branch ? beta * branch_sum : 0.0);
        if (branch)
            branch_sum +=
                sample_node(m.bulk, r.seed, NodeAddress{static_cast<std::uint32_t>(k) + 1, 1});
    }
    dec.log_pinned_term = n * std::log(static_cast<double>(m.d1)) + beta * n * m.u +
                          (branch ? beta * branch_sum : 0.0);
    return dec;
}

double gibbs_pinned_fraction(const Realization& r, double beta) {
    const STDecomposition dec = st_decomposition(r, beta);
    const double logz = dec.recombined_log_z();
    double frac = 0.0;
    for (int k = 1; k <= dec.n; ++k) frac += k * std::exp(dec.term(k) - logz);
    return frac / dec.n;
}

int dominant_k(const Realization& r, double beta) {
    const STDecomposition dec = st_decomposition(r, beta);
    int best = 0;
    double best_term = dec.term(0);
    for (int k = 1; k <= dec.n; ++k) {
        const double t = dec.term(k);
        if (t > best_term) {
            best_term = t;
            best = k;
        }
    }
    return best;
}

double log_exact_moment(const ModelSpec& m, double beta, int n, int power) {
    return run_exact_oracle(m, beta, n, power, -1);
}

double log_exact_moment_g(const ModelSpec& m, double beta, int k, int n, int power) {
    if (k < 0 || k >= n) throw IndexOutOfRange("G-term oracle requires 0 <= k < n");
    return run_exact_oracle(m, beta, n, power, k);
}

}  // namespace treepin
