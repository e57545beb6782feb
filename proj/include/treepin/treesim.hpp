#pragma once

#include <cstdint>
#include <vector>

#include "treepin/model.hpp"

namespace treepin {

// A disordered tree, fully determined by (model, seed): disorder values are
// re-derived from node addresses on demand and never stored.
struct Realization {
    ModelSpec model;
    std::uint64_t seed = 0;
    int depth = 0;
};

// Exit-generation decomposition of Z for the subtree/branch defect models:
//   log Z = logsumexp_k { beta k u + log_g[k] }  with k = n the pinned term.
// For the branch model (shift defect, d1 = 1) the disordered branch weight
// beta S_k is folded into log_g[k] and beta S_n into log_pinned_term, so the
// same recombination identity holds for both model kinds.
struct STDecomposition {
    int n = 0;
    double beta = 0.0;
    double u = 0.0;
    std::vector<double> log_g;       // k = 0 .. n-1
    double log_pinned_term = 0.0;    // n log d1 + beta n u for the subtree model

    // beta k u + log_g[k] for k < n, log_pinned_term at k = n
    double term(int k) const;
    double recombined_log_z() const;
};

// Maximum number of generation-n nodes (d^n) a single computation may visit.
// Default 1e8; the environment variable TREEPIN_NODE_BUDGET overrides it.
std::uint64_t node_budget();
void set_node_budget(std::uint64_t budget);  // 0 restores the default/env value

// Throws DepthTooLarge when d^n exceeds the node budget, OutOfDomain for
// n < 1.  Callers validate before entering parallel regions.
void require_within_budget(int d, int n);

// log Z_n by depth-first recursion over the tree, log-sum-exp in ascending
// child order.  Parallelizes over subtrees at a fixed generation; the result
// is bit-identical to log_partition_serial for every thread count.
double log_partition(const Realization& r, double beta);

// Sequential reference implementation (kept for testing and benchmarks).
double log_partition_serial(const Realization& r, double beta);

// Closed k-sum for the non-disordered model with a constant-u defect subtree,
// evaluated in log domain.
double log_partition_det(double beta, double u, int d, int d1, int n);

// Independent oracle: enumerates all d^n directed paths and combines their
// log-weights by pairwise log-sum-exp.  Requires d^n <= 1e6.
double brute_force_log_partition(const Realization& r, double beta);

// Exit-generation decomposition; model kind must be SubtreeConstant or
// BranchShift.
STDecomposition st_decomposition(const Realization& r, double beta);

// Gibbs-expected fraction of steps spent in the defect structure, from the
// exit-generation weights (pinned term counts as k = n).
double gibbs_pinned_fraction(const Realization& r, double beta);

// argmax_k of the decomposition terms; ties break toward smaller k.
int dominant_k(const Realization& r, double beta);

// Exact E[Z^power] by enumeration of all disorder assignments (finite-support
// bulk only, support^m <= 1e6 over the m random nodes).  power in {1, 2}.
// Returns log E[Z^power], accumulated in extended precision.
double log_exact_moment(const ModelSpec& m, double beta, int n, int power);

// Exact E[G_{k,n}^power] for the subtree/branch defect models.
double log_exact_moment_g(const ModelSpec& m, double beta, int k, int n, int power);

}  // namespace treepin
