#pragma once

#include "treepin/disorder.hpp"
#include "treepin/model.hpp"

namespace treepin {

// Phase regions of the subtree-defect model.  DepinnedOrPartiallyPinned is
// the band F(beta_c) < u <= J(beta) that the classification leaves open for
// beta > beta_c; Boundary flags u within tol of a boundary curve.
enum class PhaseLabel {
    FullyPinned,
    Depinned,
    PartiallyPinned,
    DepinnedOrPartiallyPinned,
    Boundary,
};

const char* phase_label_name(PhaseLabel label);

struct CriticalData {
    double beta_c = 0.0;            // +infinity when f_gap has no positive root
    double lambda_at_beta_c = 0.0;  // NaN when beta_c is infinite
    double phi_cap = 0.0;           // lambda(beta_c) + log d; NaN when infinite

    bool finite() const;
};

// f(beta) = lambda(beta) + log d - beta lambda'(beta).  Strictly decreasing on
// beta > 0 for non-degenerate disorder; its positive root is beta_c.
double f_gap(const DisorderSpec& bulk, int d, double beta);

// Positive root of f_gap by bracket doubling + bisection (|f| < 1e-12 or
// interval < 1e-12), or +infinity when the root provably does not exist
// (bounded disorder with P(V = ess sup) >= 1/d).  Results are memoized per
// (bulk, d); the cache is transparent and can be disabled for testing.
CriticalData beta_c(const DisorderSpec& bulk, int d);

void set_critical_cache_enabled(bool enabled);

// Quenched free energy of the homogeneous-disorder model.
double phi(const DisorderSpec& bulk, int d, double beta);

// Free energy cap of the shifted defect subtree: log d replaced by log d1,
// with beta_c still the arity-d critical point.
double phi_tilde(const DisorderSpec& bulk, int d, int d1, double beta);

// Non-disordered tree with a constant-u defect subtree.
double f_det(double beta, double u, int d, int d1);
double u_c_det(double beta, int d, int d1);

// Disordered tree with a shift defect on the leftmost branch.
double f_br(const DisorderSpec& bulk, int d, double beta, double u);
double u_c_br(const DisorderSpec& bulk, int d, double beta);

// Boundary curves of the subtree-defect phase diagram.
double F_line(const DisorderSpec& bulk, int d, int d1, double beta);
// Defined for beta > beta_c only.
double J_line(const DisorderSpec& bulk, int d, int d1, double beta);

// log of Theta(beta) = max{d^2 e^{2 lambda}, d e^{lambda(2 beta)}}.
double log_theta(const DisorderSpec& bulk, int d, double beta);

// t* = X / (log d1 + X) with X = lambda(2b) - 2 lambda(b) - log d; requires
// beta > beta_c and d1 >= 2 (at d1 = 1 the admissible interval is empty).
double t_star(const DisorderSpec& bulk, int d, int d1, double beta);

// L(beta, t) for t in (0, 1]; L(beta, 1) = phi(beta) and
// J(beta) = (L(beta, t*) - log d1) / beta.
double L_func(const DisorderSpec& bulk, int d, double beta, double t);

// log E[(Z_n^HD)^2], evaluated as the explicit k-sum in log domain (the
// closed geometric ratio cancels catastrophically when the two bases meet).
double log_second_moment_hd(const DisorderSpec& bulk, int d, double beta, int n);

// log E[G_{k,n}] = k log d1 + log(d - d1) + (n-k-1) log d + (n-k) lambda.
double log_mean_g(const DisorderSpec& bulk, int d, int d1, double beta, int k, int n);

// Phase classification of (beta, u) with a boundary band of half-width tol.
PhaseLabel classify_st(const DisorderSpec& bulk, int d, int d1, double beta, double u,
                       double tol = 1e-9);

}  // namespace treepin
