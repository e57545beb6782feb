#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "treepin/closedform.hpp"
#include "treepin/treesim.hpp"

namespace treepin {

// Replica statistics of (1/n) log Z_n at one depth.
struct FreeEnergyEstimate {
    int n = 0;
    int replicas = 0;
    double mean = 0.0;
    double std_err = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Depth ladder with the applicable closed-form anchor(s).  For models whose
// limit is known exactly the two anchors coincide; for the subtree models
// they are the liminf/limsup bounds.
struct LadderReport {
    ModelSpec model;
    double beta = 0.0;
    double u = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<FreeEnergyEstimate> estimates;
    double anchor_lower = 0.0;
    double anchor_upper = 0.0;
    std::string anchor_name;
};

struct TraceRow {
    int n = 0;
    int replicas = 0;
    double mean = 0.0;
    double std_err = 0.0;
};

struct PinnedProfile {
    int n = 0;
    int replicas = 0;
    double fraction_mean = 0.0;
    double fraction_std_err = 0.0;
    std::array<int, 10> fraction_hist{};  // counts over [0, 1] in 10 bins
    double dominant_mean = 0.0;           // of dominant_k / n
    double dominant_std_err = 0.0;
    std::array<int, 10> dominant_hist{};
};

struct ConcentrationRow {
    int n = 0;
    double stdev = 0.0;
};

struct ConcentrationReport {
    std::vector<ConcentrationRow> rows;
    bool monotone_decreasing = false;  // nonincreasing across the n ladder
};

struct PhaseCell {
    double beta = 0.0;
    double u = 0.0;
    PhaseLabel label = PhaseLabel::Boundary;
    double f_line = 0.0;
    double j_line = 0.0;  // NaN for beta <= beta_c
    double fe_mean = 0.0;
    double fe_std_err = 0.0;
    double pinned_fraction_mean = 0.0;
};

struct PhaseScan {
    std::vector<double> beta_grid;
    std::vector<double> u_grid;
    double f_at_beta_c = 0.0;  // Psi = F(beta_c); +inf when beta_c is infinite
    std::vector<PhaseCell> cells;  // row-major, beta index major
};

// Replica r simulates seed derive_seed(master_seed, r, Replica); the same
// replica keeps its disorder as n grows, so ladders track one realization
// per replica.  Parallel over replicas, deterministic for any thread count.
LadderReport estimate_free_energy(const ModelSpec& model, double beta,
                                  const std::vector<int>& n_list, int replicas,
                                  std::uint64_t master_seed);

// Per-n replica mean and standard error of log M_n = log Z - n(lambda+log d)
// for the homogeneous disorder model.
std::vector<TraceRow> martingale_trace(const DisorderSpec& bulk, int d, double beta,
                                       const std::vector<int>& n_list, int replicas,
                                       std::uint64_t master_seed);

// Distribution summary of gibbs_pinned_fraction and dominant_k/n across
// replicas; subtree-constant or branch-shift models only.
PinnedProfile empirical_pinned_profile(const ModelSpec& model, double beta, int n, int replicas,
                                       std::uint64_t master_seed);

// Per-n sample standard deviation of (1/n) log Z (replicas >= 30).
ConcentrationReport concentration_profile(const ModelSpec& model, double beta,
                                          const std::vector<int>& n_list, int replicas,
                                          std::uint64_t master_seed);

// Subtree-constant model family over a (beta, u) grid: classification, free
// energy estimate and mean pinned fraction per cell.  Cell seeds are derived
// from master_seed and the row-major cell index; parallel over cells.
PhaseScan phase_scan(const DisorderSpec& bulk, int d, int d1,
                     const std::vector<double>& beta_grid, const std::vector<double>& u_grid,
                     int n, int replicas, std::uint64_t master_seed, double tol = 1e-9);

}  // namespace treepin
