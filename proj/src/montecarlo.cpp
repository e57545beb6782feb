#include "treepin/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace treepin {

namespace {

struct Summary {
    double mean, std_err, min, max;
};

// Fixed-order aggregation: identical bits regardless of how vals was filled.
Summary summarize(const std::vector<double>& vals) {
    double sum = 0.0;
    double mn = vals[0], mx = vals[0];
    for (double v : vals) {
        sum += v;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (mn == mx) return {mn, 0.0, mn, mx};  // identical replicas: exactly zero spread
    const double mean = sum / vals.size();
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double sd = vals.size() > 1 ? std::sqrt(ss / (vals.size() - 1)) : 0.0;
    return {mean, sd / std::sqrt(static_cast<double>(vals.size())), mn, mx};
}

void check_replicas(int replicas, int minimum) {
    if (replicas < minimum)
        throw ConfigError("at least " + std::to_string(minimum) + " replicas required");
}

// Anchor values by model kind; degenerate bulk collapses to the
// deterministic-tree limit.
void fill_anchors(LadderReport& rep, double beta) {
    const ModelSpec& m = rep.model;
    const double logd = std::log(static_cast<double>(m.d));
    const double logd1 = std::log(static_cast<double>(m.d1));
    if (m.bulk.degenerate()) {
        const double c = m.bulk.mean();
        double f;
        switch (m.defect) {
            case DefectKind::None:
                f = beta * c + logd;
                break;
            case DefectKind::SubtreeConstant:
                f = std::max(beta * m.u + logd1, beta * c + logd);
                break;
            default:  // shift defects: defect nodes carry c + u
                f = std::max(beta * (m.u + c) + logd1, beta * c + logd);
                break;
        }
        rep.anchor_lower = rep.anchor_upper = f;
        rep.anchor_name = "f_det";
        return;
    }
    switch (m.defect) {
        case DefectKind::None:
            rep.anchor_lower = rep.anchor_upper = phi(m.bulk, m.d, beta);
            rep.anchor_name = "phi";
            break;
        case DefectKind::BranchShift:
            rep.anchor_lower = rep.anchor_upper = f_br(m.bulk, m.d, beta, m.u);
            rep.anchor_name = "f_br";
            break;
        case DefectKind::SubtreeConstant:
            rep.anchor_lower = std::max(phi(m.bulk, m.d, beta), beta * m.u + logd1);
            rep.anchor_upper = std::max(m.bulk.log_mgf(beta) + logd, beta * m.u + logd1);
            rep.anchor_name = "st_bounds";
            break;
        case DefectKind::SubtreeShift:
            rep.anchor_lower =
                std::max(phi(m.bulk, m.d, beta), beta * m.u + phi_tilde(m.bulk, m.d, m.d1, beta));
            rep.anchor_upper = m.bulk.log_mgf(beta) + std::max(logd, beta * m.u + logd1);
            rep.anchor_name = "st_shift_bounds";
            break;
    }
}

}  // namespace

LadderReport estimate_free_energy(const ModelSpec& model, double beta,
                                  const std::vector<int>& n_list, int replicas,
                                  std::uint64_t master_seed) {
    check_replicas(replicas, 2);
    if (n_list.empty()) throw ConfigError("n_list must not be empty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw ConfigError("n_list must be strictly increasing");

    if (!std::isfinite(beta)) throw OutOfDomain("beta must be finite");
    for (int n : n_list) require_within_budget(model.d, n);

    LadderReport rep;
    rep.model = model;
    rep.beta = beta;
    rep.u = model.u;
    rep.master_seed = master_seed;
    fill_anchors(rep, beta);

    for (int n : n_list) {
        std::vector<double> vals(replicas);
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < replicas; ++r) {
            const Realization real{model, derive_seed(master_seed, r, SeedDomain::Replica), n};
            vals[r] = log_partition(real, beta) / n;
        }
        const Summary s = summarize(vals);
        rep.estimates.push_back({n, replicas, s.mean, s.std_err, s.min, s.max});
    }
    return rep;
}

std::vector<TraceRow> martingale_trace(const DisorderSpec& bulk, int d, double beta,
                                       const std::vector<int>& n_list, int replicas,
                                       std::uint64_t master_seed) {
    check_replicas(replicas, 2);
    if (!std::isfinite(beta)) throw OutOfDomain("beta must be finite");
    const ModelSpec model = ModelSpec::make(d, 1, bulk, DefectKind::None, 0.0);
    for (int n : n_list) require_within_budget(model.d, n);
    const double rate = bulk.log_mgf(beta) + std::log(static_cast<double>(d));
    std::vector<TraceRow> rows;
    for (int n : n_list) {
        std::vector<double> vals(replicas);
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < replicas; ++r) {
            const Realization real{model, derive_seed(master_seed, r, SeedDomain::Replica), n};
            vals[r] = log_partition(real, beta) - n * rate;
        }
        const Summary s = summarize(vals);
        rows.push_back({n, replicas, s.mean, s.std_err});
    }
    return rows;
}

PinnedProfile empirical_pinned_profile(const ModelSpec& model, double beta, int n, int replicas,
                                       std::uint64_t master_seed) {
    if (model.defect != DefectKind::SubtreeConstant && model.defect != DefectKind::BranchShift)
        throw WrongModelKind("pinned profile requires a subtree-constant or branch-shift model");
    check_replicas(replicas, 2);
    if (!std::isfinite(beta)) throw OutOfDomain("beta must be finite");
    require_within_budget(model.d, n);

    std::vector<double> fracs(replicas), doms(replicas);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < replicas; ++r) {
        const Realization real{model, derive_seed(master_seed, r, SeedDomain::Replica), n};
        const STDecomposition dec = st_decomposition(real, beta);
        const double logz = dec.recombined_log_z();
        double frac = 0.0;
        int best = 0;
        double best_term = dec.term(0);
        for (int k = 1; k <= n; ++k) {
            frac += k * std::exp(dec.term(k) - logz);
            if (dec.term(k) > best_term) {
                best_term = dec.term(k);
                best = k;
            }
        }
        fracs[r] = frac / n;
        doms[r] = static_cast<double>(best) / n;
    }

    PinnedProfile prof;
    prof.n = n;
    prof.replicas = replicas;
    const Summary fs = summarize(fracs);
    prof.fraction_mean = fs.mean;
    prof.fraction_std_err = fs.std_err;
    const Summary ds = summarize(doms);
    prof.dominant_mean = ds.mean;
    prof.dominant_std_err = ds.std_err;
    auto bin = [](double x) { return std::min(9, std::max(0, static_cast<int>(x * 10.0))); };
    for (double f : fracs) ++prof.fraction_hist[bin(f)];
    for (double k : doms) ++prof.dominant_hist[bin(k)];
    return prof;
}

ConcentrationReport concentration_profile(const ModelSpec& model, double beta,
                                          const std::vector<int>& n_list, int replicas,
                                          std::uint64_t master_seed) {
    check_replicas(replicas, 30);
    if (!std::isfinite(beta)) throw OutOfDomain("beta must be finite");
    for (int n : n_list) require_within_budget(model.d, n);
    ConcentrationReport rep;
    for (int n : n_list) {
        std::vector<double> vals(replicas);
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < replicas; ++r) {
            const Realization real{model, derive_seed(master_seed, r, SeedDomain::Replica), n};
            vals[r] = log_partition(real, beta) / n;
        }
        const Summary s = summarize(vals);
        rep.rows.push_back({n, s.std_err * std::sqrt(static_cast<double>(replicas))});
    }
    rep.monotone_decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].stdev > rep.rows[i - 1].stdev) rep.monotone_decreasing = false;
    return rep;
}

PhaseScan phase_scan(const DisorderSpec& bulk, int d, int d1,
                     const std::vector<double>& beta_grid, const std::vector<double>& u_grid,
                     int n, int replicas, std::uint64_t master_seed, double tol) {
    if (beta_grid.empty() || u_grid.empty()) throw ConfigError("phase scan grids must not be empty");
    check_replicas(replicas, 2);
    require_within_budget(d, n);

    PhaseScan scan;
    scan.beta_grid = beta_grid;
    scan.u_grid = u_grid;
    const CriticalData cd = beta_c(bulk, d);
    scan.f_at_beta_c = cd.finite()
                           ? (cd.phi_cap - std::log(static_cast<double>(d1))) / cd.beta_c
                           : std::numeric_limits<double>::infinity();
    const std::size_t nu = u_grid.size();
    scan.cells.resize(beta_grid.size() * nu);

    // classification and curves serially (they can throw on bad grids)
    for (std::size_t bi = 0; bi < beta_grid.size(); ++bi) {
        for (std::size_t ui = 0; ui < nu; ++ui) {
            PhaseCell& cell = scan.cells[bi * nu + ui];
            cell.beta = beta_grid[bi];
            cell.u = u_grid[ui];
            cell.label = classify_st(bulk, d, d1, cell.beta, cell.u, tol);
            cell.f_line = F_line(bulk, d, d1, cell.beta);
            cell.j_line = (cd.finite() && cell.beta > cd.beta_c)
                              ? J_line(bulk, d, d1, cell.beta)
                              : std::numeric_limits<double>::quiet_NaN();
        }
    }

    const std::int64_t total = static_cast<std::int64_t>(scan.cells.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t ci = 0; ci < total; ++ci) {
        PhaseCell& cell = scan.cells[ci];
        const std::uint64_t cell_seed =
            derive_seed(master_seed, static_cast<std::uint64_t>(ci), SeedDomain::Cell);
        const ModelSpec model = ModelSpec::make(d, d1, bulk, DefectKind::SubtreeConstant, cell.u);
        std::vector<double> fe(replicas), fr(replicas);
        for (int r = 0; r < replicas; ++r) {
            const Realization real{model, derive_seed(cell_seed, r, SeedDomain::Replica), n};
            const STDecomposition dec = st_decomposition(real, cell.beta);
            const double logz = dec.recombined_log_z();
            fe[r] = logz / n;
            double frac = 0.0;
            for (int k = 1; k <= n; ++k) frac += k * std::exp(dec.term(k) - logz);
            fr[r] = frac / n;
        }
        const Summary es = summarize(fe);
        cell.fe_mean = es.mean;
        cell.fe_std_err = es.std_err;
        cell.pinned_fraction_mean = summarize(fr).mean;
    }
    return scan;
}

}  // namespace treepin
