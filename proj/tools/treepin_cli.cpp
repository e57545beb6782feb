// treepin command-line tool: critical curves, phase diagrams, free-energy
// ladders, oracle checks and pinned profiles for directed polymers on
// disordered trees with a defect branch or subtree.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treepin/closedform.hpp"
#include "treepin/io.hpp"
#include "treepin/logsum.hpp"
#include "treepin/montecarlo.hpp"
#include "treepin/treesim.hpp"

using json = nlohmann::json;
using namespace treepin;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string format = "csv";
    std::optional<int> replicas;
    std::optional<int> depth;
    std::optional<double> tolerance;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "master seed (overrides config)");
    cmd->add_option("--threads", o.threads, "worker thread cap");
    cmd->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--replicas", o.replicas, "replica count (overrides config)");
    cmd->add_option("--n", o.depth, "tree depth (overrides config)");
    cmd->add_option("--tolerance", o.tolerance, "check tolerance (overrides config)");
}

json load_config(const CommonOpts& o) {
    if (o.config_path.empty()) return json::object();
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot open config file " + o.config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    return j;
}

void apply_overrides(json& cfg, const CommonOpts& o) {
    if (o.seed) cfg["seed"] = *o.seed;
    if (o.replicas) cfg["replicas"] = *o.replicas;
    if (o.depth) cfg["n"] = *o.depth;
    if (o.tolerance) cfg["tolerance"] = *o.tolerance;
    if (!cfg.contains("seed")) cfg["seed"] = 1;
    if (o.threads) omp_set_num_threads(std::max(1, *o.threads));
}

std::uint64_t cfg_seed(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

int cfg_int(const json& cfg, const char* key, int fallback) {
    if (!cfg.contains(key)) return fallback;
    if (!cfg[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    return cfg[key].get<int>();
}

double cfg_num(const json& cfg, const char* key, double fallback) {
    if (!cfg.contains(key)) return fallback;
    if (!cfg[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    return cfg[key].get<double>();
}

std::vector<int> cfg_n_list(const json& cfg, std::vector<int> fallback) {
    if (!cfg.contains("n_list")) return fallback;
    if (!cfg["n_list"].is_array()) throw ConfigError("n_list must be an array of integers");
    std::vector<int> out;
    for (const auto& v : cfg["n_list"]) {
        if (!v.is_number_integer()) throw ConfigError("n_list entries must be integers");
        out.push_back(v.get<int>());
    }
    if (out.empty()) throw ConfigError("n_list must not be empty");
    return out;
}

DisorderSpec cfg_bulk(const json& cfg) {
    if (!cfg.contains("bulk")) return DisorderSpec::gaussian(0.0, 1.0);
    return disorder_from_json(cfg["bulk"]);
}

ModelSpec cfg_model(const json& cfg) {
    if (!cfg.contains("model")) throw ConfigError("config requires a 'model' object");
    return model_from_json(cfg["model"]);
}

void write_file(const fs::path& path, const std::string& contents) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << contents;
}

// A small CSV builder with the pinned numeric format (17 significant digits).
class Csv {
  public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) body_ += ',';
            body_ += header[i];
        }
        body_ += '\n';
    }
    Csv& num(double v) { return cell(fmt17(v)); }
    Csv& integer(long long v) { return cell(std::to_string(v)); }
    Csv& text(const std::string& s) { return cell(s); }
    const std::string& str() const { return body_; }

  private:
    Csv& cell(const std::string& s) {
        body_ += s;
        ++filled_;
        if (filled_ == cols_) {
            body_ += '\n';
            filled_ = 0;
        } else {
            body_ += ',';
        }
        return *this;
    }
    std::size_t cols_;
    std::size_t filled_ = 0;
    std::string body_;
};

// Tables are emitted as CSV or, with --format json, as arrays of row objects.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const {
        Csv csv(header);
        for (const auto& r : rows)
            for (const auto& c : r) csv.text(c);
        return csv.str();
    }
    json to_json() const {
        json arr = json::array();
        for (const auto& r : rows) {
            json obj;
            for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = r[i];
            arr.push_back(obj);
        }
        return arr;
    }
};

void emit_table(const Table& t, const fs::path& dir, const std::string& stem,
                const std::string& format) {
    if (format == "json")
        write_file(dir / (stem + ".json"), t.to_json().dump(2) + "\n");
    else
        write_file(dir / (stem + ".csv"), t.to_csv());
}

void write_record(const fs::path& dir, const std::string& command, const json& cfg,
                  const json& results) {
    RunRecord rec;
    rec.timestamp = utc_timestamp_now();
    rec.command = command;
    rec.config = cfg;
    rec.results = results;
    write_file(dir / (command + "_record.json"), run_record_to_json(rec).dump(2) + "\n");
}

// ---------------------------------------------------------------- critical

int cmd_critical(const CommonOpts& opts) {
    json cfg = load_config(opts);
    apply_overrides(cfg, opts);
    const DisorderSpec bulk = cfg_bulk(cfg);
    const int d = cfg_int(cfg, "d", 2);
    std::vector<double> grid = cfg.contains("beta_grid")
                                   ? parse_grid(cfg["beta_grid"], "beta")
                                   : parse_grid(json{{"min", 0.0}, {"max", 4.0}, {"count", 81}},
                                                "beta");
    cfg["bulk"] = disorder_to_json(bulk);
    cfg["d"] = d;
    cfg["beta_grid"] = grid;

    const CriticalData cd = beta_c(bulk, d);
    if (cd.finite()) {
        grid.push_back(cd.beta_c);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }

    Table t{{"beta", "lambda", "phi", "f_gap"}, {}};
    for (double b : grid) {
        if (b < 0.0) throw ConfigError("beta grid must be nonnegative");
        t.rows.push_back({fmt17(b), fmt17(bulk.log_mgf(b)), fmt17(phi(bulk, d, b)),
                          fmt17(f_gap(bulk, d, b))});
    }
    emit_table(t, opts.out_dir, "critical", opts.format);

    json results = {{"beta_c", fmt17(cd.beta_c)},
                    {"lambda_at_beta_c", fmt17(cd.lambda_at_beta_c)},
                    {"phi_cap", fmt17(cd.phi_cap)},
                    {"rows", t.rows.size()}};
    write_record(opts.out_dir, "critical", cfg, results);
    std::cout << "beta_c = " << fmt17(cd.beta_c) << "\n";
    return 0;
}

// ----------------------------------------------------------- phase-diagram

int cmd_phase_diagram(const CommonOpts& opts) {
    json cfg = load_config(opts);
    apply_overrides(cfg, opts);
    const DisorderSpec bulk = cfg_bulk(cfg);
    const int d = cfg_int(cfg, "d", 3);
    const int d1 = cfg_int(cfg, "d1", 2);
    const int n = cfg_int(cfg, "n", 8);
    const int replicas = cfg_int(cfg, "replicas", 50);
    const double tol = cfg_num(cfg, "tolerance", 1e-9);
    const int curve_points = cfg_int(cfg, "curve_points", 201);
    if (!cfg.contains("beta_grid") || !cfg.contains("u_grid"))
        throw ConfigError("phase-diagram requires beta_grid and u_grid");
    const std::vector<double> beta_grid = parse_grid(cfg["beta_grid"], "beta");
    const std::vector<double> u_grid = parse_grid(cfg["u_grid"], "u");
    cfg["bulk"] = disorder_to_json(bulk);
    cfg["d"] = d;
    cfg["d1"] = d1;
    cfg["n"] = n;
    cfg["replicas"] = replicas;
    cfg["tolerance"] = tol;
    cfg["curve_points"] = curve_points;
    cfg["beta_grid"] = beta_grid;
    cfg["u_grid"] = u_grid;

    const PhaseScan scan =
        phase_scan(bulk, d, d1, beta_grid, u_grid, n, replicas, cfg_seed(cfg), tol);

    Table t{{"beta", "u", "label", "F", "J", "F_at_beta_c", "free_energy_mean",
             "free_energy_stderr", "pinned_fraction_mean"},
            {}};
    for (const PhaseCell& c : scan.cells) {
        t.rows.push_back({fmt17(c.beta), fmt17(c.u), phase_label_name(c.label), fmt17(c.f_line),
                          fmt17(c.j_line), fmt17(scan.f_at_beta_c), fmt17(c.fe_mean),
                          fmt17(c.fe_std_err), fmt17(c.pinned_fraction_mean)});
    }
    emit_table(t, opts.out_dir, "phase_diagram", opts.format);

    // boundary curves on a denser grid, for plotting
    const CriticalData cd = beta_c(bulk, d);
    const double blo = *std::min_element(beta_grid.begin(), beta_grid.end());
    const double bhi = *std::max_element(beta_grid.begin(), beta_grid.end());
    Table curves{{"beta", "F", "J", "F_at_beta_c"}, {}};
    bool ordering_ok = true;
    for (int i = 0; i < curve_points; ++i) {
        const double b =
            curve_points == 1 ? blo : blo + (bhi - blo) * i / double(curve_points - 1);
        if (!(b > 0.0)) continue;
        const double fv = F_line(bulk, d, d1, b);
        double jv = std::numeric_limits<double>::quiet_NaN();
        if (cd.finite() && b > cd.beta_c) {
            jv = J_line(bulk, d, d1, b);
            if (!(jv < fv)) ordering_ok = false;
        }
        curves.rows.push_back({fmt17(b), fmt17(fv), fmt17(jv), fmt17(scan.f_at_beta_c)});
    }
    emit_table(curves, opts.out_dir, "boundary_curves", opts.format);

    json results = {{"cells", t.rows.size()},
                    {"beta_c", fmt17(cd.beta_c)},
                    {"F_at_beta_c", fmt17(scan.f_at_beta_c)},
                    {"curve_ordering_ok", ordering_ok}};
    write_record(opts.out_dir, "phase_diagram", cfg, results);
    if (!ordering_ok) {
        std::cerr << "boundary curve check failed: J >= F at some beta > beta_c\n";
        return 1;
    }
    std::cout << "phase diagram: " << t.rows.size() << " cells, beta_c = " << fmt17(cd.beta_c)
              << "\n";
    return 0;
}

// ------------------------------------------------------------- free-energy

int cmd_free_energy(const CommonOpts& opts) {
    json cfg = load_config(opts);
    apply_overrides(cfg, opts);
    const ModelSpec model = cfg_model(cfg);
    const double beta = cfg_num(cfg, "beta", 1.0);
    const int replicas = cfg_int(cfg, "replicas", 100);
    const std::vector<int> n_list = cfg_n_list(cfg, {4, 6, 8, 10});
    const bool extrapolate = cfg.contains("extrapolate") && cfg["extrapolate"].get<bool>();
    cfg["model"] = model_to_json(model);
    cfg["beta"] = beta;
    cfg["replicas"] = replicas;
    cfg["n_list"] = n_list;
    cfg["extrapolate"] = extrapolate;

    const LadderReport rep = estimate_free_energy(model, beta, n_list, replicas, cfg_seed(cfg));

    // optional least-squares intercept of mean against 1/n
    double intercept = std::numeric_limits<double>::quiet_NaN();
    if (extrapolate && rep.estimates.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& e : rep.estimates) {
            const double x = 1.0 / e.n;
            sx += x;
            sy += e.mean;
            sxx += x * x;
            sxy += x * e.mean;
        }
        const double m = rep.estimates.size();
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        intercept = (sy - slope * sx) / m;
    }

    std::vector<std::string> header = {"n",   "replicas",     "mean",         "stderr",
                                       "min", "max",          "anchor_lower", "anchor_upper",
                                       "anchor_name"};
    if (extrapolate) header.push_back("extrap_intercept");
    Table t{header, {}};
    for (const auto& e : rep.estimates) {
        std::vector<std::string> row = {std::to_string(e.n),   std::to_string(e.replicas),
                                        fmt17(e.mean),         fmt17(e.std_err),
                                        fmt17(e.min),          fmt17(e.max),
                                        fmt17(rep.anchor_lower), fmt17(rep.anchor_upper),
                                        rep.anchor_name};
        if (extrapolate) row.push_back(fmt17(intercept));
        t.rows.push_back(row);
    }
    emit_table(t, opts.out_dir, "free_energy", opts.format);

    json results = {{"anchor_lower", fmt17(rep.anchor_lower)},
                    {"anchor_upper", fmt17(rep.anchor_upper)},
                    {"anchor_name", rep.anchor_name},
                    {"final_mean", fmt17(rep.estimates.back().mean)},
                    {"final_stderr", fmt17(rep.estimates.back().std_err)}};
    if (extrapolate) results["extrap_intercept"] = fmt17(intercept);
    write_record(opts.out_dir, "free_energy", cfg, results);
    std::cout << "free energy at n=" << rep.estimates.back().n << ": "
              << fmt17(rep.estimates.back().mean) << " (anchor " << rep.anchor_name << ")\n";
    return 0;
}

// ----------------------------------------------------------- pinned-profile

int cmd_pinned_profile(const CommonOpts& opts) {
    json cfg = load_config(opts);
    apply_overrides(cfg, opts);
    const ModelSpec model = cfg_model(cfg);
    const double beta = cfg_num(cfg, "beta", 1.0);
    const int n = cfg_int(cfg, "n", 8);
    const int replicas = cfg_int(cfg, "replicas", 100);
    cfg["model"] = model_to_json(model);
    cfg["beta"] = beta;
    cfg["n"] = n;
    cfg["replicas"] = replicas;

    const PinnedProfile prof = empirical_pinned_profile(model, beta, n, replicas, cfg_seed(cfg));

    std::vector<std::string> header = {"observable", "mean", "stderr"};
    for (int b = 0; b < 10; ++b) header.push_back("bin_" + std::to_string(b));
    Table t{header, {}};
    std::vector<std::string> row = {"pinned_fraction", fmt17(prof.fraction_mean),
                                    fmt17(prof.fraction_std_err)};
    for (int c : prof.fraction_hist) row.push_back(std::to_string(c));
    t.rows.push_back(row);
    row = {"dominant_k_over_n", fmt17(prof.dominant_mean), fmt17(prof.dominant_std_err)};
    for (int c : prof.dominant_hist) row.push_back(std::to_string(c));
    t.rows.push_back(row);
    emit_table(t, opts.out_dir, "pinned_profile", opts.format);

    json results = {{"fraction_mean", fmt17(prof.fraction_mean)},
                    {"fraction_stderr", fmt17(prof.fraction_std_err)},
                    {"dominant_mean", fmt17(prof.dominant_mean)}};
    write_record(opts.out_dir, "pinned_profile", cfg, results);
    std::cout << "pinned fraction mean = " << fmt17(prof.fraction_mean) << "\n";
    return 0;
}

// ------------------------------------------------------------- oracle-check

struct CheckResult {
    std::string name;
    double max_dev = 0.0;
    double tol = 0.0;
    bool skipped = false;
    bool passed() const { return skipped || max_dev <= tol; }
};

int cmd_oracle_check(const CommonOpts& opts) {
    json cfg = load_config(opts);
    apply_overrides(cfg, opts);
    const double tol = cfg_num(cfg, "tolerance", 1e-9);
    const double moment_tol = cfg_num(cfg, "moment_tolerance", 1e-12);
    const bool continuous_moments =
        cfg.contains("continuous_moments") && cfg["continuous_moments"].get<bool>();
    cfg["tolerance"] = tol;
    cfg["moment_tolerance"] = moment_tol;
    cfg["continuous_moments"] = continuous_moments;

    const DisorderSpec gauss = DisorderSpec::gaussian(0.0, 1.0);
    const DisorderSpec bern = DisorderSpec::bernoulli(0.5, -1.0, 1.0);
    std::vector<CheckResult> checks;

    {  // recursive engine vs path enumeration
        CheckResult c{"recursive_vs_brute_force", 0.0, tol, false};
        for (DefectKind kind : {DefectKind::None, DefectKind::BranchShift,
                                DefectKind::SubtreeConstant, DefectKind::SubtreeShift}) {
            for (int d : {2, 3}) {
                const int d1 = kind == DefectKind::BranchShift || kind == DefectKind::None
                                   ? 1
                                   : d - 1;
                const ModelSpec m = ModelSpec::make(d, d1, gauss, kind, 0.8);
                for (int n = 1; n <= 5; ++n)
                    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                        const Realization r{m, seed, n};
                        c.max_dev = std::max(c.max_dev,
                                             std::fabs(log_partition(r, 1.1) -
                                                       brute_force_log_partition(r, 1.1)));
                    }
            }
        }
        checks.push_back(c);
    }
    {  // decomposition identity
        CheckResult c{"decomposition_identity", 0.0, tol, false};
        for (DefectKind kind : {DefectKind::SubtreeConstant, DefectKind::BranchShift}) {
            for (int d : {2, 3}) {
                const int d1 = kind == DefectKind::BranchShift ? 1 : d - 1;
                const ModelSpec m = ModelSpec::make(d, d1, gauss, kind, 0.6);
                for (int n = 1; n <= 6; ++n)
                    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                        const Realization r{m, seed, n};
                        const double z = log_partition(r, 0.9);
                        c.max_dev =
                            std::max(c.max_dev,
                                     std::fabs(z - st_decomposition(r, 0.9).recombined_log_z()) /
                                         std::max(1.0, std::fabs(z)));
                    }
            }
        }
        checks.push_back(c);
    }
    {  // exact enumeration vs closed-form moments (finite support only)
        CheckResult c{"moments_vs_enumeration", 0.0, moment_tol, false};
        const ModelSpec hd = ModelSpec::make(2, 1, bern, DefectKind::None, 0.0);
        const ModelSpec st = ModelSpec::make(2, 1, bern, DefectKind::SubtreeConstant, 0.4);
        for (int n : {1, 2, 3}) {
            for (double beta : {0.3, 1.0, 2.0}) {
                const double m1 = log_exact_moment(hd, beta, n, 1);
                const double f1 = n * (bern.log_mgf(beta) + std::log(2.0));
                c.max_dev = std::max(c.max_dev, std::fabs(m1 - f1) / std::max(1.0, std::fabs(f1)));
                const double m2 = log_exact_moment(hd, beta, n, 2);
                const double f2 = log_second_moment_hd(bern, 2, beta, n);
                c.max_dev = std::max(c.max_dev, std::fabs(m2 - f2) / std::max(1.0, std::fabs(f2)));
                for (int k = 0; k < n; ++k) {
                    const double mg = log_exact_moment_g(st, beta, k, n, 1);
                    const double fg = log_mean_g(bern, 2, 1, beta, k, n);
                    c.max_dev =
                        std::max(c.max_dev, std::fabs(mg - fg) / std::max(1.0, std::fabs(fg)));
                }
            }
        }
        checks.push_back(c);
    }
    if (continuous_moments) {
        // exact enumeration is undefined for continuous disorder
        CheckResult c{"moments_continuous", 0.0, moment_tol, true};
        std::cout << "check moments_continuous: skipped (continuous disorder has no "
                     "finite-support enumeration)\n";
        checks.push_back(c);
    }

    json results = json::array();
    bool all_ok = true;
    for (const auto& c : checks) {
        if (!c.skipped)
            std::cout << "check " << c.name << ": max deviation " << fmt17(c.max_dev) << " (tol "
                      << fmt17(c.tol) << ") " << (c.passed() ? "PASS" : "FAIL") << "\n";
        results.push_back({{"name", c.name},
                           {"max_deviation", fmt17(c.max_dev)},
                           {"tolerance", fmt17(c.tol)},
                           {"skipped", c.skipped},
                           {"passed", c.passed()}});
        all_ok = all_ok && c.passed();
    }
    write_record(opts.out_dir, "oracle_check", cfg, {{"checks", results}, {"passed", all_ok}});
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"directed polymers on disordered trees with a defect branch or subtree"};
    app.require_subcommand(1);

    CommonOpts critical_opts, phase_opts, free_opts, oracle_opts, pinned_opts;
    CLI::App* c1 = app.add_subcommand("critical", "critical temperature and free energy curve");
    add_common(c1, critical_opts);
    CLI::App* c2 = app.add_subcommand("phase-diagram", "phase labels and boundary curves");
    add_common(c2, phase_opts);
    CLI::App* c3 = app.add_subcommand("free-energy", "replica free-energy ladder with anchors");
    add_common(c3, free_opts);
    CLI::App* c4 = app.add_subcommand("oracle-check", "run the numerical oracle suites");
    add_common(c4, oracle_opts);
    CLI::App* c5 = app.add_subcommand("pinned-profile", "Gibbs pinned-fraction statistics");
    add_common(c5, pinned_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c1->parsed()) return cmd_critical(critical_opts);
        if (c2->parsed()) return cmd_phase_diagram(phase_opts);
        if (c3->parsed()) return cmd_free_energy(free_opts);
        if (c4->parsed()) return cmd_oracle_check(oracle_opts);
        if (c5->parsed()) return cmd_pinned_profile(pinned_opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
