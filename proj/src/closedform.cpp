#include "treepin/closedform.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <string>
#include <unordered_map>

#include "treepin/logsum.hpp"

namespace treepin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_arities(int d, int d1) {
    if (d < 2) throw ConfigError("tree arity d must be >= 2");
    if (d1 < 1 || d1 >= d) throw ConfigError("defect arity must satisfy 1 <= d1 < d");
}

std::string disorder_key(const DisorderSpec& s) {
    char buf[128];
    switch (s.kind()) {
        case DisorderSpec::Kind::Gaussian:
            std::snprintf(buf, sizeof buf, "g:%.17g:%.17g", s.mu(), s.sigma());
            return buf;
        case DisorderSpec::Kind::Bernoulli:
            std::snprintf(buf, sizeof buf, "b:%.17g:%.17g:%.17g", s.p(), s.lo(), s.hi());
            return buf;
        case DisorderSpec::Kind::Constant:
            std::snprintf(buf, sizeof buf, "c:%.17g", s.c());
            return buf;
        case DisorderSpec::Kind::Shifted:
            std::snprintf(buf, sizeof buf, "s:%.17g:", s.shift());
            return buf + disorder_key(s.base());
    }
    return "?";
}

std::mutex g_cache_mutex;
std::unordered_map<std::string, CriticalData> g_cache;
bool g_cache_enabled = true;

CriticalData compute_beta_c(const DisorderSpec& bulk, int d) {
    if (bulk.degenerate())
        throw DegenerateDisorder("beta_c requires non-degenerate disorder");
    if (bulk.bounded_above() && bulk.prob_at_top() >= 1.0 / d)
        return CriticalData{kInf, kNaN, kNaN};

    // f_gap(0) = log d > 0 and f_gap is strictly decreasing; double the upper
    // end until the sign flips, then bisect.
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (f_gap(bulk, d, hi) >= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 200)
            throw DomainError("beta_c bracket expansion failed; disorder lacks finite exponential moments?");
    }
    double root = 0.5 * (lo + hi);
    while (hi - lo > 1e-12) {
        root = 0.5 * (lo + hi);
        const double f = f_gap(bulk, d, root);
        if (std::fabs(f) < 1e-12) break;
        if (f > 0.0)
            lo = root;
        else
            hi = root;
    }
    const double lam = bulk.log_mgf(root);
    return CriticalData{root, lam, lam + std::log(static_cast<double>(d))};
}

}  // namespace

const char* phase_label_name(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::FullyPinned:
            return "FullyPinned";
        case PhaseLabel::Depinned:
            return "Depinned";
        case PhaseLabel::PartiallyPinned:
            return "PartiallyPinned";
        case PhaseLabel::DepinnedOrPartiallyPinned:
            return "DepinnedOrPartiallyPinned";
        case PhaseLabel::Boundary:
            return "Boundary";
    }
    return "?";
}

bool CriticalData::finite() const { return std::isfinite(beta_c); }

double f_gap(const DisorderSpec& bulk, int d, double beta) {
    if (d < 2) throw ConfigError("tree arity d must be >= 2");
    if (!(beta >= 0.0)) throw OutOfDomain("f_gap requires beta >= 0");
    return bulk.log_mgf(beta) + std::log(static_cast<double>(d)) - beta * bulk.log_mgf_deriv(beta);
}

CriticalData beta_c(const DisorderSpec& bulk, int d) {
    if (d < 2) throw ConfigError("tree arity d must be >= 2");
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        if (g_cache_enabled) {
            auto it = g_cache.find(disorder_key(bulk) + "|" + std::to_string(d));
            if (it != g_cache.end()) return it->second;
        }
    }
    CriticalData cd = compute_beta_c(bulk, d);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        if (g_cache_enabled) g_cache.emplace(disorder_key(bulk) + "|" + std::to_string(d), cd);
    }
    return cd;
}

void set_critical_cache_enabled(bool enabled) {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    g_cache_enabled = enabled;
    if (!enabled) g_cache.clear();
}

double phi(const DisorderSpec& bulk, int d, double beta) {
    if (!(beta >= 0.0)) throw OutOfDomain("phi requires beta >= 0");
    const CriticalData cd = beta_c(bulk, d);
    if (!cd.finite() || beta < cd.beta_c)
        return bulk.log_mgf(beta) + std::log(static_cast<double>(d));
    return beta / cd.beta_c * cd.phi_cap;
}

double phi_tilde(const DisorderSpec& bulk, int d, int d1, double beta) {
    require_arities(d, d1);
    if (!(beta >= 0.0)) throw OutOfDomain("phi_tilde requires beta >= 0");
    const CriticalData cd = beta_c(bulk, d);
    if (!cd.finite() || beta < cd.beta_c) return bulk.log_mgf(beta) + std::log(static_cast<double>(d1));
    return beta / cd.beta_c * (cd.lambda_at_beta_c + std::log(static_cast<double>(d1)));
}

double f_det(double beta, double u, int d, int d1) {
    require_arities(d, d1);
    if (!(beta >= 0.0)) throw OutOfDomain("f_det requires beta >= 0");
    return std::max(beta * u + std::log(static_cast<double>(d1)),
                    std::log(static_cast<double>(d)));
}

double u_c_det(double beta, int d, int d1) {
    require_arities(d, d1);
    if (beta == 0.0) throw BetaZero("u_c_det is undefined at beta = 0");
    if (!(beta > 0.0)) throw OutOfDomain("u_c_det requires beta > 0");
    return std::log(static_cast<double>(d) / d1) / beta;
}

double f_br(const DisorderSpec& bulk, int d, double beta, double u) {
    if (!(beta >= 0.0)) throw OutOfDomain("f_br requires beta >= 0");
    return std::max(beta * (u + bulk.mean()), phi(bulk, d, beta));
}

double u_c_br(const DisorderSpec& bulk, int d, double beta) {
    if (beta == 0.0) throw BetaZero("u_c_br is undefined at beta = 0");
    if (!(beta > 0.0)) throw OutOfDomain("u_c_br requires beta > 0");
    const CriticalData cd = beta_c(bulk, d);
    if (!cd.finite() || beta < cd.beta_c)
        return (bulk.log_mgf(beta) + std::log(static_cast<double>(d))) / beta - bulk.mean();
    return cd.phi_cap / cd.beta_c - bulk.mean();
}

double F_line(const DisorderSpec& bulk, int d, int d1, double beta) {
    require_arities(d, d1);
    if (beta == 0.0) throw BetaZero("F is undefined at beta = 0");
    if (!(beta > 0.0)) throw OutOfDomain("F requires beta > 0");
    return (bulk.log_mgf(beta) + std::log(static_cast<double>(d)) -
            std::log(static_cast<double>(d1))) /
           beta;
}

double J_line(const DisorderSpec& bulk, int d, int d1, double beta) {
    require_arities(d, d1);
    const CriticalData cd = beta_c(bulk, d);
    if (!cd.finite() || !(beta > cd.beta_c))
        throw OutOfDomain("J is defined only for beta > beta_c");
    const double logd = std::log(static_cast<double>(d));
    const double logd1 = std::log(static_cast<double>(d1));
    const double lam = bulk.log_mgf(beta);
    const double den = bulk.log_mgf(2.0 * beta) - 2.0 * lam - logd;
    if (!(den > 0.0))
        throw NonpositiveDenominator(
            "lambda(2b) - 2 lambda(b) - log d must be positive above beta_c");
    const double ph = beta / cd.beta_c * cd.phi_cap;
    return (ph - logd1 - (lam + logd - ph) * logd1 / den) / beta;
}

double log_theta(const DisorderSpec& bulk, int d, double beta) {
    if (d < 2) throw ConfigError("tree arity d must be >= 2");
    if (!(beta >= 0.0)) throw OutOfDomain("theta requires beta >= 0");
    const double logd = std::log(static_cast<double>(d));
    return std::max(2.0 * bulk.log_mgf(beta) + 2.0 * logd, bulk.log_mgf(2.0 * beta) + logd);
}

double t_star(const DisorderSpec& bulk, int d, int d1, double beta) {
    require_arities(d, d1);
    if (d1 == 1)
        throw DegenerateDefectArity(
            "t_star requires d1 >= 2: at d1 = 1 the admissible interval (t*, 1) is empty");
    const CriticalData cd = beta_c(bulk, d);
    if (!cd.finite() || !(beta > cd.beta_c))
        throw OutOfDomain("t_star is defined only for beta > beta_c");
    const double x =
        bulk.log_mgf(2.0 * beta) - 2.0 * bulk.log_mgf(beta) - std::log(static_cast<double>(d));
    if (!(x > 0.0))
        throw NonpositiveDenominator(
            "lambda(2b) - 2 lambda(b) - log d must be positive above beta_c");
    return x / (std::log(static_cast<double>(d1)) + x);
}

double L_func(const DisorderSpec& bulk, int d, double beta, double t) {
    if (!(t > 0.0 && t <= 1.0)) throw OutOfDomain("L is defined for t in (0, 1]");
    const double ph = phi(bulk, d, beta);
    return ph - (1.0 - t) / t *
                    (bulk.log_mgf(beta) + std::log(static_cast<double>(d)) - ph);
}

double log_second_moment_hd(const DisorderSpec& bulk, int d, double beta, int n) {
    if (d < 2) throw ConfigError("tree arity d must be >= 2");
    if (n < 1) throw IndexOutOfRange("second moment requires n >= 1");
    const double logd = std::log(static_cast<double>(d));
    const double lam = bulk.log_mgf(beta);
    const double lam2 = bulk.log_mgf(2.0 * beta);
    const double log_cross = std::log(static_cast<double>(d)) + std::log(d - 1.0) + 2.0 * lam;
    const double log_diag_base = lam2 + logd;      // log(d e^{lambda(2b)})
    const double log_pair_base = 2.0 * (lam + logd);  // log(d^2 e^{2 lambda})
    RunningLse acc;
    for (int k = 0; k < n; ++k)
        acc.add(log_cross + k * log_diag_base + (n - 1 - k) * log_pair_base);
    acc.add(n * log_diag_base);
    return acc.value();
}

double log_mean_g(const DisorderSpec& bulk, int d, int d1, double beta, int k, int n) {
    require_arities(d, d1);
    if (k < 0 || k >= n) throw IndexOutOfRange("mean_g requires 0 <= k < n");
    return k * std::log(static_cast<double>(d1)) + std::log(static_cast<double>(d - d1)) +
           (n - k - 1) * std::log(static_cast<double>(d)) + (n - k) * bulk.log_mgf(beta);
}

PhaseLabel classify_st(const DisorderSpec& bulk, int d, int d1, double beta, double u,
                       double tol) {
    require_arities(d, d1);
    if (!(beta > 0.0)) throw OutOfDomain("phase classification requires beta > 0");
    if (!(tol >= 0.0)) throw OutOfDomain("boundary tolerance must be >= 0");
    const CriticalData cd = beta_c(bulk, d);
    const double fb = F_line(bulk, d, d1, beta);
    if (!cd.finite() || beta <= cd.beta_c) {
        if (u >= fb + tol) return PhaseLabel::FullyPinned;
        if (u <= fb - tol) return PhaseLabel::Depinned;
        return PhaseLabel::Boundary;
    }
    const double fbc = (cd.phi_cap - std::log(static_cast<double>(d1))) / cd.beta_c;
    const double jb = J_line(bulk, d, d1, beta);
    if (u >= fb + tol) return PhaseLabel::FullyPinned;
    if (u <= fbc - tol) return PhaseLabel::Depinned;
    if (u > jb + tol && u < fb - tol) return PhaseLabel::PartiallyPinned;
    if (u > fbc + tol && u <= jb - tol) return PhaseLabel::DepinnedOrPartiallyPinned;
    return PhaseLabel::Boundary;
}

}  // namespace treepin
