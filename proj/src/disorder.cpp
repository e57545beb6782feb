#include "treepin/disorder.hpp"

#include <algorithm>
#include <cmath>

namespace treepin {

bool in_defect_subtree(NodeAddress a, int d, int d1) {
    std::uint64_t x = a.index - 1;
    for (std::uint32_t g = 0; g < a.generation; ++g) {
        if (x % d >= static_cast<std::uint64_t>(d1)) return false;
        x /= d;
    }
    return true;
}

DisorderSpec DisorderSpec::gaussian(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
        throw ConfigError("gaussian disorder requires finite mu and sigma > 0");
    DisorderSpec s;
    s.kind_ = Kind::Gaussian;
    s.mu_ = mu;
    s.sigma_ = sigma;
    return s;
}

DisorderSpec DisorderSpec::bernoulli(double p, double lo, double hi) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("bernoulli disorder requires p in [0,1]");
    if (!(lo < hi)) throw ConfigError("bernoulli disorder requires lo < hi");
    DisorderSpec s;
    s.kind_ = Kind::Bernoulli;
    s.p_ = p;
    s.lo_ = lo;
    s.hi_ = hi;
    return s;
}

DisorderSpec DisorderSpec::constant(double c) {
    if (!std::isfinite(c)) throw ConfigError("constant disorder requires finite c");
    DisorderSpec s;
    s.kind_ = Kind::Constant;
    s.c_ = c;
    return s;
}

DisorderSpec DisorderSpec::shifted(DisorderSpec base, double shift) {
    if (base.kind_ == Kind::Shifted)
        throw ConfigError("shifted disorder cannot wrap another shifted disorder");
    if (!std::isfinite(shift)) throw ConfigError("shifted disorder requires finite shift");
    DisorderSpec s;
    s.kind_ = Kind::Shifted;
    s.shift_ = shift;
    s.base_ = std::make_shared<const DisorderSpec>(std::move(base));
    return s;
}

double DisorderSpec::log_mgf(double beta) const {
    switch (kind_) {
        case Kind::Gaussian:
            return mu_ * beta + 0.5 * sigma_ * sigma_ * beta * beta;
        case Kind::Bernoulli: {
            const double a = beta * hi_, b = beta * lo_;
            const double m = std::max(a, b);
            return m + std::log(p_ * std::exp(a - m) + (1.0 - p_) * std::exp(b - m));
        }
        case Kind::Constant:
            return c_ * beta;
        case Kind::Shifted:
            return base_->log_mgf(beta) + shift_ * beta;
    }
    return 0.0;
}

double DisorderSpec::log_mgf_deriv(double beta) const {
    switch (kind_) {
        case Kind::Gaussian:
            return mu_ + sigma_ * sigma_ * beta;
        case Kind::Bernoulli: {
            // mean of V under the exponential tilt e^{beta V}/E e^{beta V}
            const double a = beta * hi_, b = beta * lo_;
            const double m = std::max(a, b);
            const double wh = p_ * std::exp(a - m), wl = (1.0 - p_) * std::exp(b - m);
            const double q = wh / (wh + wl);
            return q * hi_ + (1.0 - q) * lo_;
        }
        case Kind::Constant:
            return c_;
        case Kind::Shifted:
            return base_->log_mgf_deriv(beta) + shift_;
    }
    return 0.0;
}

double DisorderSpec::log_mgf_second(double beta) const {
    switch (kind_) {
        case Kind::Gaussian:
            return sigma_ * sigma_;
        case Kind::Bernoulli: {
            const double a = beta * hi_, b = beta * lo_;
            const double m = std::max(a, b);
            const double wh = p_ * std::exp(a - m), wl = (1.0 - p_) * std::exp(b - m);
            const double q = wh / (wh + wl);
            return q * (1.0 - q) * (hi_ - lo_) * (hi_ - lo_);
        }
        case Kind::Constant:
            return 0.0;
        case Kind::Shifted:
            return base_->log_mgf_second(beta);
    }
    return 0.0;
}

double DisorderSpec::mean() const {
    switch (kind_) {
        case Kind::Gaussian:
            return mu_;
        case Kind::Bernoulli:
            return p_ * hi_ + (1.0 - p_) * lo_;
        case Kind::Constant:
            return c_;
        case Kind::Shifted:
            return base_->mean() + shift_;
    }
    return 0.0;
}

double DisorderSpec::variance() const {
    switch (kind_) {
        case Kind::Gaussian:
            return sigma_ * sigma_;
        case Kind::Bernoulli:
            return p_ * (1.0 - p_) * (hi_ - lo_) * (hi_ - lo_);
        case Kind::Constant:
            return 0.0;
        case Kind::Shifted:
            return base_->variance();
    }
    return 0.0;
}

bool DisorderSpec::degenerate() const {
    switch (kind_) {
        case Kind::Gaussian:
            return false;
        case Kind::Bernoulli:
            return p_ == 0.0 || p_ == 1.0;
        case Kind::Constant:
            return true;
        case Kind::Shifted:
            return base_->degenerate();
    }
    return true;
}

bool DisorderSpec::bounded_above() const {
    switch (kind_) {
        case Kind::Gaussian:
            return false;
        case Kind::Shifted:
            return base_->bounded_above();
        default:
            return true;
    }
}

double DisorderSpec::prob_at_top() const {
    switch (kind_) {
        case Kind::Bernoulli:
            return p_ > 0.0 ? p_ : 1.0;  // ess sup is hi when p>0, else lo
        case Kind::Constant:
            return 1.0;
        case Kind::Shifted:
            return base_->prob_at_top();
        default:
            return 0.0;
    }
}

bool DisorderSpec::operator==(const DisorderSpec& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
        case Kind::Gaussian:
            return mu_ == o.mu_ && sigma_ == o.sigma_;
        case Kind::Bernoulli:
            return p_ == o.p_ && lo_ == o.lo_ && hi_ == o.hi_;
        case Kind::Constant:
            return c_ == o.c_;
        case Kind::Shifted:
            return shift_ == o.shift_ && *base_ == *o.base_;
    }
    return false;
}

double node_uniform(std::uint64_t seed, NodeAddress addr) {
    const std::uint64_t bits =
        mix_words(seed ^ static_cast<std::uint64_t>(SeedDomain::Node), addr.generation, addr.index);
    // top 53 bits, centered on half-steps: strictly inside (0,1)
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double sample_node(const DisorderSpec& spec, std::uint64_t seed, NodeAddress addr) {
    switch (spec.kind()) {
        case DisorderSpec::Kind::Constant:
            return spec.c();
        case DisorderSpec::Kind::Shifted:
            return sample_node(spec.base(), seed, addr) + spec.shift();
        case DisorderSpec::Kind::Gaussian:
            return spec.mu() + spec.sigma() * normal_quantile(node_uniform(seed, addr));
        case DisorderSpec::Kind::Bernoulli: {
            // inverse CDF: F(lo) = 1-p, so u <= 1-p maps to lo
            const double u = node_uniform(seed, addr);
            return u <= 1.0 - spec.p() ? spec.lo() : spec.hi();
        }
    }
    return 0.0;
}

}  // namespace treepin
