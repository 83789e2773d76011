#include "pinchlab/pinch_functions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "pinchlab/errors.hpp"

namespace pinchlab {

namespace {

// 2 (1 - 2 rho); positive for every admissible rho.
double two_kappa(const FlowParams& p) { return 2.0 * (1.0 - 2.0 * p.rho); }

[[noreturn]] void domain_fail(const char* what, double value) {
    std::ostringstream os;
    os.precision(17);
    os << what << " (got " << value << ")";
    throw DomainError(os.str());
}

}  // namespace

std::string_view to_string(EstimateVariant v) {
    switch (v) {
        case EstimateVariant::NegRhoScalar: return "neg-rho-scalar";
        case EstimateVariant::NegRhoSectional: return "neg-rho-sectional";
        case EstimateVariant::NonnegRho: return "nonneg-rho";
    }
    return "unknown";
}

EstimateVariant estimate_variant_from_string(std::string_view name) {
    if (name == "neg-rho-scalar") return EstimateVariant::NegRhoScalar;
    if (name == "neg-rho-sectional") return EstimateVariant::NegRhoSectional;
    if (name == "nonneg-rho") return EstimateVariant::NonnegRho;
    throw ConfigError("unknown estimate variant '" + std::string(name) + "'");
}

double f_domain_start(const FlowParams& p) { return std::exp(1.0 - 4.0 * p.rho); }

double f_range_start(const FlowParams& p) { return -f_domain_start(p) / two_kappa(p); }

double f_pinch(double x, const FlowParams& p) {
    const double x0 = f_domain_start(p);
    if (!(x >= x0)) domain_fail("f is defined for x >= e^(1-4 rho)", x);
    const double k = two_kappa(p);
    return x * (std::log(x) - k) / k;
}

double f_inverse(double y, const FlowParams& p) {
    const double x0 = f_domain_start(p);
    const double y0 = f_range_start(p);
    if (!std::isfinite(y)) domain_fail("f_inverse needs a finite argument", y);
    if (y <= y0) {
        if (y >= y0 - 8.0 * std::numeric_limits<double>::epsilon() * std::abs(y0)) return x0;
        domain_fail("f_inverse argument below the range of f", y);
    }
    const double k = two_kappa(p);
    auto f = [&](double x) { return x * (std::log(x) - k) / k; };

    double lo = x0;
    double hi = 2.0 * x0;
    while (f(hi) < y) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-3 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < y ? lo : hi) = mid;
    }
    // Newton from the upper bracket end; f' = (log x - k + 1) / k > 0 there.
    double x = hi;
    for (int i = 0; i < 100; ++i) {
        const double slope = (std::log(x) - k + 1.0) / k;
        if (!(slope > 0.0)) break;
        double next = x - (f(x) - y) / slope;
        if (!(next > lo)) next = 0.5 * (lo + x);
        if (next >= x) break;
        const double step = x - next;
        x = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * x) break;
    }
    return x;
}

double lambda_pinch(const EigenTriple& s, const FlowParams& p) {
    const double ric = s.ricci_min();
    if (!(ric < 0.0)) domain_fail("Lambda requires mu + nu < 0", ric);
    return -s.lambda() / ric - std::log(-ric) / two_kappa(p);
}

double j_polynomial(const EigenTriple& s, const FlowParams& p) {
    const double l = s.lambda(), m = s.mu(), n = s.nu();
    const double sum = m + n;
    const double sq = m * m + n * n;
    const double k = two_kappa(p);
    return l * sq - sum * m * n - sum * sq / k - l * sum * sum / k +
           p.rho * sum * sum * (l + m + n) / (1.0 - 2.0 * p.rho);
}

double lambda_pinch_rate(const EigenTriple& s, const FlowParams& p) {
    const double ric = s.ricci_min();
    if (!(ric < 0.0)) domain_fail("Lambda requires mu + nu < 0", ric);
    return 2.0 * j_polynomial(s, p) / (ric * ric);
}

double i_polynomial(const EigenTriple& s, const FlowParams& p) {
    const double l = s.lambda(), m = s.mu(), n = s.nu();
    return -2.0 * n * (l * l + m * m) + 2.0 * m * l * (m + l) - 2.0 * n * m * l +
           4.0 * p.rho * n * n * (l + m) - 4.0 * p.rho * n * n * n;
}

double k_time_factor(const FlowParams& p, double t) { return 1.0 + 2.0 * p.eta_factor() * t; }

double w_time_factor(const FlowParams& p, double t) { return 1.0 - 4.0 * p.rho * t; }

double xi_pinch(const EigenTriple& s, const FlowParams& p, double t) {
    if (!(s.nu() < 0.0)) domain_fail("xi requires nu < 0", s.nu());
    if (!(p.theta > 0.0)) domain_fail("xi requires theta > 0", p.theta);
    const double tf = k_time_factor(p, t);
    if (!(tf > 0.0)) domain_fail("xi requires 1 + 2(1 + eta rho) t > 0", tf);
    return s.trace() / -s.nu() - p.theta * std::log(-s.nu()) - p.theta * std::log(tf);
}

double xi_pinch_rate(const EigenTriple& s, const FlowParams& p, double t) {
    if (!(s.nu() < 0.0)) domain_fail("xi requires nu < 0", s.nu());
    const double tf = k_time_factor(p, t);
    if (!(tf > 0.0)) domain_fail("xi requires 1 + 2(1 + eta rho) t > 0", tf);
    const EigenDerivative d = rhs(s, p);
    const double n = s.nu();
    // d/dt [T / (-nu)] = (-nu T' + T nu') / nu^2
    const double ratio_rate = (-n * d.trace() + s.trace() * d.dnu) / (n * n);
    return ratio_rate - p.theta * d.dnu / n - p.theta * 2.0 * p.eta_factor() / tf;
}

void require_variant_params(EstimateVariant v, const FlowParams& p) {
    validate(p);
    switch (v) {
        case EstimateVariant::NegRhoScalar:
            if (!(p.rho < 0.0)) domain_fail("neg-rho-scalar estimate requires rho < 0", p.rho);
            return;
        case EstimateVariant::NegRhoSectional:
            if (!(p.eta > 0.0)) domain_fail("neg-rho-sectional estimate requires eta > 0", p.eta);
            if (!(p.rho < 0.0 && p.rho > -1.0 / p.eta))
                domain_fail("neg-rho-sectional estimate requires rho in (-1/eta, 0)", p.rho);
            return;
        case EstimateVariant::NonnegRho:
            if (!(p.rho >= 0.0 && p.rho < 0.25))
                domain_fail("nonneg-rho estimate requires rho in [0, 1/4)", p.rho);
            return;
    }
}

double estimate_rhs(EstimateVariant v, double smallest, const FlowParams& p, double t) {
    require_variant_params(v, p);
    if (!(smallest < 0.0)) domain_fail("estimate needs a negative smallest curvature", smallest);
    const double a = -smallest;
    switch (v) {
        case EstimateVariant::NegRhoScalar: {
            const double tf = w_time_factor(p, t);
            if (!(tf > 0.0)) domain_fail("1 - 4 rho t must be positive", tf);
            const double k = 1.0 - 2.0 * p.rho;
            return a * (std::log(a) + std::log(tf) - 2.0 * k) / k;
        }
        case EstimateVariant::NegRhoSectional: {
            const double tf = k_time_factor(p, t);
            if (!(tf > 0.0)) domain_fail("1 + 2(1 + eta rho) t must be positive", tf);
            return -a * (std::log(a) + std::log(tf) + 6.0 * p.rho) / p.rho;
        }
        case EstimateVariant::NonnegRho: {
            const double tf = 1.0 + 2.0 * (1.0 - 4.0 * p.rho) * t;
            if (!(tf > 0.0)) domain_fail("1 + 2(1 - 4 rho) t must be positive", tf);
            return 2.0 * a * (std::log(a) + std::log(tf) - 3.0);
        }
    }
    return 0.0;
}

}  // namespace pinchlab
