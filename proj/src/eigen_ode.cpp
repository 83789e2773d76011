#include "pinchlab/eigen_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pinchlab/errors.hpp"

namespace pinchlab {

namespace {

void require_finite(double l, double m, double n) {
    if (!std::isfinite(l) || !std::isfinite(m) || !std::isfinite(n)) {
        std::ostringstream os;
        os << "eigenvalues must be finite, got (" << l << ", " << m << ", " << n << ")";
        throw DomainError(os.str());
    }
}

}  // namespace

EigenTriple EigenTriple::ordered(double lambda, double mu, double nu) {
    require_finite(lambda, mu, nu);
    if (!(lambda >= mu && mu >= nu)) {
        std::ostringstream os;
        os.precision(17);
        os << "eigenvalues out of order: (" << lambda << ", " << mu << ", " << nu << ")";
        throw OrderingError(os.str());
    }
    return {lambda, mu, nu, false};
}

EigenTriple EigenTriple::sorted(double a, double b, double c) {
    require_finite(a, b, c);
    const bool in_order = a >= b && b >= c;
    std::array<double, 3> v{a, b, c};
    std::sort(v.begin(), v.end(), std::greater<>());
    return {v[0], v[1], v[2], !in_order};
}

double EigenTriple::sup_norm() const {
    return std::max({std::abs(lambda_), std::abs(mu_), std::abs(nu_)});
}

EigenTriple EigenTriple::scaled(double s) const {
    if (!(s > 0.0)) throw DomainError("scale factor must be positive");
    return ordered(s * lambda_, s * mu_, s * nu_);
}

std::partial_ordering operator<=>(const EigenTriple& a, const EigenTriple& b) {
    if (auto c = a.lambda_ <=> b.lambda_; c != 0) return c;
    if (auto c = a.mu_ <=> b.mu_; c != 0) return c;
    return a.nu_ <=> b.nu_;
}

bool operator==(const EigenTriple& a, const EigenTriple& b) {
    return a.lambda_ == b.lambda_ && a.mu_ == b.mu_ && a.nu_ == b.nu_;
}

FlowParams FlowParams::make(double rho, double eta, double theta) {
    FlowParams p{rho, eta, theta};
    validate(p);
    return p;
}

void FlowParams::require_eta_factor() const {
    if (!(eta_factor() > 0.0)) {
        std::ostringstream os;
        os << "1 + eta*rho must be positive (eta=" << eta << ", rho=" << rho << ")";
        throw DomainError(os.str());
    }
}

void validate(const FlowParams& p) {
    if (!std::isfinite(p.rho) || !std::isfinite(p.eta) || !std::isfinite(p.theta))
        throw DomainError("flow parameters must be finite");
    if (!(p.rho < 0.25)) {
        std::ostringstream os;
        os << "rho must be < 1/4, got " << p.rho;
        throw DomainError(os.str());
    }
    if (!(p.theta > 0.0)) {
        std::ostringstream os;
        os << "theta must be > 0, got " << p.theta;
        throw DomainError(os.str());
    }
}

Vec3 rhs(const Vec3& s, double rho) {
    const double l = s[0], m = s[1], n = s[2];
    const double t = l + m + n;
    return {2.0 * l * l + 2.0 * m * n - 4.0 * rho * l * t,
            2.0 * m * m + 2.0 * l * n - 4.0 * rho * m * t,
            2.0 * n * n + 2.0 * l * m - 4.0 * rho * n * t};
}

EigenDerivative rhs(const EigenTriple& state, const FlowParams& params) {
    const Vec3 d = rhs(state.values(), params.rho);
    return {d[0], d[1], d[2]};
}

DerivedCurvatures derived_curvatures(const EigenTriple& s) {
    DerivedCurvatures out;
    out.ricci_eigs = {s.lambda() + s.mu(), s.lambda() + s.nu(), s.mu() + s.nu()};
    out.trace = s.trace();
    out.scalar = 2.0 * out.trace;
    return out;
}

double isotropic_solution(double c0, const FlowParams& params, double t) {
    const double denom = 1.0 - 4.0 * (1.0 - 3.0 * params.rho) * c0 * t;
    if (!(denom > 0.0)) {
        std::ostringstream os;
        os << "isotropic solution with c0=" << c0 << " has blown up before t=" << t;
        throw BlowUpReached(os.str());
    }
    return c0 / denom;
}

double isotropic_blowup_time(double c0, const FlowParams& params) {
    const double rate = 4.0 * (1.0 - 3.0 * params.rho) * c0;
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / rate;
}

double trace_bound_margin(const EigenTriple& state, const FlowParams& params) {
    const double tr = state.trace();
    return rhs(state, params).trace() - 4.0 / 3.0 * (1.0 - 3.0 * params.rho) * tr * tr;
}

}  // namespace pinchlab
