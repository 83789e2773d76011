/// @file eigen_ode.hpp
/// @brief State space and reaction vector field of the curvature-operator
///        eigenvalue ODE in dimension three.
///
/// The curvature operator of a three-manifold has three eigenvalues
/// lambda >= mu >= nu. Dropping the diffusion part of the curvature evolution
/// under the Ricci-Bourguignon flow leaves the quadratic system
///
///     lambda' = 2 lambda^2 + 2 mu nu     - 4 rho lambda (lambda + mu + nu)
///     mu'     = 2 mu^2     + 2 lambda nu - 4 rho mu     (lambda + mu + nu)
///     nu'     = 2 nu^2     + 2 lambda mu - 4 rho nu     (lambda + mu + nu)
///
/// which preserves the ordering. Everything here is a pure function of its
/// arguments.
#pragma once

#include <array>
#include <compare>
#include <cstdint>

namespace pinchlab {

using Vec3 = std::array<double, 3>;

/// Ordered eigenvalue triple lambda >= mu >= nu, all finite.
class EigenTriple {
public:
    /// The origin (0, 0, 0).
    constexpr EigenTriple() = default;

    /// Requires lambda >= mu >= nu; throws OrderingError otherwise and
    /// DomainError on non-finite input.
    static EigenTriple ordered(double lambda, double mu, double nu);

    /// Sorts the three values descending. `reordered()` reports whether the
    /// input was out of order.
    static EigenTriple sorted(double a, double b, double c);
    static EigenTriple sorted(const Vec3& v) { return sorted(v[0], v[1], v[2]); }

    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    double nu() const { return nu_; }
    double trace() const { return lambda_ + mu_ + nu_; }
    /// Smallest Ricci eigenvalue mu + nu.
    double ricci_min() const { return mu_ + nu_; }
    double sup_norm() const;
    bool reordered() const { return reordered_; }
    Vec3 values() const { return {lambda_, mu_, nu_}; }

    /// s * state for s > 0 (ordering is kept).
    EigenTriple scaled(double s) const;

    /// Lexicographic order on (lambda, mu, nu); used for deterministic
    /// tie-breaking. The reorder flag does not take part.
    friend std::partial_ordering operator<=>(const EigenTriple& a, const EigenTriple& b);
    friend bool operator==(const EigenTriple& a, const EigenTriple& b);

private:
    constexpr EigenTriple(double l, double m, double n, bool reordered)
        : lambda_(l), mu_(m), nu_(n), reordered_(reordered) {}

    double lambda_ = 0.0;
    double mu_ = 0.0;
    double nu_ = 0.0;
    bool reordered_ = false;
};

/// Flow parameter bundle. `rho` is the Bourguignon parameter; `eta` and
/// `theta` only enter the time-dependent sets and the auxiliary function xi.
struct FlowParams {
    double rho = 0.0;
    double eta = -4.0;
    double theta = 1.0;

    /// Validating factory: rho < 1/4, theta > 0, all finite.
    static FlowParams make(double rho, double eta = -4.0, double theta = 1.0);

    /// 1 + eta * rho, which must be positive wherever K, Y or xi is used.
    double eta_factor() const { return 1.0 + eta * rho; }

    /// Throws DomainError unless 1 + eta * rho > 0.
    void require_eta_factor() const;

    friend bool operator==(const FlowParams&, const FlowParams&) = default;
};

/// Throws DomainError if the bundle violates rho < 1/4, theta > 0 or has a
/// non-finite field.
void validate(const FlowParams& params);

struct EigenDerivative {
    double dlambda = 0.0;
    double dmu = 0.0;
    double dnu = 0.0;

    double trace() const { return dlambda + dmu + dnu; }
};

struct DerivedCurvatures {
    /// Ricci eigenvalues lambda+mu >= lambda+nu >= mu+nu.
    Vec3 ricci_eigs{};
    /// R = 2 (lambda + mu + nu).
    double scalar = 0.0;
    double trace = 0.0;
};

/// Reaction vector field on raw components; no reordering is applied.
Vec3 rhs(const Vec3& state, double rho);

EigenDerivative rhs(const EigenTriple& state, const FlowParams& params);

DerivedCurvatures derived_curvatures(const EigenTriple& state);

/// Exact solution c(t) = c0 / (1 - 4 (1 - 3 rho) c0 t) for isotropic data
/// lambda = mu = nu = c0. Throws BlowUpReached once the denominator is <= 0.
double isotropic_solution(double c0, const FlowParams& params, double t);

/// Blow-up time 1 / (4 (1 - 3 rho) c0) of isotropic data; +infinity when
/// c0 <= 0.
double isotropic_blowup_time(double c0, const FlowParams& params);

/// Slack of the trace inequality
/// (tr Q)' - 4/3 (1 - 3 rho) (tr Q)^2 >= 0, computed from rhs.
double trace_bound_margin(const EigenTriple& state, const FlowParams& params);

}  // namespace pinchlab
