/// @file cone_sets.hpp
/// @brief Membership predicates and boundary samplers for the preserved sets
///        X, K(t), Y(t) and W(t).
///
/// With T = lambda + mu + nu and the time factors
/// k(t) = 1 + 2 (1 + eta rho) t, w(t) = 1 - 4 rho t:
///
///   X     T >= -e^{1-4 rho} / (2 (1 - 2 rho)),  mu + nu >= -f^{-1}(T)
///   K(t)  (P1) T >= -3 / k(t)
///         (P2) nu <= -1/k(t)  =>  T >= -theta nu (log(-nu) + log k(t) - 3/theta)
///   Y(t)  K(t) and mu + nu >= 0
///   W(t)  T >= 0
///         (P3) mu + nu <= -1/w(t)  =>
///              T >= -(mu + nu) (log(-mu-nu) + log w(t) - 2 (1 - 2 rho)) / (2 (1 - 2 rho))
///
/// Margins are raw "lhs - rhs" values, so a state is a member iff its margin
/// is >= 0. A conditional bound whose trigger is false contributes +inf.
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "pinchlab/eigen_ode.hpp"

namespace pinchlab {

enum class SetKind { X, K, Y, W };

std::string_view to_string(SetKind kind);
/// Accepts "X", "K", "Y", "W" (either case).
SetKind set_kind_from_string(std::string_view name);

struct SetSpec {
    SetKind kind = SetKind::X;
    FlowParams params;

    /// Throws DomainError unless the parameters suit the kind: X and W need
    /// rho < 0; K and Y need 1 + eta rho > 0 and theta > 0.
    void validate() const;
    bool admissible() const noexcept;
};

struct MembershipResult {
    bool member = false;
    double margin = 0.0;
    /// Label of the binding inequality, e.g. "K.P2" or "W.trace".
    std::string active_constraint;
};

/// Evaluates the set's inequalities at time t >= 0.
MembershipResult membership(const SetSpec& spec, const EigenTriple& state, double t);

/// Typical curvature scale of the set's boundary at time t: e^{1-4 rho} for
/// X, 1/k(t) for K and Y, 1/w(t) for W.
double trigger_scale(const SetSpec& spec, double t);

/// Curvature size at which the set's second constraint starts to matter:
/// e^{1-4 rho} for X (where f^{-1} starts), e^{3/theta}/k(t) for K and Y and
/// e^{2(1-2 rho)}/w(t) for W (where the (P2) and (P3) bounds turn positive).
double binding_scale(const SetSpec& spec, double t);

struct SamplerConfig {
    /// Half-width of the sampling box is box_factor * binding_scale.
    double box_factor = 10.0;
    /// Candidate draws allowed per returned state before giving up.
    int attempts_per_point = 20000;
};

/// Name and seeding scheme of the generator behind every sampler, recorded
/// in report headers.
inline constexpr std::string_view kPrngDescription =
    "mt19937_64; stream i seeded with splitmix64(seed + 0x9e3779b97f4a7c15*(i+1)); "
    "uniform doubles from the top 53 bits";

/// Seed of the independent stream used for item `index` of a seeded batch.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

/// `count` ordered states in the set at time t whose margin lies in
/// [0, band]. band = +inf samples the whole set inside the box.
///
/// Each state comes from its own generator stream (see kPrngDescription), so
/// the output does not depend on how the work is split. For finite band a
/// uniform box point and a second point on the other side of the boundary
/// are joined by a segment and bisected until the margin falls inside the
/// band; the margin is continuous along segments of ordered states.
/// Throws SamplingExhausted when a point exceeds its attempt budget.
std::vector<EigenTriple> sample_set(const SetSpec& spec, double t, int count, std::uint64_t seed,
                                    double band, const SamplerConfig& config = {});

}  // namespace pinchlab
