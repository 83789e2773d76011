#include "pinchlab/cone_sets.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "pinchlab/errors.hpp"
#include "pinchlab/parallel.hpp"
#include "pinchlab/pinch_functions.hpp"
#include "pinchlab/random.hpp"

namespace pinchlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Running minimum over the constraints of one set.
struct MarginTracker {
    double margin = kInf;
    const char* label = "";

    void add(double m, const char* name) {
        if (m < margin || label[0] == '\0') {
            margin = m;
            label = name;
        }
    }
    MembershipResult result() const { return {margin >= 0.0, margin, label}; }
};

void add_k_constraints(MarginTracker& acc, const FlowParams& p, const EigenTriple& s, double t) {
    const double k = k_time_factor(p, t);
    const double tr = s.trace();
    acc.add(tr + 3.0 / k, "K.P1");
    if (s.nu() <= -1.0 / k) {
        const double bound = -p.theta * s.nu() * (std::log(-s.nu()) + std::log(k) - 3.0 / p.theta);
        acc.add(tr - bound, "K.P2");
    } else {
        acc.add(kInf, "K.P2");
    }
}

MembershipResult membership_x(const FlowParams& p, const EigenTriple& s) {
    MarginTracker acc;
    const double tr = s.trace();
    const double floor = f_range_start(p);
    acc.add(tr - floor, "X.trace");
    // Below the range of f the Ricci bound is undefined; the trace bound
    // already fails there.
    if (tr >= floor) acc.add(s.ricci_min() + f_inverse(tr, p), "X.ricci");
    return acc.result();
}

MembershipResult membership_w(const FlowParams& p, const EigenTriple& s, double t) {
    MarginTracker acc;
    const double tr = s.trace();
    const double w = w_time_factor(p, t);
    acc.add(tr, "W.trace");
    const double ric = s.ricci_min();
    if (ric <= -1.0 / w) {
        const double k = 2.0 * (1.0 - 2.0 * p.rho);
        const double bound = -ric * (std::log(-ric) + std::log(w) - k) / k;
        acc.add(tr - bound, "W.P3");
    } else {
        acc.add(kInf, "W.P3");
    }
    return acc.result();
}

}  // namespace

std::string_view to_string(SetKind kind) {
    switch (kind) {
        case SetKind::X: return "X";
        case SetKind::K: return "K";
        case SetKind::Y: return "Y";
        case SetKind::W: return "W";
    }
    return "?";
}

SetKind set_kind_from_string(std::string_view name) {
    if (name.size() == 1) {
        switch (std::toupper(static_cast<unsigned char>(name[0]))) {
            case 'X': return SetKind::X;
            case 'K': return SetKind::K;
            case 'Y': return SetKind::Y;
            case 'W': return SetKind::W;
            default: break;
        }
    }
    throw ConfigError("unknown set '" + std::string(name) + "' (expected X, K, Y or W)");
}

void SetSpec::validate() const {
    pinchlab::validate(params);
    switch (kind) {
        case SetKind::X:
        case SetKind::W:
            if (!(params.rho < 0.0)) {
                std::ostringstream os;
                os << "set " << to_string(kind) << " is only defined for rho < 0 (rho=" << params.rho
                   << ")";
                throw DomainError(os.str());
            }
            return;
        case SetKind::K:
        case SetKind::Y:
            params.require_eta_factor();
            return;
    }
}

bool SetSpec::admissible() const noexcept {
    try {
        validate();
        return true;
    } catch (const PinchError&) {
        return false;
    }
}

MembershipResult membership(const SetSpec& spec, const EigenTriple& state, double t) {
    spec.validate();
    if (!(t >= 0.0)) throw DomainError("membership time must be >= 0");
    const FlowParams& p = spec.params;
    switch (spec.kind) {
        case SetKind::X: return membership_x(p, state);
        case SetKind::W: return membership_w(p, state, t);
        case SetKind::K: {
            MarginTracker acc;
            add_k_constraints(acc, p, state, t);
            return acc.result();
        }
        case SetKind::Y: {
            MarginTracker acc;
            add_k_constraints(acc, p, state, t);
            acc.add(state.ricci_min(), "Y.ricci");
            return acc.result();
        }
    }
    return {};
}

double trigger_scale(const SetSpec& spec, double t) {
    switch (spec.kind) {
        case SetKind::X: return f_domain_start(spec.params);
        case SetKind::K:
        case SetKind::Y: return 1.0 / k_time_factor(spec.params, t);
        case SetKind::W: return 1.0 / w_time_factor(spec.params, t);
    }
    return 1.0;
}

double binding_scale(const SetSpec& spec, double t) {
    switch (spec.kind) {
        case SetKind::X: return f_domain_start(spec.params);
        case SetKind::K:
        case SetKind::Y: return std::exp(3.0 / spec.params.theta) / k_time_factor(spec.params, t);
        case SetKind::W:
            return std::exp(2.0 * (1.0 - 2.0 * spec.params.rho)) / w_time_factor(spec.params, t);
    }
    return 1.0;
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

namespace {

EigenTriple lerp(const EigenTriple& a, const EigenTriple& b, double s) {
    return EigenTriple::sorted(a.lambda() + s * (b.lambda() - a.lambda()),
                               a.mu() + s * (b.mu() - a.mu()), a.nu() + s * (b.nu() - a.nu()));
}

EigenTriple box_point(StreamRng& rng, double half_width) {
    const double a = rng.uniform(-half_width, half_width);
    const double b = rng.uniform(-half_width, half_width);
    const double c = rng.uniform(-half_width, half_width);
    return EigenTriple::sorted(a, b, c);
}

EigenTriple sample_one(const SetSpec& spec, double t, std::uint64_t stream_seed, double band,
                       const SamplerConfig& config) {
    StreamRng rng(stream_seed);
    const double half_width = config.box_factor * binding_scale(spec, t);
    auto margin = [&](const EigenTriple& s) { return membership(spec, s, t).margin; };

    int attempts = 0;
    while (attempts < config.attempts_per_point) {
        EigenTriple p = box_point(rng, half_width);
        ++attempts;
        const double mp = margin(p);
        if (mp >= 0.0 && mp <= band) return p;
        if (std::isinf(band)) continue;

        // Find a partner on the other side of the boundary.
        const bool p_inside = mp >= 0.0;
        EigenTriple q;
        bool found = false;
        while (attempts < config.attempts_per_point) {
            q = box_point(rng, half_width);
            ++attempts;
            const double mq = margin(q);
            if (mq >= 0.0 && mq <= band) return q;
            if ((mq >= 0.0) != p_inside) {
                found = true;
                break;
            }
        }
        if (!found) break;

        EigenTriple inside = p_inside ? p : q;
        EigenTriple outside = p_inside ? q : p;
        for (int it = 0; it < 200; ++it) {
            const EigenTriple mid = lerp(inside, outside, 0.5);
            const double mm = margin(mid);
            if (mm >= 0.0 && mm <= band) return mid;
            if (mid == inside || mid == outside) break;
            (mm >= 0.0 ? inside : outside) = mid;
        }
        // Bisection limit reached (only possible for very small bands).
        if (band == 0.0) return inside;
    }
    std::ostringstream os;
    os << "sampler exhausted " << config.attempts_per_point << " attempts for set "
       << to_string(spec.kind) << " at t=" << t << " with band " << band;
    throw SamplingExhausted(os.str());
}

}  // namespace

std::vector<EigenTriple> sample_set(const SetSpec& spec, double t, int count, std::uint64_t seed,
                                    double band, const SamplerConfig& config) {
    spec.validate();
    if (count <= 0) throw DomainError("sample count must be positive");
    if (!(band >= 0.0)) throw DomainError("band must be >= 0");
    if (!(t >= 0.0)) throw DomainError("sampling time must be >= 0");
    std::vector<EigenTriple> out(static_cast<std::size_t>(count));
    parallel_for(out.size(), [&](std::size_t i) {
        out[i] = sample_one(spec, t, derive_stream_seed(seed, i), band, config);
    });
    return out;
}

}  // namespace pinchlab
