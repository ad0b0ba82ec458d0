#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pwell/embedding.hpp"
#include "pwell/grid.hpp"
#include "pwell/nonlinearity.hpp"
#include "pwell/random_fields.hpp"
#include "pwell/rng.hpp"

namespace pwell {

// Precomputed domain/nonlinearity constants feeding the well formulas.
struct WellContext {
    double lambda1 = 0.0;
    double c_star = 0.0;  // embedding constant estimate (lower bound)
    double sup_a = 0.0;   // sup u f(u)/|u|^gamma
    double growth_A = 0.0;
    double growth_B = 0.0;
    double probe_u = 0.0;
    double omega_measure = 0.0;

    // a(delta) = 1/2 - delta/alpha - beta/(lambda1*alpha)
    double a_coeff(const ConditionParams& p, double delta) const {
        return 0.5 - delta / p.alpha - p.beta / (lambda1 * p.alpha);
    }

    // r(delta) = (delta / (a C*^gamma))^{1/(gamma-2)}
    double radius(const ConditionParams& p, double delta) const {
        return std::pow(delta / (sup_a * std::pow(c_star, p.gamma)), 1.0 / (p.gamma - 2.0));
    }

    static WellContext build(const Grid& g, const NonlinearitySpec& spec,
                             const ConditionParams& params, double probe_u = 2.0,
                             int embedding_starts = 8, std::uint64_t seed = 0,
                             std::optional<double> c_star_override = {}) {
        WellContext ctx;
        ctx.lambda1 = pwell::lambda1(g);
        params.validate_against(ctx.lambda1);
        ctx.c_star = c_star_override ? *c_star_override
                                     : embedding_constant(g, params.gamma, embedding_starts,
                                                          1e-10, 20000, seed);
        ctx.sup_a = estimate_sup_a(spec, params);
        const auto gc = growth_constants(spec, params, probe_u);
        ctx.growth_A = gc.A;
        ctx.growth_B = gc.B;
        ctx.probe_u = probe_u;
        ctx.omega_measure = g.measure();
        return ctx;
    }
};

struct FunctionalReadout {
    double j_value = 0.0;      // J(u)
    double i_value = 0.0;      // I(u)
    double i_delta = 0.0;      // I_delta(u)
    double grad_norm_sq = 0.0;
    double l2_norm_sq = 0.0;
    double f_integral = 0.0;   // int u f(u)
    double F_integral = 0.0;   // int [F(u) - sigma]
};

inline FunctionalReadout evaluate(const Grid& g, const NonlinearitySpec& spec,
                                  const ConditionParams& params, const Field& u,
                                  double delta = 1.0) {
    if (delta <= 0.0) throw std::invalid_argument("evaluate: delta must be > 0");
    check_match(g, u, "evaluate");
    if (!u.all_finite()) throw std::runtime_error("evaluate: field has non-finite entries");
    FunctionalReadout r;
    const double w = g.node_weight();
    double fi = 0.0, Fi = 0.0;
    for (double x : u.v) {
        fi += x * spec.f(x);
        Fi += spec.F(x);
    }
    r.f_integral = fi * w;
    r.F_integral = Fi * w - params.sigma * g.measure();
    r.grad_norm_sq = grad_norm_sq(g, u);
    r.l2_norm_sq = l2_norm_sq(g, u);
    r.j_value = 0.5 * r.grad_norm_sq - r.F_integral;
    r.i_value = r.grad_norm_sq - r.f_integral;
    r.i_delta = delta * r.grad_norm_sq - r.f_integral;
    return r;
}

// phi(eps) = (1/eps) int u f(eps u)
inline double phi(const Grid& g, const NonlinearitySpec& spec, const Field& u, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("phi: eps must be > 0");
    check_match(g, u, "phi");
    double s = 0.0;
    for (double x : u.v) s += x * spec.f(eps * x);
    return s * g.node_weight() / eps;
}

inline void require_case_b_positive(const NonlinearitySpec& spec, const Field& u,
                                    const char* what) {
    if (spec.h_case != HCase::B) return;
    for (double x : u.v)
        if (!(x > 0.0))
            throw std::invalid_argument(std::string(what) +
                                        ": case (H)-(b) requires u > 0 at all nodes");
}

// Unique eps* with I_delta(eps* u) = 0: bracket the sign change of
// eps -> I_delta(eps u) on a log grid, then bisect to relative 1e-10.
inline double nehari_scale(const Grid& g, const NonlinearitySpec& spec, const Field& u,
                           double delta = 1.0) {
    check_match(g, u, "nehari_scale");
    const double G = grad_norm_sq(g, u);
    if (G <= 0.0) throw std::invalid_argument("nehari_scale: need ||grad u|| != 0");
    require_case_b_positive(spec, u, "nehari_scale");

    auto i_of = [&](double eps) {
        // I_delta(eps u) = eps * (delta*eps*G - int u f(eps u)) = eps^2 (delta G - phi(eps))
        return delta * G - phi(g, spec, u, eps);
    };

    double lo = 1e-8, hi = 1e-8;
    double flo = i_of(lo);
    if (flo <= 0.0)
        throw std::runtime_error("nehari_scale: I_delta(eps u) not positive for small eps");
    bool bracketed = false;
    while (hi < 1e8) {
        hi *= 2.0;
        if (i_of(hi) < 0.0) {
            bracketed = true;
            break;
        }
        lo = hi;
    }
    if (!bracketed)
        throw std::runtime_error(
            "nehari_scale: no sign change of I_delta(eps u) in [1e-8, 1e8]; "
            "inadmissible nonlinearity/field pair");

    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (i_of(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct FiberSample {
    double eps = 0.0;
    double j = 0.0;
    double i = 0.0;
};

struct FiberCurve {
    std::vector<FiberSample> samples;
    double eps_argmax_j = 0.0;
    double eps_zero_crossing_i = 0.0; // first sign change of I along the grid
};

inline FiberCurve fiber_scan(const Grid& g, const NonlinearitySpec& spec,
                             const ConditionParams& params, const Field& u,
                             const std::vector<double>& eps_grid) {
    require_case_b_positive(spec, u, "fiber_scan");
    FiberCurve c;
    c.samples.reserve(eps_grid.size());
    double best_j = -std::numeric_limits<double>::infinity();
    for (double eps : eps_grid) {
        Field scaled(u.v);
        for (double& x : scaled.v) x *= eps;
        const auto r = evaluate(g, spec, params, scaled);
        c.samples.push_back({eps, r.j_value, r.i_value});
        if (r.j_value > best_j) {
            best_j = r.j_value;
            c.eps_argmax_j = eps;
        }
    }
    for (std::size_t k = 1; k < c.samples.size(); ++k) {
        if (c.samples[k - 1].i > 0.0 && c.samples[k].i <= 0.0) {
            // linear interpolation of the crossing
            const auto& a = c.samples[k - 1];
            const auto& b = c.samples[k];
            c.eps_zero_crossing_i = a.eps + (b.eps - a.eps) * a.i / (a.i - b.i);
            break;
        }
    }
    return c;
}

struct DepthEstimate {
    double value = 0.0;          // d(delta) estimate (upper bound of the discrete inf)
    double value_shifted = 0.0;  // value - sigma*|Omega|, reported for sigma > 0
    Field minimizer;
};

// Upper-bound estimate of d(delta) = inf { J(u) : I_delta(u) = 0 }.
// Directions: discrete eigenmodes, spectrally filtered noise, then local
// descent with re-projection onto the Nehari constraint. The budget counts
// candidate evaluations.
inline DepthEstimate depth(const Grid& g, const NonlinearitySpec& spec,
                           const ConditionParams& params, double delta, int search_budget,
                           std::uint64_t seed = 0) {
    if (search_budget < 1) throw std::invalid_argument("depth: search_budget must be >= 1");
    if (delta <= 0.0) throw std::invalid_argument("depth: delta must be > 0");

    auto project_positive = [&](Field& dir) {
        if (spec.h_case != HCase::B) return;
        for (double& x : dir.v) x = std::max(x, 0.0) + 1e-12;
    };

    auto value_of = [&](const Field& dir) -> std::optional<std::pair<double, Field>> {
        double G = grad_norm_sq(g, dir);
        if (!(G > 0.0)) return std::nullopt;
        double eps;
        try {
            eps = nehari_scale(g, spec, dir, delta);
        } catch (const std::exception&) {
            return std::nullopt;
        }
        Field scaled(dir.v);
        for (double& x : scaled.v) x *= eps;
        const auto r = evaluate(g, spec, params, scaled, delta);
        return std::make_pair(r.j_value, std::move(scaled));
    };

    DepthEstimate best;
    best.value = std::numeric_limits<double>::infinity();
    Field best_dir;
    int used = 0;

    auto consider = [&](Field dir) {
        project_positive(dir);
        ++used;
        auto res = value_of(dir);
        if (res && res->first < best.value) {
            best.value = res->first;
            best.minimizer = std::move(res->second);
            best_dir = std::move(dir);
        }
    };

    const int n_modes = g.dim == 1 ? std::min(4, search_budget) : std::min(4, search_budget);
    for (int k = 1; k <= n_modes && used < search_budget; ++k) consider(eigenmode(g, k, k));

    auto rng = make_stream(seed, SeedPurpose::DepthSearch);
    const int n_random = std::min(search_budget - used, std::max(0, search_budget / 4));
    for (int k = 0; k < n_random; ++k) consider(random_smooth_field(g, rng));

    // Sign-preserving perturbation descent around the incumbent direction.
    double eta = 0.25;
    while (used < search_budget && best_dir.size() > 0) {
        Field trial = best_dir;
        Field noise = random_smooth_field(g, rng);
        const double scale = eta * best_dir.max_abs() / std::max(noise.max_abs(), 1e-300);
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += scale * noise[i];
        project_positive(trial);
        ++used;
        auto res = value_of(trial);
        // Stop shrinking below a modest resolution: the estimate only needs to
        // be a tight upper bound, not a converged minimum.
        if (res && res->first < best.value * (1.0 - 1e-12)) {
            best.value = res->first;
            best.minimizer = std::move(res->second);
            best_dir = std::move(trial);
            eta = std::min(0.5, eta * 1.3);
        } else {
            eta *= 0.7;
            if (eta < 1e-6) eta = 0.25;
        }
    }

    if (!std::isfinite(best.value))
        throw std::runtime_error("depth: no admissible direction found within budget");
    best.value_shifted = best.value - params.sigma * g.measure();
    return best;
}

struct DepthCurve {
    std::vector<double> deltas;
    std::vector<double> depths;
    std::vector<double> radius;   // r(delta)
    std::vector<double> a_coeffs; // a(delta)
    double b_root = 0.0;          // estimated root of d(b) = 0
    bool b_bracketed = false;     // false: d stayed positive up to max sampled delta
    double d_at_one = 0.0;        // d = d(1)
    std::uint64_t seed = 0;
};

inline DepthCurve depth_curve(const Grid& g, const NonlinearitySpec& spec,
                              const ConditionParams& params, const WellContext& ctx,
                              const std::vector<double>& delta_grid, int budget_per_delta,
                              std::uint64_t seed = 0) {
    DepthCurve c;
    c.seed = seed;
    for (double d : delta_grid) {
        if (!(d > 0.0) || d > params.gamma / 2.0 + 1e-12)
            throw std::invalid_argument("depth_curve: delta grid must lie in (0, gamma/2]");
        c.deltas.push_back(d);
        c.depths.push_back(depth(g, spec, params, d, budget_per_delta, seed).value);
        c.radius.push_back(ctx.radius(params, d));
        c.a_coeffs.push_back(ctx.a_coeff(params, d));
    }
    c.d_at_one = depth(g, spec, params, 1.0, budget_per_delta, seed).value;

    // b: sign change of d(delta), refined by bisection with fresh depth runs.
    const double sign_tol = 1e-9;
    std::size_t k = 0;
    for (; k + 1 < c.deltas.size(); ++k)
        if (c.depths[k] > sign_tol && c.depths[k + 1] <= sign_tol) break;
    if (k + 1 < c.deltas.size()) {
        double lo = c.deltas[k], hi = c.deltas[k + 1];
        for (int it = 0; it < 30 && (hi - lo) > 1e-7 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double dm = depth(g, spec, params, mid, budget_per_delta, seed).value;
            if (dm > sign_tol)
                lo = mid;
            else
                hi = mid;
        }
        c.b_root = 0.5 * (lo + hi);
        c.b_bracketed = true;
    } else {
        c.b_root = c.deltas.empty() ? 0.0 : c.deltas.back();
        c.b_bracketed = false;
    }
    return c;
}

enum class Membership { Zero, WdeltaInterior, Vdelta, Boundary, Exterior };

inline const char* membership_name(Membership m) {
    switch (m) {
        case Membership::Zero: return "zero";
        case Membership::WdeltaInterior: return "W_delta";
        case Membership::Vdelta: return "V_delta";
        case Membership::Boundary: return "boundary";
        case Membership::Exterior: return "exterior";
    }
    return "?";
}

inline Membership classify_membership(const FunctionalReadout& r, double depth_at_delta,
                                      double tol_i = 1e-9) {
    if (r.grad_norm_sq <= 0.0) return Membership::Zero;
    if (std::abs(r.i_delta) <= tol_i * (1.0 + r.grad_norm_sq)) return Membership::Boundary;
    if (r.j_value >= depth_at_delta) return Membership::Exterior;
    return r.i_delta > 0.0 ? Membership::WdeltaInterior : Membership::Vdelta;
}

// Roots delta_1 < 1 < delta_2 of d(delta) = e on the sampled curve, by
// bisection on the piecewise-linear interpolant of each monotone branch.
inline std::pair<double, double> delta_roots(const DepthCurve& curve, double e) {
    if (curve.deltas.size() < 3) throw std::invalid_argument("delta_roots: curve too coarse");
    if (!(e > 0.0) || !(e < curve.d_at_one))
        throw std::invalid_argument("delta_roots: need 0 < e < d(1)");

    auto interp = [&](double x) {
        const auto& xs = curve.deltas;
        const auto& ys = curve.depths;
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        std::size_t i = 1;
        while (xs[i] < x) ++i;
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + t * (ys[i] - ys[i - 1]);
    };

    std::size_t peak = 0;
    for (std::size_t i = 1; i < curve.depths.size(); ++i)
        if (curve.depths[i] > curve.depths[peak]) peak = i;

    auto bisect = [&](double lo, double hi, bool increasing) {
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            const bool above = interp(mid) > e;
            if (above == increasing)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };

    // Left branch: d increasing from ~0 toward the peak.
    double lo1 = curve.deltas.front(), hi1 = curve.deltas[peak];
    if (interp(lo1) > e) lo1 = 1e-12;
    const double d1 = bisect(lo1, hi1, true);
    // Right branch: d decreasing past the peak.
    double lo2 = curve.deltas[peak], hi2 = curve.deltas.back();
    if (interp(hi2) > e)
        throw std::invalid_argument("delta_roots: curve does not descend below e on the right");
    const double d2 = bisect(lo2, hi2, false);
    return {d1, d2};
}

} // namespace pwell
