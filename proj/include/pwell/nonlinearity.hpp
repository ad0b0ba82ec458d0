#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwell {

enum class NonlinearityFamily { OddPower, EvenPower, Zero, Custom };
enum class HCase { A, B }; // (a) odd, monotone, convex/concave; (b) convex on R

// Source term f with antiderivative F and derivative f'. Custom specs must
// supply all three; nothing is integrated or differentiated symbolically.
struct NonlinearitySpec {
    NonlinearityFamily family = NonlinearityFamily::OddPower;
    double p = 3.0;
    HCase h_case = HCase::A;
    std::function<double(double)> f_fn, F_fn, fp_fn;

    double f(double u) const {
        switch (family) {
            case NonlinearityFamily::OddPower:
                return std::pow(std::abs(u), p - 1.0) * u;
            case NonlinearityFamily::EvenPower:
                return std::pow(u, p);
            case NonlinearityFamily::Zero:
                return 0.0;
            case NonlinearityFamily::Custom:
                return f_fn(u);
        }
        return 0.0;
    }

    // For the power families F(u) = |u|^{p+1}/(p+1) = u f(u)/(p+1); computing
    // it through f keeps alpha*F == u*f bitwise when alpha = p+1 is a power
    // of two.
    double F(double u) const {
        switch (family) {
            case NonlinearityFamily::OddPower:
            case NonlinearityFamily::EvenPower:
                return u * f(u) / (p + 1.0);
            case NonlinearityFamily::Zero:
                return 0.0;
            case NonlinearityFamily::Custom:
                return F_fn(u);
        }
        return 0.0;
    }

    double fprime(double u) const {
        switch (family) {
            case NonlinearityFamily::OddPower:
                return p * std::pow(std::abs(u), p - 1.0);
            case NonlinearityFamily::EvenPower:
                return p * std::pow(u, p - 1.0);
            case NonlinearityFamily::Zero:
                return 0.0;
            case NonlinearityFamily::Custom:
                return fp_fn(u);
        }
        return 0.0;
    }

    static NonlinearitySpec odd_power(double p) {
        if (p <= 1.0) throw std::invalid_argument("odd_power: p must be > 1");
        NonlinearitySpec s;
        s.family = NonlinearityFamily::OddPower;
        s.p = p;
        s.h_case = HCase::A;
        return s;
    }

    static NonlinearitySpec even_power(int p) {
        if (p < 2) throw std::invalid_argument("even_power: p must be an integer >= 2");
        NonlinearitySpec s;
        s.family = NonlinearityFamily::EvenPower;
        s.p = p;
        s.h_case = HCase::B;
        return s;
    }

    static NonlinearitySpec zero() {
        NonlinearitySpec s;
        s.family = NonlinearityFamily::Zero;
        s.p = 1.0;
        s.h_case = HCase::A;
        return s;
    }

    static NonlinearitySpec custom(std::function<double(double)> f, std::function<double(double)> F,
                                   std::function<double(double)> fp, HCase hc) {
        if (!f || !F || !fp)
            throw std::invalid_argument("custom nonlinearity must supply f, F, and f'");
        NonlinearitySpec s;
        s.family = NonlinearityFamily::Custom;
        s.h_case = hc;
        s.f_fn = std::move(f);
        s.F_fn = std::move(F);
        s.fp_fn = std::move(fp);
        return s;
    }
};

// Parameters of condition (H): alpha*F(u) <= u f(u) + beta*u^2 + alpha*sigma
// and |u f(u)| <= gamma*|F(u) - sigma|, with beta < lambda1*(alpha-2)/2.
struct ConditionParams {
    double alpha = 4.0;
    double beta = 0.0;
    double sigma = 1.0;
    double gamma = 4.0;
    double u_max = 4.0;     // scan range
    int sample_count = 10000;

    double lambda_equiv() const { return alpha / (1.0 + beta); }

    void validate() const {
        if (!(alpha > 2.0)) throw std::invalid_argument("condition: alpha must be > 2");
        if (!(alpha <= gamma)) throw std::invalid_argument("condition: need alpha <= gamma");
        if (beta < 0.0) throw std::invalid_argument("condition: beta must be >= 0");
        if (sigma < 0.0) throw std::invalid_argument("condition: sigma must be >= 0");
        if (u_max <= 0.0) throw std::invalid_argument("condition: u_max must be > 0");
        if (sample_count < 2) throw std::invalid_argument("condition: sample_count too small");
    }

    // beta restriction involves the domain through lambda1.
    void validate_against(double lambda1) const {
        validate();
        if (!(beta < lambda1 * (alpha - 2.0) / 2.0))
            throw std::invalid_argument("condition: need beta < lambda1*(alpha-2)/2");
    }
};

inline std::vector<double> scan_points(const ConditionParams& params, bool positive_only) {
    const int n = std::max(params.sample_count, 10000);
    std::vector<double> pts;
    pts.reserve(positive_only ? n : 2 * n);
    for (int i = 1; i <= n; ++i) {
        const double u = params.u_max * double(i) / double(n);
        pts.push_back(u);
        if (!positive_only) pts.push_back(-u);
    }
    return pts;
}

struct ConditionViolation {
    double u = 0.0;
    double slack = 0.0;
};

struct ConditionReport {
    bool holds_growth = false;       // alpha*F <= u f + beta u^2 + alpha*sigma
    bool holds_gamma_bound = false;  // |u f| <= gamma |F - sigma|
    double worst_slack_growth = 0.0;     // max of alpha*F - uf - beta u^2 - alpha*sigma
    double worst_slack_growth_arg = 0.0;
    double worst_slack_homogeneous = 0.0; // max of alpha*F - uf - beta u^2 (sigma excluded)
    double worst_slack_gamma = 0.0;      // max of |uf| - gamma |F - sigma|
    double worst_slack_gamma_arg = 0.0;
    double min_feasible_gamma = 0.0;     // minimal gamma in [alpha, 20] passing the scan
    bool gamma_feasible_in_range = false;
    double min_feasible_sigma = 0.0;     // minimal sigma making the growth condition hold
    double scanned_u_max = 0.0;
    int scanned_count = 0;
    bool sigma_zero_warning = false;
    std::vector<ConditionViolation> violations_growth;
    std::vector<ConditionViolation> violations_gamma;

    bool all_hold() const { return holds_growth && holds_gamma_bound; }
};

// Scan-based verification of condition (H). The paper states the conditions
// for all real u; the report carries the scanned range as a caveat.
inline ConditionReport check_condition_H(const NonlinearitySpec& spec,
                                         const ConditionParams& params) {
    params.validate();
    ConditionReport rep;
    rep.scanned_u_max = params.u_max;
    rep.sigma_zero_warning = (params.sigma == 0.0);

    const bool growth_positive_only = (spec.h_case == HCase::B);
    const auto pts_growth = scan_points(params, growth_positive_only);
    const auto pts_full = scan_points(params, false);
    rep.scanned_count = static_cast<int>(pts_full.size());

    rep.worst_slack_growth = -std::numeric_limits<double>::infinity();
    rep.worst_slack_homogeneous = -std::numeric_limits<double>::infinity();
    for (double u : pts_growth) {
        const double uf = u * spec.f(u);
        const double homog = params.alpha * spec.F(u) - uf - params.beta * u * u;
        const double slack = homog - params.alpha * params.sigma;
        if (homog > rep.worst_slack_homogeneous) rep.worst_slack_homogeneous = homog;
        if (slack > rep.worst_slack_growth) {
            rep.worst_slack_growth = slack;
            rep.worst_slack_growth_arg = u;
        }
        if (slack > 0.0 && rep.violations_growth.size() < 16)
            rep.violations_growth.push_back({u, slack});
    }
    rep.holds_growth = rep.worst_slack_growth <= 0.0;
    rep.min_feasible_sigma = std::max(0.0, rep.worst_slack_homogeneous / params.alpha);

    auto gamma_slack = [&](double gamma) {
        double worst = -std::numeric_limits<double>::infinity();
        double arg = 0.0;
        for (double u : pts_full) {
            const double s = std::abs(u * spec.f(u)) - gamma * std::abs(spec.F(u) - params.sigma);
            if (s > worst) {
                worst = s;
                arg = u;
            }
        }
        return std::pair<double, double>(worst, arg);
    };

    auto [ws, wa] = gamma_slack(params.gamma);
    rep.worst_slack_gamma = ws;
    rep.worst_slack_gamma_arg = wa;
    rep.holds_gamma_bound = ws <= 0.0;
    if (!rep.holds_gamma_bound) rep.violations_gamma.push_back({wa, ws});

    // The paper gives no recipe for choosing gamma; bisect over [alpha, 20]
    // with the scan as feasibility oracle.
    {
        double lo = params.alpha, hi = 20.0;
        if (gamma_slack(hi).first > 0.0) {
            rep.gamma_feasible_in_range = false;
            rep.min_feasible_gamma = hi;
        } else if (gamma_slack(lo).first <= 0.0) {
            rep.gamma_feasible_in_range = true;
            rep.min_feasible_gamma = lo;
        } else {
            rep.gamma_feasible_in_range = true;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (gamma_slack(mid).first <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            rep.min_feasible_gamma = hi;
        }
    }
    return rep;
}

// a = sup u f(u) / |u|^gamma over the scan grid, refined by golden section
// around the best sample. Divergent ratios (at 0 or at u_max) are input
// errors: gamma is incompatible with the growth of f.
inline double estimate_sup_a(const NonlinearitySpec& spec, const ConditionParams& params) {
    const bool positive_only = (spec.h_case == HCase::B);
    const int n = std::max(params.sample_count, 10000);
    // Log-spaced magnitudes so behavior near 0 is visible.
    std::vector<double> mags(n);
    const double lo = params.u_max * 1e-8;
    for (int i = 0; i < n; ++i)
        mags[i] = lo * std::pow(params.u_max / lo, double(i) / double(n - 1));

    auto ratio = [&](double u) { return u * spec.f(u) / std::pow(std::abs(u), params.gamma); };

    double best = -std::numeric_limits<double>::infinity();
    int best_i = -1;
    int best_sign = 1;
    for (int i = 0; i < n; ++i) {
        for (int sgn : {1, -1}) {
            if (positive_only && sgn < 0) continue;
            const double r = ratio(sgn * mags[i]);
            if (std::isfinite(r) && r > best) {
                best = r;
                best_i = i;
                best_sign = sgn;
            }
        }
    }
    if (best_i < 0 || !std::isfinite(best))
        throw std::invalid_argument("estimate_sup_a: ratio not finite on scan range");

    const double rel = 1e-9 * (1.0 + std::abs(best));
    if (best_i == 0 && ratio(best_sign * mags[0]) > ratio(best_sign * mags[1]) + rel)
        throw std::invalid_argument(
            "estimate_sup_a: u f(u)/|u|^gamma diverges as u -> 0; gamma is too large for f");
    if (best_i == n - 1 && ratio(best_sign * mags[n - 1]) > ratio(best_sign * mags[n - 2]) + rel)
        throw std::invalid_argument(
            "estimate_sup_a: u f(u)/|u|^gamma still increasing at u_max; gamma is too small for f");

    // Golden-section refinement in the bracket around the best sample.
    double a = best_sign * mags[std::max(0, best_i - 1)];
    double b = best_sign * mags[std::min(n - 1, best_i + 1)];
    if (a > b) std::swap(a, b);
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = ratio(x1), f2 = ratio(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + std::abs(b)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = ratio(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = ratio(x1);
        }
    }
    return std::max(best, std::max(f1, f2));
}

struct GrowthConstants {
    double A = 0.0; // |F(u~) - sigma| / |u~|^gamma
    double B = 0.0; // F(u~) / u~^lambda, lambda = alpha/(1+beta)
    double probe_u = 0.0;
    std::vector<ConditionViolation> violations_A; // |F(u)-sigma| > A|u|^gamma
    std::vector<ConditionViolation> violations_B; // F(u)-sigma < B|u|^lambda for |u|>=1
    bool bound_A_holds() const { return violations_A.empty(); }
    bool bound_B_holds() const { return violations_B.empty(); }
};

inline GrowthConstants growth_constants(const NonlinearitySpec& spec,
                                        const ConditionParams& params, double probe_u) {
    if (probe_u == 0.0) throw std::invalid_argument("growth_constants: probe_u must be nonzero");
    GrowthConstants out;
    out.probe_u = probe_u;
    const double Fu = spec.F(probe_u);
    out.A = std::abs(Fu - params.sigma) / std::pow(std::abs(probe_u), params.gamma);
    const double lambda = params.lambda_equiv();
    if (Fu <= 0.0)
        throw std::invalid_argument("growth_constants: need F(probe_u) > 0 for constant B");
    out.B = Fu / std::pow(probe_u, lambda);

    for (double u : scan_points(params, false)) {
        const double sA = std::abs(spec.F(u) - params.sigma) - out.A * std::pow(std::abs(u), params.gamma);
        if (sA > 1e-12 * (1.0 + std::abs(spec.F(u))) && out.violations_A.size() < 16)
            out.violations_A.push_back({u, sA});
        if (std::abs(u) >= 1.0) {
            const double sB = out.B * std::pow(std::abs(u), lambda) - (spec.F(u) - params.sigma);
            if (sB > 1e-12 * (1.0 + std::abs(spec.F(u))) && out.violations_B.size() < 16)
                out.violations_B.push_back({u, sB});
        }
    }
    return out;
}

struct EquivalenceReport {
    bool hypothesis_met = false; // inf u f(u)/u^2 > lambda1 over the positive scan
    double lambda_bar = 0.0;
    bool found = false;
    double m = 0.0;
    double mu = 0.0;
    std::string note;
};

// Diagnostic search for (m, mu) with u f(u) >= mu u^{2+eps} for u >= m,
// eps = alpha - 2 (Lemma on the equivalence of the relaxed conditions).
inline EquivalenceReport check_lemma_equivalence(const NonlinearitySpec& spec,
                                                 const ConditionParams& params, double lambda1) {
    EquivalenceReport rep;
    const auto pts = scan_points(params, true);
    double inf_ratio = std::numeric_limits<double>::infinity();
    for (double u : pts) inf_ratio = std::min(inf_ratio, u * spec.f(u) / (u * u));
    rep.lambda_bar = inf_ratio;
    if (!(inf_ratio > lambda1)) {
        rep.note = "hypothesis not met: inf u f(u)/u^2 <= lambda1 on the scan";
        return rep;
    }
    rep.hypothesis_met = true;

    const double eps = params.alpha - 2.0;
    auto power_ratio = [&](double u) { return u * spec.f(u) / std::pow(u, 2.0 + eps); };

    // mu(m) = min over [m, u_max]; reject when the ratio keeps decaying at the
    // end of the range (it then tends to 0 beyond the scan, as for uf = c u^2).
    const double r_end = power_ratio(params.u_max);
    const double r_half = power_ratio(0.5 * params.u_max);
    if (r_end < 0.5 * r_half) {
        rep.note = "no positive mu: u f(u)/u^{2+eps} decays toward 0 at the end of the scan";
        return rep;
    }
    for (double m : {1.0, 1.5, 2.0, 4.0}) {
        if (m >= params.u_max) break;
        double mu = std::numeric_limits<double>::infinity();
        for (double u : pts)
            if (u >= m) mu = std::min(mu, power_ratio(u));
        if (std::isfinite(mu) && mu > 0.0) {
            rep.found = true;
            rep.m = m;
            rep.mu = mu;
            return rep;
        }
    }
    rep.note = "no (m, mu) found on the scan range";
    return rep;
}

// Numerical sanity checks on a spec: f(0) = f'(0) = 0 and agreement of the
// supplied F with the quadrature integral of f (adaptive Simpson).
namespace detail {
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) return left + right;
    return adaptive_simpson(f, a, m, fa, flm, fm, eps / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, eps / 2.0, depth - 1);
}
} // namespace detail

inline bool verify_antiderivative(const NonlinearitySpec& spec, double u_max,
                                  double rel_tol = 1e-8) {
    auto f = [&](double s) { return spec.f(s); };
    for (double u : {u_max, -u_max, 0.5 * u_max, -0.25 * u_max}) {
        const double integral =
            detail::adaptive_simpson(f, 0.0, u, f(0.0), f(0.5 * u), f(u), 1e-12, 40);
        const double Fu = spec.F(u);
        if (std::abs(Fu - integral) > rel_tol * (1.0 + std::abs(Fu))) return false;
    }
    if (spec.f(0.0) != 0.0) return false;
    const double h = 1e-7;
    const double fp0 = (spec.f(h) - spec.f(-h)) / (2.0 * h);
    return std::abs(fp0) <= 1e-5;
}

} // namespace pwell
