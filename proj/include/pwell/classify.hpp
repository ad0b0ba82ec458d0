#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pwell/dynamics.hpp"
#include "pwell/grid.hpp"
#include "pwell/nonlinearity.hpp"
#include "pwell/random_fields.hpp"
#include "pwell/rng.hpp"
#include "pwell/wells.hpp"

namespace pwell {

struct ModeComponent {
    int kx = 1;
    int ky = 1;
    double amplitude = 0.0;
};

// Reproducible initial-data recipe: an eigenmode combination or seeded
// random-smooth field, with an overall scale.
struct InitialRecipe {
    enum class Kind { Modes, RandomSmooth } kind = Kind::Modes;
    std::vector<ModeComponent> modes;
    double scale = 1.0;

    Field build(const Grid& g, std::uint64_t master_seed, std::uint64_t counter) const {
        Field u(g);
        if (kind == Kind::Modes) {
            for (const auto& m : modes) {
                const Field em = eigenmode(g, m.kx, m.ky);
                for (int i = 0; i < g.node_count(); ++i) u[i] += m.amplitude * em[i];
            }
        } else {
            auto rng = make_stream(master_seed, SeedPurpose::InitialData, counter);
            u = random_smooth_field(g, rng);
        }
        for (double& x : u.v) x *= scale;
        return u;
    }

    std::string describe() const {
        std::ostringstream os;
        if (kind == Kind::Modes) {
            os << "modes";
            for (const auto& m : modes) os << " (" << m.kx << "," << m.ky << ")*" << m.amplitude;
        } else {
            os << "random-smooth";
        }
        os << " scale=" << scale;
        return os.str();
    }
};

struct ExperimentPlan {
    Grid grid;
    NonlinearitySpec spec;
    ConditionParams params;
    InitialRecipe u0, u1;
    double dt = 0.0;     // 0: pick cfl_dt_max/4
    double t_end = 10.0;
    std::uint64_t seed = 0;
    int depth_budget = 64;
    int curve_points = 24;
    SimulationMonitors monitors;

    State initial_state() const {
        State s;
        s.t = 0.0;
        s.u = u0.build(grid, seed, 0);
        s.v = u1.build(grid, seed, 1);
        return s;
    }

    double effective_dt() const { return dt > 0.0 ? dt : 0.25 * cfl_dt_max(grid); }

    std::string canonical_string() const {
        std::ostringstream os;
        os << "grid:" << grid.dim << "," << grid.Lx << "," << grid.Ly << "," << grid.nx << ","
           << grid.ny << ";f:" << static_cast<int>(spec.family) << "," << spec.p
           << ";cond:" << params.alpha << "," << params.beta << "," << params.sigma << ","
           << params.gamma << "," << params.u_max << ";u0:" << u0.describe()
           << ";u1:" << u1.describe() << ";dt:" << dt << ";t_end:" << t_end << ";seed:" << seed
           << ";budget:" << depth_budget;
        return os.str();
    }

    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        for (char c : canonical_string()) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        return h;
    }
};

enum class Regime {
    Global,
    Blowup,
    GlobalCritical,
    BlowupCritical,
    NegativeEnergyBlowup,
    Indeterminate,
};

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Global: return "global";
        case Regime::Blowup: return "blowup";
        case Regime::GlobalCritical: return "global-critical";
        case Regime::BlowupCritical: return "blowup-critical";
        case Regime::NegativeEnergyBlowup: return "negative-energy-blowup";
        case Regime::Indeterminate: return "indeterminate";
    }
    return "?";
}

struct Prediction {
    double E0 = 0.0;
    double I0 = 0.0;
    double d_estimate = 0.0;
    double grad0_sq = 0.0;
    double u0u1 = 0.0; // <u0, u1>
    Regime regime = Regime::Indeterminate;
    std::optional<std::pair<double, double>> delta_window;
};

inline double critical_tolerance(double d) { return 1e-6 * (1.0 + d); }

// Regime table from the dichotomy theorems. E0-vs-d comparisons use
// tol_d = 1e-6 (1 + d) since d is an upper-bound estimate.
inline Regime regime_of(double E0, double I0, double d, double grad0_sq, double u0u1) {
    const double tol = critical_tolerance(d);
    if (E0 <= 0.0 && grad0_sq > 0.0) return Regime::NegativeEnergyBlowup;
    if (std::abs(E0 - d) <= tol) {
        if (I0 >= 0.0) return Regime::GlobalCritical;
        if (u0u1 >= 0.0) return Regime::BlowupCritical;
        return Regime::Indeterminate;
    }
    if (E0 < d) {
        if (I0 >= 0.0 || grad0_sq <= 0.0) return Regime::Global;
        return Regime::Blowup;
    }
    return Regime::Indeterminate;
}

inline Prediction predict(const ExperimentPlan& plan, const WellContext& ctx,
                          const DepthCurve* curve = nullptr) {
    const State s0 = plan.initial_state();
    const auto r0 = evaluate(plan.grid, plan.spec, plan.params, s0.u);
    Prediction p;
    p.E0 = 0.5 * l2_norm_sq(plan.grid, s0.v) + r0.j_value;
    p.I0 = r0.i_value;
    p.grad0_sq = r0.grad_norm_sq;
    p.u0u1 = inner(plan.grid, s0.u, s0.v);
    p.d_estimate = curve ? curve->d_at_one
                         : depth(plan.grid, plan.spec, plan.params, 1.0, plan.depth_budget,
                                 plan.seed)
                               .value;
    p.regime = regime_of(p.E0, p.I0, p.d_estimate, p.grad0_sq, p.u0u1);

    if (p.E0 > 0.0 && p.E0 < p.d_estimate - critical_tolerance(p.d_estimate) && curve) {
        try {
            p.delta_window = delta_roots(*curve, p.E0);
        } catch (const std::exception&) {
            // curve too coarse near the ends; leave the window absent
        }
    } else if (p.E0 <= 0.0 && p.grad0_sq > 0.0) {
        // Negative-energy route: V_delta membership holds on (0, alpha/2 - beta/lambda1).
        p.delta_window = std::make_pair(0.0, plan.params.alpha / 2.0 -
                                                 plan.params.beta / ctx.lambda1);
    }
    return p;
}

struct InvarianceReport {
    bool applicable = false;
    bool invariant = true;
    bool vacuum_clear = true;
    std::optional<double> first_violation_t;
    std::optional<double> first_vacuum_t;
    std::vector<double> sampled_deltas;
};

// Checks that each trajectory sample keeps its initial membership tag for
// every sampled delta in the window, and that no sample sits in the vacuum
// band |I_delta| <= tol (1 + ||grad u||^2) with nonzero gradient.
inline InvarianceReport verify_invariance(const Prediction& pred,
                                          const TrajectoryDiagnostics& diag,
                                          const std::vector<std::pair<double, double>>& depths,
                                          double tol_i = 1e-9) {
    InvarianceReport rep;
    if (!pred.delta_window || diag.times.empty()) return rep;
    rep.applicable = true;

    for (const auto& [delta, d_delta] : depths) {
        rep.sampled_deltas.push_back(delta);
        std::optional<Membership> initial;
        for (std::size_t k = 0; k < diag.times.size(); ++k) {
            // I_delta reconstructed from stored columns: int u f(u) = grad - I.
            const double fint = diag.grad_norm_sq[k] - diag.I_values[k];
            FunctionalReadout r;
            r.grad_norm_sq = diag.grad_norm_sq[k];
            r.i_delta = delta * diag.grad_norm_sq[k] - fint;
            r.j_value = diag.J_values[k];
            const Membership tag = classify_membership(r, d_delta, tol_i);
            if (tag == Membership::Boundary && rep.vacuum_clear) {
                rep.vacuum_clear = false;
                rep.first_vacuum_t = diag.times[k];
            }
            if (!initial) {
                initial = tag;
            } else if (tag != *initial && rep.invariant) {
                rep.invariant = false;
                rep.first_violation_t = diag.times[k];
            }
        }
    }
    return rep;
}

struct ZeroEnergyReport {
    bool applicable = false;
    bool holds = true;
    double bound = 0.0;
    std::optional<double> first_violation_t;
};

// Lemma: nontrivial solutions with E(0) = 0 keep ||grad u|| above
// (1/(2 A C*^gamma))^{1/(gamma-2)}; checked with factor 0.99 since C* is
// itself estimated.
inline ZeroEnergyReport verify_zero_energy_bound(const TrajectoryDiagnostics& diag,
                                                 const WellContext& ctx,
                                                 const ConditionParams& params, double E0,
                                                 double grad0_sq, double tol_d = 1e-6) {
    ZeroEnergyReport rep;
    if (std::abs(E0) > tol_d || grad0_sq <= 0.0) return rep;
    rep.applicable = true;
    rep.bound = std::pow(1.0 / (2.0 * ctx.growth_A * std::pow(ctx.c_star, params.gamma)),
                         1.0 / (params.gamma - 2.0));
    for (std::size_t k = 0; k < diag.times.size(); ++k) {
        if (std::sqrt(diag.grad_norm_sq[k]) < 0.99 * rep.bound) {
            rep.holds = false;
            rep.first_violation_t = diag.times[k];
            break;
        }
    }
    return rep;
}

enum class Verdict { Confirmed, Violated, Inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Confirmed: return "confirmed";
        case Verdict::Violated: return "violated";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct RunRecord {
    std::uint64_t plan_hash = 0;
    std::string plan_text;
    Prediction prediction;
    BlowupVerdict blowup;
    InvarianceReport invariance;
    ZeroEnergyReport zero_energy;
    Verdict verdict = Verdict::Inconclusive;
    std::string verdict_note;
    double max_energy_drift = 0.0;
    double sup_grad_sq = 0.0;
    bool sign_flip = false; // sign of I(u(t)) flipped before t_end / detection
    double t_final = 0.0;
    std::uint64_t seed = 0;
    TrajectoryDiagnostics diagnostics;
};

inline RunRecord run_experiment(const ExperimentPlan& plan) {
    RunRecord rec;
    rec.plan_hash = plan.hash();
    rec.plan_text = plan.canonical_string();
    rec.seed = plan.seed;

    WellContext ctx = WellContext::build(plan.grid, plan.spec, plan.params, 2.0, 8, plan.seed);

    // Depth curve over (0, gamma/2] for the delta window and invariance checks.
    std::vector<double> deltas;
    for (int i = 1; i <= plan.curve_points; ++i)
        deltas.push_back(plan.params.gamma / 2.0 * double(i) / double(plan.curve_points));
    const DepthCurve curve = depth_curve(plan.grid, plan.spec, plan.params, ctx, deltas,
                                         plan.depth_budget, plan.seed);

    rec.prediction = predict(plan, ctx, &curve);

    const State s0 = plan.initial_state();
    const double dt = plan.effective_dt();
    SimulationMonitors mon = plan.monitors;
    mon.tag_depth = rec.prediction.d_estimate;
    const SimulationResult sim =
        simulate_with_refinement(plan.grid, plan.spec, plan.params, s0, dt, plan.t_end, mon);
    rec.blowup = sim.verdict;
    rec.diagnostics = sim.diagnostics;
    rec.t_final = sim.final_state.t;

    const auto& diag = rec.diagnostics;
    for (std::size_t k = 0; k < diag.times.size(); ++k) {
        rec.max_energy_drift =
            std::max(rec.max_energy_drift, std::abs(diag.energy[k] - diag.energy.front()) /
                                               (1.0 + std::abs(diag.energy.front())));
        rec.sup_grad_sq = std::max(rec.sup_grad_sq, diag.grad_norm_sq[k]);
        if (k > 0 && diag.I_values[k] * diag.I_values.front() < 0.0) rec.sign_flip = true;
    }

    if (rec.prediction.delta_window) {
        const auto [w1, w2] = *rec.prediction.delta_window;
        std::vector<std::pair<double, double>> sampled;
        for (int i = 1; i <= 5; ++i) {
            const double delta = w1 + (w2 - w1) * double(i) / 6.0;
            sampled.emplace_back(delta,
                                 depth(plan.grid, plan.spec, plan.params, delta,
                                       plan.depth_budget, plan.seed)
                                     .value);
        }
        rec.invariance = verify_invariance(rec.prediction, diag, sampled);
    }
    rec.zero_energy = verify_zero_energy_bound(diag, ctx, plan.params, rec.prediction.E0,
                                               rec.prediction.grad0_sq);

    // Verdict per the dichotomy theorems.
    const Regime reg = rec.prediction.regime;
    const bool predicts_blowup = reg == Regime::Blowup || reg == Regime::BlowupCritical ||
                                 reg == Regime::NegativeEnergyBlowup;
    if (rec.blowup.inconclusive || !rec.blowup.numerically_valid) {
        rec.verdict = Verdict::Inconclusive;
        rec.verdict_note = rec.blowup.note;
    } else if (predicts_blowup) {
        if (!rec.blowup.detected) {
            rec.verdict = Verdict::Violated;
            rec.verdict_note = "blow-up predicted but not detected by t_end";
        } else if (rec.prediction.u0u1 > 0.0 && rec.blowup.bound_T_theorem &&
                   *rec.blowup.t_detect > *rec.blowup.bound_T_theorem) {
            rec.verdict = Verdict::Violated;
            rec.verdict_note = "detection later than the theorem time bound";
        } else if (!rec.blowup.refinement_stable) {
            rec.verdict = Verdict::Inconclusive;
            rec.verdict_note = "detection time unstable under dt refinement";
        } else {
            rec.verdict = Verdict::Confirmed;
        }
    } else if (reg == Regime::Global || reg == Regime::GlobalCritical) {
        const double a1 = ctx.a_coeff(plan.params, 1.0);
        const bool grad_bounded =
            a1 <= 0.0 || rec.sup_grad_sq < rec.prediction.d_estimate / a1 * (1.0 + 1e-3);
        if (rec.blowup.detected) {
            rec.verdict = Verdict::Violated;
            rec.verdict_note = "global regime predicted but blow-up detected";
        } else if (!grad_bounded) {
            rec.verdict = Verdict::Violated;
            rec.verdict_note = "||grad u||^2 exceeded d/a(1)";
        } else if (rec.invariance.applicable && !rec.invariance.invariant) {
            rec.verdict = Verdict::Violated;
            rec.verdict_note = "membership tag flipped inside the delta window";
        } else {
            rec.verdict = Verdict::Confirmed;
        }
    } else {
        rec.verdict = Verdict::Inconclusive;
        rec.verdict_note = "regime indeterminate";
    }
    return rec;
}

} // namespace pwell
