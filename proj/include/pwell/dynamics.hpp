#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwell/grid.hpp"
#include "pwell/nonlinearity.hpp"
#include "pwell/wells.hpp"

namespace pwell {

struct State {
    double t = 0.0;
    Field u;
    Field v; // velocity u_t
};

inline double cfl_dt_max(const Grid& g, double cfl = 0.9) {
    double stencil = 4.0 / (g.hx * g.hx);
    if (g.dim == 2) stencil += 4.0 / (g.hy * g.hy);
    return cfl * 2.0 / std::sqrt(stencil);
}

inline double energy(const Grid& g, const NonlinearitySpec& spec, const ConditionParams& params,
                     const State& s) {
    const auto r = evaluate(g, spec, params, s.u);
    return 0.5 * l2_norm_sq(g, s.v) + r.j_value;
}

struct StepFailure : std::runtime_error {
    double t;
    explicit StepFailure(double t_) : std::runtime_error("non-finite state at t = " + std::to_string(t_)), t(t_) {}
};

// One Stormer-Verlet (leapfrog) step of u_tt = Lap u + f(u):
//   v += dt/2 (Lap u + f(u));  u += dt v;  v += dt/2 (Lap u + f(u)).
inline State step(const Grid& g, const NonlinearitySpec& spec, const State& s, double dt) {
    if (dt == 0.0) throw std::invalid_argument("step: dt must be nonzero");
    check_match(g, s.u, "step");
    check_match(g, s.v, "step");
    const int n = g.node_count();
    State out;
    out.t = s.t + dt;
    out.u = s.u;
    out.v = s.v;
    Field acc = apply_laplacian(g, out.u);
    for (int i = 0; i < n; ++i) out.v[i] += 0.5 * dt * (acc[i] + spec.f(out.u[i]));
    for (int i = 0; i < n; ++i) out.u[i] += dt * out.v[i];
    acc = apply_laplacian(g, out.u);
    for (int i = 0; i < n; ++i) out.v[i] += 0.5 * dt * (acc[i] + spec.f(out.u[i]));
    if (!out.u.all_finite() || !out.v.all_finite()) throw StepFailure(out.t);
    return out;
}

enum class BlowupTrigger { None, MomentThreshold, AmplitudeOverflow, StepCollapse };

inline const char* trigger_name(BlowupTrigger t) {
    switch (t) {
        case BlowupTrigger::None: return "none";
        case BlowupTrigger::MomentThreshold: return "moment-threshold";
        case BlowupTrigger::AmplitudeOverflow: return "amplitude-overflow";
        case BlowupTrigger::StepCollapse: return "step-collapse";
    }
    return "?";
}

struct BlowupVerdict {
    bool detected = false;
    std::optional<double> t_detect;
    BlowupTrigger trigger = BlowupTrigger::None;
    std::optional<double> bound_T_theorem;
    std::optional<double> bound_T_proof;
    bool numerically_valid = true;     // energy drift stayed within bounds
    bool refinement_stable = true;     // dt/2 rerun moved t_detect by < 20%
    bool inconclusive = false;
    std::string note;
};

struct TrajectoryDiagnostics {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> M;        // int u^2
    std::vector<double> M_prime;  // 2 int u u_t
    std::vector<double> I_values;
    std::vector<double> J_values;
    std::vector<double> grad_norm_sq;
    std::vector<Membership> tags;
};

struct SimulationMonitors {
    double blowup_factor = 1e6;
    double amplitude_limit = 1e154;
    double drift_fail = 1e-2;
    double cfl = 0.9;
    int dt_halvings_max = 10;      // step-collapse when dt falls below dt/2^10
    double sample_dt = 0.01;       // diagnostics stride ~ sample_dt/dt steps
    double tag_delta = 1.0;        // membership column uses this delta
    std::optional<double> tag_depth; // d(tag_delta); column tagged Exterior-free if absent
};

// Theorem bound T = M(0)/((alpha+2) int u0 u1); the proof line gives
// M(0)/((alpha+2) M'(0)), half of it. Absent when int u0 u1 <= 0.
inline std::pair<std::optional<double>, std::optional<double>>
blowup_bounds(const Grid& g, const State& s0, double alpha) {
    const double M0 = l2_norm_sq(g, s0.u);
    const double uv = inner(g, s0.u, s0.v);
    if (!(uv > 0.0)) return {std::nullopt, std::nullopt};
    const double theorem = M0 / ((alpha + 2.0) * uv);
    return {theorem, 0.5 * theorem};
}

struct SimulationResult {
    TrajectoryDiagnostics diagnostics;
    BlowupVerdict verdict;
    State final_state;
};

inline SimulationResult simulate(const Grid& g, const NonlinearitySpec& spec,
                                 const ConditionParams& params, const State& state0, double dt,
                                 double t_end, const SimulationMonitors& mon = {}) {
    if (dt <= 0.0) throw std::invalid_argument("simulate: dt must be > 0");
    if (dt > cfl_dt_max(g, mon.cfl))
        throw std::invalid_argument("simulate: dt violates the CFL bound");

    SimulationResult out;
    auto [bt, bp] = blowup_bounds(g, state0, params.alpha);
    out.verdict.bound_T_theorem = bt;
    out.verdict.bound_T_proof = bp;

    const double M0 = l2_norm_sq(g, state0.u);
    const double moment_limit = mon.blowup_factor * std::max(M0, 1.0);
    const double E0 = energy(g, spec, params, state0);
    const double dt_min = dt / std::pow(2.0, mon.dt_halvings_max);
    const int stride = std::max(1, static_cast<int>(std::floor(mon.sample_dt / dt)));

    auto record = [&](const State& s) {
        const auto r = evaluate(g, spec, params, s.u, mon.tag_delta);
        auto& d = out.diagnostics;
        d.times.push_back(s.t);
        d.energy.push_back(0.5 * l2_norm_sq(g, s.v) + r.j_value);
        d.M.push_back(r.l2_norm_sq);
        d.M_prime.push_back(2.0 * inner(g, s.u, s.v));
        d.I_values.push_back(r.i_value);
        d.J_values.push_back(r.j_value);
        d.grad_norm_sq.push_back(r.grad_norm_sq);
        d.tags.push_back(mon.tag_depth
                             ? classify_membership(r, *mon.tag_depth)
                             : (r.grad_norm_sq <= 0.0 ? Membership::Zero
                                                      : (r.i_value > 0.0 ? Membership::WdeltaInterior
                                                                         : Membership::Vdelta)));
    };

    State s = state0;
    record(s);
    double max_drift = 0.0;
    long step_count = 0;
    bool threshold_crossed = false;

    while (s.t < t_end - 0.5 * dt) {
        State next;
        double dt_eff = dt;
        bool ok = false;
        // Retry with halved dt on non-finite results; collapse below dt_min is
        // itself a blow-up trigger.
        while (dt_eff >= dt_min) {
            try {
                next = step(g, spec, s, dt_eff);
                ok = true;
                break;
            } catch (const StepFailure&) {
                dt_eff *= 0.5;
            }
        }
        if (!ok) {
            // A collapsed step counts as blow-up only if the moment already
            // crossed the threshold; otherwise it is a numerical failure.
            out.verdict.trigger = BlowupTrigger::StepCollapse;
            if (l2_norm_sq(g, s.u) >= moment_limit || threshold_crossed) {
                out.verdict.detected = true;
                out.verdict.t_detect = s.t;
            } else {
                out.verdict.inconclusive = true;
                out.verdict.numerically_valid = false;
                out.verdict.note = "step collapse before moment threshold";
            }
            break;
        }
        s = std::move(next);
        ++step_count;

        // Trigger checks every step; diagnostics at the sampling stride.
        const double M = l2_norm_sq(g, s.u);
        const double amp = s.u.max_abs();
        if (M >= moment_limit) {
            threshold_crossed = true;
            record(s);
            out.verdict.detected = true;
            out.verdict.trigger = BlowupTrigger::MomentThreshold;
            out.verdict.t_detect = s.t;
            break;
        }
        if (amp > mon.amplitude_limit) {
            record(s);
            out.verdict.detected = true;
            out.verdict.trigger = BlowupTrigger::AmplitudeOverflow;
            out.verdict.t_detect = s.t;
            break;
        }
        if (step_count % stride == 0) {
            record(s);
            const double drift =
                std::abs(out.diagnostics.energy.back() - E0) / (1.0 + std::abs(E0));
            max_drift = std::max(max_drift, drift);
        }
    }
    (void)threshold_crossed;

    if (!out.verdict.detected && max_drift > mon.drift_fail) {
        out.verdict.numerically_valid = false;
        out.verdict.inconclusive = true;
        out.verdict.note = "energy drift exceeded drift_fail with no blow-up trigger";
    }
    out.final_state = std::move(s);
    return out;
}

// Refinement protocol: on a trigger, repeat once at dt/2 and require the
// detection time to move by < 20%, otherwise mark numerically inconclusive.
inline SimulationResult simulate_with_refinement(const Grid& g, const NonlinearitySpec& spec,
                                                 const ConditionParams& params,
                                                 const State& state0, double dt, double t_end,
                                                 const SimulationMonitors& mon = {}) {
    SimulationResult res = simulate(g, spec, params, state0, dt, t_end, mon);
    if (res.verdict.detected && res.verdict.t_detect) {
        SimulationResult fine = simulate(g, spec, params, state0, 0.5 * dt, t_end, mon);
        if (!fine.verdict.detected || !fine.verdict.t_detect) {
            res.verdict.refinement_stable = false;
            res.verdict.inconclusive = true;
            res.verdict.note = "dt/2 rerun did not detect blow-up";
        } else {
            const double t0 = *res.verdict.t_detect, t1 = *fine.verdict.t_detect;
            const double move = std::abs(t1 - t0) / std::max(t0, 1e-300);
            res.verdict.refinement_stable = move < 0.20;
            if (!res.verdict.refinement_stable) {
                res.verdict.inconclusive = true;
                res.verdict.note = "detection time moved by >= 20% under dt refinement";
            }
        }
    }
    return res;
}

struct DetectionThresholds {
    double blowup_factor = 1e6;
    double amplitude_limit = 1e154;
};

// Post-hoc detector over recorded diagnostics. A non-finite sample before any
// threshold crossing makes the series numerically inconclusive, not blow-up.
inline BlowupVerdict detect_blowup(const TrajectoryDiagnostics& d,
                                   const DetectionThresholds& th = {}) {
    BlowupVerdict v;
    if (d.M.empty()) return v;
    const double limit = th.blowup_factor * std::max(d.M.front(), 1.0);
    for (std::size_t k = 0; k < d.M.size(); ++k) {
        if (!std::isfinite(d.M[k])) {
            v.inconclusive = true;
            v.numerically_valid = false;
            v.note = "non-finite sample before threshold crossing";
            return v;
        }
        if (d.M[k] >= limit) {
            v.detected = true;
            v.trigger = BlowupTrigger::MomentThreshold;
            v.t_detect = d.times[k];
            return v;
        }
    }
    return v;
}

} // namespace pwell
