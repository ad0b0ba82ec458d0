#pragma once

#include <charconv>
#include <string>

#include <json.hpp>

#include "pwell/classify.hpp"
#include "pwell/dynamics.hpp"
#include "pwell/nonlinearity.hpp"
#include "pwell/wells.hpp"

namespace pwell {

// Shortest round-trip decimal representation.
inline std::string fmt(double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

inline std::string fmt(std::uint64_t x) { return std::to_string(x); }

// CSV bodies are timestamp-free; callers may prepend a "# generated" line.
inline std::string depth_curve_csv(const DepthCurve& c) {
    std::string out = "delta,d_estimate,r_delta,a_delta\n";
    for (std::size_t i = 0; i < c.deltas.size(); ++i)
        out += fmt(c.deltas[i]) + "," + fmt(c.depths[i]) + "," + fmt(c.radius[i]) + "," +
               fmt(c.a_coeffs[i]) + "\n";
    return out;
}

inline nlohmann::json depth_curve_sidecar(const DepthCurve& c) {
    return {{"seed", c.seed},
            {"b_root", c.b_root},
            {"b_bracketed", c.b_bracketed},
            {"d_at_one", c.d_at_one}};
}

inline std::string diagnostics_csv(const TrajectoryDiagnostics& d) {
    std::string out = "t,E,M,M_prime,I,J,grad_norm_sq,tag\n";
    for (std::size_t k = 0; k < d.times.size(); ++k)
        out += fmt(d.times[k]) + "," + fmt(d.energy[k]) + "," + fmt(d.M[k]) + "," +
               fmt(d.M_prime[k]) + "," + fmt(d.I_values[k]) + "," + fmt(d.J_values[k]) + "," +
               fmt(d.grad_norm_sq[k]) + "," + membership_name(d.tags[k]) + "\n";
    return out;
}

inline std::string fiber_csv(const FiberCurve& c) {
    std::string out = "eps,J,I\n";
    for (const auto& s : c.samples)
        out += fmt(s.eps) + "," + fmt(s.j) + "," + fmt(s.i) + "\n";
    return out;
}

inline nlohmann::json to_json(const BlowupVerdict& v) {
    nlohmann::json j = {{"detected", v.detected},
                        {"trigger", trigger_name(v.trigger)},
                        {"numerically_valid", v.numerically_valid},
                        {"refinement_stable", v.refinement_stable},
                        {"inconclusive", v.inconclusive},
                        {"note", v.note}};
    if (v.t_detect) j["t_detect"] = *v.t_detect;
    if (v.bound_T_theorem) j["bound_T_theorem"] = *v.bound_T_theorem;
    if (v.bound_T_proof) j["bound_T_proof"] = *v.bound_T_proof;
    return j;
}

inline nlohmann::json to_json(const ConditionReport& r) {
    nlohmann::json viol1 = nlohmann::json::array(), viol2 = nlohmann::json::array();
    for (const auto& v : r.violations_growth) viol1.push_back({{"u", v.u}, {"slack", v.slack}});
    for (const auto& v : r.violations_gamma) viol2.push_back({{"u", v.u}, {"slack", v.slack}});
    return {{"holds_growth", r.holds_growth},
            {"holds_gamma_bound", r.holds_gamma_bound},
            {"worst_slack_growth", r.worst_slack_growth},
            {"worst_slack_growth_arg", r.worst_slack_growth_arg},
            {"worst_slack_homogeneous", r.worst_slack_homogeneous},
            {"worst_slack_gamma", r.worst_slack_gamma},
            {"worst_slack_gamma_arg", r.worst_slack_gamma_arg},
            {"min_feasible_gamma", r.min_feasible_gamma},
            {"gamma_feasible_in_range", r.gamma_feasible_in_range},
            {"min_feasible_sigma", r.min_feasible_sigma},
            {"scanned_u_max", r.scanned_u_max},
            {"scanned_count", r.scanned_count},
            {"sigma_zero_warning", r.sigma_zero_warning},
            {"violations_growth", viol1},
            {"violations_gamma", viol2}};
}

inline nlohmann::json to_json(const GrowthConstants& g) {
    return {{"A", g.A},
            {"B", g.B},
            {"probe_u", g.probe_u},
            {"bound_A_holds", g.bound_A_holds()},
            {"bound_B_holds", g.bound_B_holds()}};
}

inline nlohmann::json to_json(const EquivalenceReport& r) {
    return {{"hypothesis_met", r.hypothesis_met},
            {"lambda_bar", r.lambda_bar},
            {"found", r.found},
            {"m", r.m},
            {"mu", r.mu},
            {"note", r.note}};
}

inline nlohmann::json to_json(const Prediction& p) {
    nlohmann::json j = {{"E0", p.E0},          {"I0", p.I0},
                        {"d_estimate", p.d_estimate}, {"grad0_sq", p.grad0_sq},
                        {"u0u1", p.u0u1},      {"regime", regime_name(p.regime)}};
    if (p.delta_window)
        j["delta_window"] = {p.delta_window->first, p.delta_window->second};
    return j;
}

inline nlohmann::json to_json(const RunRecord& r, bool with_diagnostics = false) {
    nlohmann::json j = {{"plan_hash", r.plan_hash},
                        {"plan", r.plan_text},
                        {"prediction", to_json(r.prediction)},
                        {"blowup", to_json(r.blowup)},
                        {"verdict", verdict_name(r.verdict)},
                        {"verdict_note", r.verdict_note},
                        {"max_energy_drift", r.max_energy_drift},
                        {"sup_grad_sq", r.sup_grad_sq},
                        {"sign_flip", r.sign_flip},
                        {"t_final", r.t_final},
                        {"seed", r.seed},
                        {"invariance",
                         {{"applicable", r.invariance.applicable},
                          {"invariant", r.invariance.invariant},
                          {"vacuum_clear", r.invariance.vacuum_clear}}},
                        {"zero_energy",
                         {{"applicable", r.zero_energy.applicable},
                          {"holds", r.zero_energy.holds},
                          {"bound", r.zero_energy.bound}}}};
    if (with_diagnostics) j["diagnostics_csv"] = diagnostics_csv(r.diagnostics);
    return j;
}

} // namespace pwell
