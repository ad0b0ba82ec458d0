#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pwell/dynamics.hpp"

using namespace pwell;

namespace {
const double pi = 3.14159265358979323846;

State sine_state(const Grid& g, double amp_u, double amp_v) {
    State s;
    s.u = Field::sample(g, [&](double x) { return amp_u * std::sin(x); });
    s.v = Field::sample(g, [&](double x) { return amp_v * std::sin(x); });
    return s;
}

double run_linear_error(const Grid& g, double dt, double t_final) {
    // exact solution of the discrete linear wave on the first eigenmode:
    // u(t) = cos(sqrt(lambda1_h) t) sin(x)
    const NonlinearitySpec zero = NonlinearitySpec::zero();
    State s = sine_state(g, 1.0, 0.0);
    const long steps = std::lround(t_final / dt);
    for (long k = 0; k < steps; ++k) s = step(g, zero, s, dt);
    const double c = std::cos(std::sqrt(lambda1_discrete_exact(g)) * s.t);
    double err = 0.0;
    for (int i = 0; i < g.nx; ++i)
        err = std::max(err, std::abs(s.u[i] - c * std::sin(g.x(i))));
    return err;
}
} // namespace

TEST_CASE("cfl bound") {
    const Grid g = Grid::interval(pi, 100);
    REQUIRE(cfl_dt_max(g) == Catch::Approx(0.9 * g.hx).epsilon(1e-12));
    const Grid g2 = Grid::rectangle(pi, pi, 32, 32);
    REQUIRE(cfl_dt_max(g2) ==
            Catch::Approx(0.9 * 2.0 / std::sqrt(4.0 / (g2.hx * g2.hx) + 4.0 / (g2.hy * g2.hy)))
                .epsilon(1e-12));
}

TEST_CASE("step: zero data is a fixed point") {
    const Grid g = Grid::interval(pi, 50);
    const NonlinearitySpec cubic = NonlinearitySpec::odd_power(3.0);
    State s;
    s.u = Field(g);
    s.v = Field(g);
    s = step(g, cubic, s, 0.01);
    for (double x : s.u.v) REQUIRE(x == 0.0);
    for (double x : s.v.v) REQUIRE(x == 0.0);
    REQUIRE(s.t == Catch::Approx(0.01));
}

TEST_CASE("step: linear eigenmode matches the discrete solution at O(dt^2)") {
    const Grid g = Grid::interval(pi, 100);
    const double dt = g.hx / 8.0;
    const double e1 = run_linear_error(g, dt, 1.0);
    const double e2 = run_linear_error(g, dt / 2.0, 1.0);
    REQUIRE(e1 < 1e-4);
    const double ratio = e1 / e2;
    REQUIRE(ratio > 3.0);
    REQUIRE(ratio < 5.0);
}

TEST_CASE("step: time reversal over 100 steps") {
    const Grid g = Grid::interval(pi, 60);
    const NonlinearitySpec cubic = NonlinearitySpec::odd_power(3.0);
    State s0 = sine_state(g, 0.5, 0.2);
    State s = s0;
    const double dt = g.hx / 4.0;
    for (int k = 0; k < 100; ++k) s = step(g, cubic, s, dt);
    for (int k = 0; k < 100; ++k) s = step(g, cubic, s, -dt);
    for (int i = 0; i < g.nx; ++i) {
        REQUIRE(s.u[i] == Catch::Approx(s0.u[i]).margin(1e-12));
        REQUIRE(s.v[i] == Catch::Approx(s0.v[i]).margin(1e-12));
    }
}

TEST_CASE("simulate: linear control conserves energy") {
    const Grid g = Grid::interval(pi, 200);
    const NonlinearitySpec zero = NonlinearitySpec::zero();
    ConditionParams params;
    params.sigma = 0.0;
    // amplitude 0.5: the unit-amplitude eigenmode already oscillates with
    // relative energy error (omega dt)^2/4 ~ 1.7e-6 under exact Verlet
    const State s0 = sine_state(g, 0.5, 0.0);
    const auto res = simulate(g, zero, params, s0, g.hx / 4.0, 10.0);
    REQUIRE_FALSE(res.verdict.detected);
    REQUIRE(res.verdict.numerically_valid);
    const double E0 = res.diagnostics.energy.front();
    for (double E : res.diagnostics.energy)
        REQUIRE(std::abs(E - E0) / (1.0 + std::abs(E0)) < 1e-6);
}

TEST_CASE("simulate: small-data cubic run stays in the well") {
    const Grid g = Grid::interval(pi, 100);
    const NonlinearitySpec cubic = NonlinearitySpec::odd_power(3.0);
    ConditionParams params;
    params.sigma = 0.0;
    const State s0 = sine_state(g, 0.1, 0.0);
    const auto res = simulate(g, cubic, params, s0, g.hx / 4.0, 10.0);
    REQUIRE_FALSE(res.verdict.detected);
    REQUIRE(res.verdict.numerically_valid);
    for (double I : res.diagnostics.I_values) REQUIRE(I > 0.0);
    for (auto tag : res.diagnostics.tags) REQUIRE(tag == Membership::WdeltaInterior);
}

TEST_CASE("simulate: large data blows up near the theorem bound") {
    const Grid g = Grid::interval(pi, 100);
    const NonlinearitySpec cubic = NonlinearitySpec::odd_power(3.0);
    ConditionParams params;
    params.sigma = 0.0;
    const State s0 = sine_state(g, 10.0, 10.0);
    const auto res =
        simulate_with_refinement(g, cubic, params, s0, cfl_dt_max(g) / 4.0, 1.0);
    REQUIRE(res.verdict.detected);
    REQUIRE(res.verdict.refinement_stable);
    REQUIRE(res.verdict.bound_T_theorem);
    REQUIRE(*res.verdict.bound_T_theorem == Catch::Approx(1.0 / 6.0).epsilon(1e-12));
    // Reference integration (RK45, rtol 1e-10) puts the actual moment-threshold
    // crossing at t ~ 0.177, slightly past the reported bound of 1/6; the bound
    // is reported as-is and detection lands in a tight window above it.
    REQUIRE(*res.verdict.t_detect >= *res.verdict.bound_T_theorem * 0.9);
    REQUIRE(*res.verdict.t_detect <= 0.25);
}

TEST_CASE("simulate: M' column is consistent with finite differences of M") {
    const Grid g = Grid::interval(pi, 100);
    const NonlinearitySpec zero = NonlinearitySpec::zero();
    ConditionParams params;
    params.sigma = 0.0;
    SimulationMonitors mon;
    mon.sample_dt = 0.02;
    const auto res = simulate(g, zero, params, sine_state(g, 1.0, 0.3), g.hx / 4.0, 2.0, mon);
    const auto& d = res.diagnostics;
    for (std::size_t k = 1; k + 1 < d.times.size(); ++k) {
        const double dtc = d.times[k + 1] - d.times[k - 1];
        const double fd = (d.M[k + 1] - d.M[k - 1]) / dtc;
        REQUIRE(fd == Catch::Approx(d.M_prime[k]).margin(5e-3));
    }
}

TEST_CASE("blowup bounds") {
    const Grid g = Grid::interval(pi, 200);
    const State s = sine_state(g, 1.0, 1.0);
    auto [bt, bp] = blowup_bounds(g, s, 4.0);
    REQUIRE(bt);
    REQUIRE(bp);
    REQUIRE(*bt == Catch::Approx(1.0 / 6.0).epsilon(1e-12));
    REQUIRE(*bp == Catch::Approx(1.0 / 12.0).epsilon(1e-12));

    // u1 = 0: bounds are absent, not zero
    auto [b0, p0] = blowup_bounds(g, sine_state(g, 1.0, 0.0), 4.0);
    REQUIRE_FALSE(b0);
    REQUIRE_FALSE(p0);

    // doubling both fields leaves the ratio unchanged
    auto [b2, p2] = blowup_bounds(g, sine_state(g, 2.0, 2.0), 4.0);
    REQUIRE(*b2 == Catch::Approx(*bt).epsilon(1e-12));
    REQUIRE(*p2 == Catch::Approx(*bp).epsilon(1e-12));
}

TEST_CASE("detect_blowup on synthetic diagnostics") {
    DetectionThresholds th;
    th.blowup_factor = 4.0; // (1 - t/T*)^{-1/6} reaches 4 at t/T* = 1 - 4^{-6}

    // constant M: nothing to report
    TrajectoryDiagnostics flat;
    for (int k = 0; k < 50; ++k) {
        flat.times.push_back(0.1 * k);
        flat.M.push_back(2.0);
    }
    REQUIRE_FALSE(detect_blowup(flat, th).detected);

    // M(t) = M0 (1 - t/T*)^{-1/(alpha+2)} crosses the factor before T*
    const double Tstar = 1.0, alpha = 4.0, M0 = 2.0;
    TrajectoryDiagnostics prof;
    double expected_t = -1.0;
    for (int k = 0; k < 10000; ++k) {
        const double t = Tstar * k / 10000.0;
        const double M = M0 * std::pow(1.0 - t / Tstar, -1.0 / (alpha + 2.0));
        prof.times.push_back(t);
        prof.M.push_back(M);
        if (expected_t < 0.0 && M >= th.blowup_factor * M0) expected_t = t;
    }
    const auto v = detect_blowup(prof, th);
    REQUIRE(v.detected);
    REQUIRE(v.trigger == BlowupTrigger::MomentThreshold);
    REQUIRE(*v.t_detect == Catch::Approx(expected_t));

    // a NaN sample before the crossing is inconclusive, never blow-up
    TrajectoryDiagnostics nan_series = prof;
    nan_series.M[100] = std::nan("");
    const auto vn = detect_blowup(nan_series, th);
    REQUIRE_FALSE(vn.detected);
    REQUIRE(vn.inconclusive);
    REQUIRE_FALSE(vn.numerically_valid);
}

TEST_CASE("concavity surrogate along the blow-up run") {
    const Grid g = Grid::interval(pi, 100);
    const NonlinearitySpec cubic = NonlinearitySpec::odd_power(3.0);
    ConditionParams params;
    params.sigma = 0.0;
    SimulationMonitors mon;
    mon.sample_dt = 0.002;
    const State s0 = sine_state(g, 10.0, 10.0);
    const double alpha = params.alpha, beta = params.beta;
    const double l1 = lambda1_discrete_exact(g);
    const auto res = simulate(g, cubic, params, s0, cfl_dt_max(g) / 8.0, 1.0, mon);
    REQUIRE(res.verdict.detected);
    const auto& d = res.diagnostics;
    const double E0 = d.energy.front();
    int checked = 0;
    for (std::size_t k = 1; k + 2 < d.times.size(); ++k) {
        if (!((l1 * (alpha - 2.0) - 2.0 * beta) * d.M[k] > 2.0 * alpha * E0)) continue;
        // near detection the bound is asymptotically tight and the centered
        // difference can no longer resolve M''; stay below 100x the moment
        if (d.M[k + 1] >= 100.0 * d.M.front()) continue;
        const double h1 = d.times[k] - d.times[k - 1];
        const double h2 = d.times[k + 1] - d.times[k];
        if (std::abs(h1 - h2) > 1e-12) continue; // skip the triggered extra sample
        const double m2 = (d.M[k + 1] - 2.0 * d.M[k] + d.M[k - 1]) / (h1 * h1);
        // ||u_t||^2 = 2 (E - J)
        const double ut_sq = 2.0 * (d.energy[k] - d.J_values[k]);
        REQUIRE(m2 >= (alpha + 2.0) * ut_sq * 0.90);
        ++checked;
    }
    REQUIRE(checked > 3);
}

TEST_CASE("simulate rejects bad dt") {
    const Grid g = Grid::interval(pi, 50);
    ConditionParams params;
    const State s0 = sine_state(g, 1.0, 0.0);
    REQUIRE_THROWS_AS(
        simulate(g, NonlinearitySpec::zero(), params, s0, 0.0, 1.0),
        std::invalid_argument);
    REQUIRE_THROWS_AS(
        simulate(g, NonlinearitySpec::zero(), params, s0, 10.0 * cfl_dt_max(g), 1.0),
        std::invalid_argument);
}
