#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pwell/classify.hpp"
#include "pwell/config.hpp"
#include "pwell/dynamics.hpp"
#include "pwell/embedding.hpp"
#include "pwell/grid.hpp"
#include "pwell/io.hpp"
#include "pwell/nonlinearity.hpp"
#include "pwell/wells.hpp"

namespace fs = std::filesystem;
using namespace pwell;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitFinding = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config_path;
    std::string out_dir = "out";
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    localtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path make_run_dir(const Options& opt, const std::string& command, const std::string& tag) {
    fs::path base = fs::path(opt.out_dir) / (command + "-" + timestamp() + (tag.empty() ? "" : "-" + tag));
    fs::path dir = base;
    for (int k = 1; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

// CSV files carry one timestamp header line; bodies are byte-reproducible.
void write_csv(const fs::path& p, const std::string& body) {
    write_file(p, "# generated " + timestamp() + "\n" + body);
}

void note(const Options& opt, const std::string& msg) {
    if (!opt.quiet) std::cout << msg << "\n";
}

Config load(const Options& opt) {
    Config cfg = load_config_file(opt.config_path);
    if (opt.seed) cfg.plan.seed = *opt.seed;
    return cfg;
}

fs::path start_run(const Options& opt, const std::string& command, const Config& cfg) {
    fs::path dir = make_run_dir(opt, command, cfg.tag);
    write_file(dir / "config.resolved", cfg.resolved_text());
    note(opt, "output: " + dir.string());
    return dir;
}

int cmd_check(const Options& opt) {
    Config cfg = load(opt);
    const auto dir = start_run(opt, "check", cfg);
    const double l1 = lambda1(cfg.plan.grid);
    cfg.plan.params.validate_against(l1);
    const auto rep = check_condition_H(cfg.plan.spec, cfg.plan.params);
    const auto gc = growth_constants(cfg.plan.spec, cfg.plan.params, 2.0);
    const auto eq = check_lemma_equivalence(cfg.plan.spec, cfg.plan.params, l1);
    nlohmann::json j = {{"lambda1", l1},
                       {"condition_H", to_json(rep)},
                       {"growth_constants", to_json(gc)},
                       {"lemma_equivalence", to_json(eq)}};
    write_file(dir / "check.json", j.dump(2) + "\n");
    note(opt, "condition (H): " + std::string(rep.all_hold() ? "holds" : "VIOLATED") +
                  " on |u| <= " + fmt(rep.scanned_u_max));
    return rep.all_hold() ? kExitOk : kExitFinding;
}

int cmd_eig(const Options& opt) {
    Config cfg = load(opt);
    const auto dir = start_run(opt, "eig", cfg);
    const Grid& g = cfg.plan.grid;
    std::string csv = "level,n,lambda1,lambda1_exact_discrete,c_star_starts,c_star\n";
    nlohmann::json table = nlohmann::json::array();
    for (int level = 0; level < 3; ++level) {
        const int div = 1 << (2 - level);
        Grid gl = g.dim == 1 ? Grid::interval(g.Lx, std::max(3, g.nx / div))
                             : Grid::rectangle(g.Lx, g.Ly, std::max(3, g.nx / div),
                                               std::max(3, g.ny / div));
        const double l1 = lambda1(gl);
        const int starts = 2 << level;
        const double cs = embedding_constant(gl, cfg.plan.params.gamma, starts, 1e-10, 20000,
                                             cfg.plan.seed);
        csv += std::to_string(level) + "," + std::to_string(gl.nx) + "," + fmt(l1) + "," +
               fmt(lambda1_discrete_exact(gl)) + "," + std::to_string(starts) + "," + fmt(cs) +
               "\n";
        table.push_back({{"n", gl.nx}, {"lambda1", l1}, {"c_star", cs}});
    }
    write_csv(dir / "eig.csv", csv);
    const double l1 = lambda1(g);
    const double cs = embedding_constant(g, cfg.plan.params.gamma, 16, 1e-10, 20000,
                                         cfg.plan.seed);
    nlohmann::json j = {{"lambda1", l1},
                       {"lambda1_exact_discrete", lambda1_discrete_exact(g)},
                       {"c_star_lower_bound", cs},
                       {"refinement", table}};
    write_file(dir / "eig.json", j.dump(2) + "\n");
    note(opt, "lambda1 = " + fmt(l1) + "  C* >= " + fmt(cs));
    return kExitOk;
}

int cmd_fiber(const Options& opt) {
    Config cfg = load(opt);
    const auto dir = start_run(opt, "fiber", cfg);
    const Field u0 = cfg.plan.u0.build(cfg.plan.grid, cfg.plan.seed, 0);
    const double eps_star = nehari_scale(cfg.plan.grid, cfg.plan.spec, u0);
    std::vector<double> eps_grid;
    for (int i = 1; i <= 400; ++i) eps_grid.push_back(2.5 * eps_star * double(i) / 400.0);
    const auto curve = fiber_scan(cfg.plan.grid, cfg.plan.spec, cfg.plan.params, u0, eps_grid);
    write_csv(dir / "fiber.csv", fiber_csv(curve));
    nlohmann::json j = {{"eps_star", eps_star},
                       {"eps_argmax_J", curve.eps_argmax_j},
                       {"eps_zero_crossing_I", curve.eps_zero_crossing_i}};
    write_file(dir / "fiber.json", j.dump(2) + "\n");
    note(opt, "eps* = " + fmt(eps_star));
    return kExitOk;
}

int cmd_depth(const Options& opt) {
    Config cfg = load(opt);
    const auto dir = start_run(opt, "depth", cfg);
    const auto& plan = cfg.plan;
    WellContext ctx = WellContext::build(plan.grid, plan.spec, plan.params, 2.0, 8, plan.seed);
    std::vector<double> deltas;
    for (int i = 1; i <= plan.curve_points; ++i)
        deltas.push_back(plan.params.gamma / 2.0 * double(i) / double(plan.curve_points));
    const DepthCurve curve =
        depth_curve(plan.grid, plan.spec, plan.params, ctx, deltas, plan.depth_budget, plan.seed);
    write_csv(dir / "depth_curve.csv", depth_curve_csv(curve));
    write_file(dir / "depth_curve.json", depth_curve_sidecar(curve).dump(2) + "\n");
    note(opt, "d(1) = " + fmt(curve.d_at_one) + "  b ~ " + fmt(curve.b_root) +
                  (curve.b_bracketed ? "" : " (>= max sampled delta)"));
    return kExitOk;
}

int cmd_simulate(const Options& opt) {
    Config cfg = load(opt);
    const auto dir = start_run(opt, "simulate", cfg);
    const auto& plan = cfg.plan;
    const State s0 = plan.initial_state();
    const auto res = simulate_with_refinement(plan.grid, plan.spec, plan.params, s0,
                                              plan.effective_dt(), plan.t_end, plan.monitors);
    write_csv(dir / "diagnostics.csv", diagnostics_csv(res.diagnostics));
    write_file(dir / "verdict.json", to_json(res.verdict).dump(2) + "\n");
    note(opt, res.verdict.detected
                  ? "blow-up detected at t = " + fmt(*res.verdict.t_detect) + " (" +
                        trigger_name(res.verdict.trigger) + ")"
                  : "no blow-up by t = " + fmt(plan.t_end));
    if (res.verdict.inconclusive || !res.verdict.numerically_valid) return kExitNumerical;
    return kExitOk;
}

int cmd_classify(const Options& opt) {
    Config cfg = load(opt);
    const auto dir = start_run(opt, "classify", cfg);
    const RunRecord rec = run_experiment(cfg.plan);
    write_file(dir / "run_record.json", to_json(rec).dump(2) + "\n");
    write_csv(dir / "diagnostics.csv", diagnostics_csv(rec.diagnostics));
    note(opt, std::string("regime: ") + regime_name(rec.prediction.regime) +
                  "  verdict: " + verdict_name(rec.verdict));
    switch (rec.verdict) {
        case Verdict::Confirmed: return kExitOk;
        case Verdict::Violated: return kExitFinding;
        case Verdict::Inconclusive: return kExitNumerical;
    }
    return kExitNumerical;
}

int cmd_sweep(const Options& opt) {
    Config cfg = load(opt);
    if (!cfg.sweep) {
        std::cerr << "error: sweep requires a [sweep] section in the config\n";
        return kExitInput;
    }
    const auto dir = start_run(opt, "sweep", cfg);
    const auto& sw = *cfg.sweep;

    std::vector<ExperimentPlan> plans;
    for (double v : sw.values) {
        ExperimentPlan p = cfg.plan;
        if (sw.parameter == "u0_scale" || sw.parameter == "amp_scale") p.u0.scale = v;
        if (sw.parameter == "u1_scale" || sw.parameter == "amp_scale") p.u1.scale = v;
        plans.push_back(std::move(p));
    }

    std::vector<RunRecord> records(plans.size());
    const int jobs = std::max(1, opt.jobs);
    std::vector<std::future<void>> pending;
    std::size_t next = 0;
    while (next < plans.size() || !pending.empty()) {
        while (static_cast<int>(pending.size()) < jobs && next < plans.size()) {
            const std::size_t i = next++;
            pending.push_back(std::async(std::launch::async,
                                         [&records, &plans, i] { records[i] = run_experiment(plans[i]); }));
        }
        pending.front().get();
        pending.erase(pending.begin());
    }

    std::string csv = "plan_hash,value,regime,verdict,E0,I0,d,t_detect,bound_T\n";
    bool any_violation = false, any_numerical = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        csv += fmt(r.plan_hash) + "," + fmt(sw.values[i]) + "," + regime_name(r.prediction.regime) +
               "," + verdict_name(r.verdict) + "," + fmt(r.prediction.E0) + "," +
               fmt(r.prediction.I0) + "," + fmt(r.prediction.d_estimate) + "," +
               (r.blowup.t_detect ? fmt(*r.blowup.t_detect) : "") + "," +
               (r.blowup.bound_T_theorem ? fmt(*r.blowup.bound_T_theorem) : "") + "\n";
        any_violation |= r.verdict == Verdict::Violated;
        any_numerical |= r.verdict == Verdict::Inconclusive;
        note(opt, "value " + fmt(sw.values[i]) + ": " + regime_name(r.prediction.regime) + " / " +
                      verdict_name(r.verdict));
    }
    write_csv(dir / "sweep_summary.csv", csv);
    if (any_violation) return kExitFinding;
    if (any_numerical) return kExitNumerical;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"potential-well laboratory for the semilinear wave equation"};
    app.require_subcommand(1);

    Options opt;
    std::uint64_t seed_flag = 0;
    app.add_option("--config", opt.config_path, "config file path")->required();
    app.add_option("--out", opt.out_dir, "output directory root");
    app.add_option("--jobs", opt.jobs, "sweep parallelism");
    auto* seed_opt = app.add_option("--seed", seed_flag, "seed override");
    app.add_flag("--quiet", opt.quiet, "suppress progress output");

    int (*handler)(const Options&) = nullptr;
    auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
        auto* sub = app.add_subcommand(name, help);
        sub->callback([&handler, fn] { handler = fn; });
        sub->fallthrough(); // allow global options after the subcommand
    };
    add("check", "verify condition (H) and growth constants", cmd_check);
    add("eig", "lambda1 and C* estimates with refinement table", cmd_eig);
    add("fiber", "fibering curve for the configured u0 direction", cmd_fiber);
    add("depth", "depth curve d(delta), b estimate, d(1)", cmd_depth);
    add("simulate", "time integration with blow-up detection", cmd_simulate);
    add("classify", "predict, simulate, and verify one experiment", cmd_classify);
    add("sweep", "run the experiment over a parameter range", cmd_sweep);

    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) opt.seed = seed_flag;

    try {
        return handler(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
