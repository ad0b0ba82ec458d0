#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pwell/config.hpp"
#include "pwell/io.hpp"

using namespace pwell;
namespace fs = std::filesystem;

namespace {

Config parse(const std::string& text) {
    return load_config(ConfigDoc::parse_string(text));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// strip the "# generated <timestamp>" header line
std::string csv_body(const fs::path& p) {
    const std::string all = slurp(p);
    const auto nl = all.find('\n');
    return nl == std::string::npos ? all : all.substr(nl + 1);
}

fs::path find_single_dir(const fs::path& root) {
    fs::path found;
    for (const auto& e : fs::directory_iterator(root)) {
        REQUIRE(found.empty());
        found = e.path();
    }
    REQUIRE_FALSE(found.empty());
    return found;
}

} // namespace

TEST_CASE("config defaults and full parse") {
    const Config cfg = parse("");
    REQUIRE(cfg.plan.grid.dim == 1);
    REQUIRE(cfg.plan.grid.nx == 200);
    REQUIRE(cfg.plan.spec.family == NonlinearityFamily::OddPower);
    REQUIRE(cfg.plan.params.alpha == 4.0);
    REQUIRE(cfg.plan.params.sigma == 0.0);
    REQUIRE(cfg.plan.u0.kind == InitialRecipe::Kind::Modes);
    REQUIRE_FALSE(cfg.sweep);

    const Config full = parse(
        "[grid]\ndim = 1\nL = 3.14159265358979\nn = 64\n"
        "[nonlinearity]\nfamily = odd_power\np = 3\n"
        "[condition]\nalpha = 4\nbeta = 0\nsigma = 0.5\ngamma = 4\nU_max = 2\n"
        "[initial]\nu0_modes = 1:0.1;2:0.05\nu1_kind = random\nu1_scale = 0.2\n"
        "[integrator]\ndt = 0.001\nt_end = 2\n"
        "[search]\nseed = 42\nbudget = 16\n"
        "[output]\ntag = demo\n");
    REQUIRE(full.plan.grid.nx == 64);
    REQUIRE(full.plan.params.sigma == 0.5);
    REQUIRE(full.plan.u0.modes.size() == 2);
    REQUIRE(full.plan.u0.modes[1].kx == 2);
    REQUIRE(full.plan.u0.modes[1].amplitude == 0.05);
    REQUIRE(full.plan.u1.kind == InitialRecipe::Kind::RandomSmooth);
    REQUIRE(full.plan.u1.scale == 0.2);
    REQUIRE(full.plan.seed == 42);
    REQUIRE(full.tag == "demo");

    // resolved text reflects the effective values
    const std::string echoed = full.resolved_text();
    REQUIRE(echoed.find("sigma = 0.5") != std::string::npos);
    REQUIRE(echoed.find("seed = 42") != std::string::npos);
}

TEST_CASE("config errors name the offending key and section") {
    try {
        parse("[grid]\ndim = 1\nn = 50\nbogus_key = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("bogus_key") != std::string::npos);
        REQUIRE(msg.find("grid") != std::string::npos);
    }

    REQUIRE_THROWS_AS(parse("[grid]\ndim = 3\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[grid]\ndim = 1\nnx = 10\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[grid]\ndim = 2\nL = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[nonlinearity]\nfamily = cubic\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[initial]\nu0_modes = nonsense\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[initial]\nu0_kind = random\nu0_modes = 1:1\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[sweep]\nparameter = dt\nvalues = 1,2\n"), ConfigError);
    REQUIRE_THROWS_AS(parse("[sweep]\nparameter = u0_scale\nvalues = a,b\n"), ConfigError);
}

TEST_CASE("sweep and 2d grids parse") {
    const Config cfg = parse(
        "[grid]\ndim = 2\nLx = 3.1\nLy = 2.9\nnx = 12\nny = 10\n"
        "[initial]\nu0_modes = 1,2:0.5\n"
        "[sweep]\nparameter = u0_scale\nvalues = 0.1,1,10\n");
    REQUIRE(cfg.plan.grid.dim == 2);
    REQUIRE(cfg.plan.grid.ny == 10);
    REQUIRE(cfg.plan.u0.modes[0].kx == 1);
    REQUIRE(cfg.plan.u0.modes[0].ky == 2);
    REQUIRE(cfg.sweep);
    REQUIRE(cfg.sweep->parameter == "u0_scale");
    REQUIRE(cfg.sweep->values == std::vector<double>{0.1, 1.0, 10.0});
}

TEST_CASE("shortest round-trip number formatting") {
    REQUIRE(fmt(0.1) == "0.1");
    REQUIRE(fmt(1.0) == "1");
    REQUIRE(fmt(1.0 / 3.0) == "0.3333333333333333");
    REQUIRE(std::stod(fmt(3.141592653589793)) == 3.141592653589793);
    REQUIRE(fmt(std::uint64_t{18446744073709551615ULL}) == "18446744073709551615");
}

TEST_CASE("csv serialization shapes") {
    DepthCurve c;
    c.deltas = {0.5, 1.0};
    c.depths = {0.2, 0.5};
    c.radius = {0.3, 0.6};
    c.a_coeffs = {0.375, 0.25};
    c.b_root = 2.0;
    c.d_at_one = 0.5;
    const std::string csv = depth_curve_csv(c);
    REQUIRE(csv.rfind("delta,d_estimate,r_delta,a_delta\n", 0) == 0);
    REQUIRE(csv.find("\n0.5,0.2,0.3,0.375\n") != std::string::npos);
    const auto side = depth_curve_sidecar(c);
    REQUIRE(side.at("b_root") == 2.0);

    TrajectoryDiagnostics d;
    d.times = {0.0};
    d.energy = {1.5};
    d.M = {2.0};
    d.M_prime = {0.0};
    d.I_values = {0.25};
    d.J_values = {1.0};
    d.grad_norm_sq = {0.5};
    d.tags = {Membership::WdeltaInterior};
    const std::string dc = diagnostics_csv(d);
    REQUIRE(dc.rfind("t,E,M,M_prime,I,J,grad_norm_sq,tag\n", 0) == 0);
    REQUIRE(dc.find("W_delta") != std::string::npos);

    // serialization is a pure function of the data
    REQUIRE(diagnostics_csv(d) == dc);
}

#ifndef _WIN32
TEST_CASE("cli round trips", "[cli]") {
    REQUIRE(fs::exists("pwell")); // built alongside the tests

    const fs::path tmp = fs::temp_directory_path() / "pwell-cli-test";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const fs::path cfgpath = tmp / "run.cfg";
    {
        std::ofstream out(cfgpath);
        out << "[grid]\nn = 60\n"
            << "[integrator]\nt_end = 1\n"
            << "[search]\nseed = 5\nbudget = 8\ncurve_points = 8\n";
    }
    auto run = [&](const std::string& args, const fs::path& out) {
        const std::string cmd = "./pwell --quiet --config " + cfgpath.string() + " --out " +
                                out.string() + " " + args + " >/dev/null 2>&1";
        return std::system(cmd.c_str()) / 256;
    };

    // `check` on cubic defaults passes with a zero-slack report
    REQUIRE(run("check", tmp / "check") == 0);
    const fs::path checkdir = find_single_dir(tmp / "check");
    REQUIRE(fs::exists(checkdir / "config.resolved"));
    REQUIRE(fs::exists(checkdir / "check.json"));
    REQUIRE(slurp(checkdir / "check.json").find("\"holds_growth\":") != std::string::npos);

    // simulate twice with the same seed: byte-identical CSV bodies
    REQUIRE(run("simulate", tmp / "sim1") == 0);
    REQUIRE(run("simulate", tmp / "sim2") == 0);
    const fs::path s1 = find_single_dir(tmp / "sim1");
    const fs::path s2 = find_single_dir(tmp / "sim2");
    REQUIRE(csv_body(s1 / "diagnostics.csv") == csv_body(s2 / "diagnostics.csv"));
    REQUIRE(slurp(s1 / "config.resolved") == slurp(s2 / "config.resolved"));

    // malformed config: exit code 1
    const fs::path badpath = tmp / "bad.cfg";
    {
        std::ofstream out(badpath);
        out << "[grid]\nwat = 1\n";
    }
    const std::string badcmd = "./pwell --quiet --config " + badpath.string() + " --out " +
                               (tmp / "bad").string() + " check >/dev/null 2>&1";
    REQUIRE(std::system(badcmd.c_str()) / 256 == 1);

    fs::remove_all(tmp);
}
#endif
