#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "apk/config.hpp"
#include "apk/errors.hpp"
#include "apk/experiments.hpp"
#include "apk/output.hpp"

using namespace apk;

namespace {

std::string error_of(auto&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("apk_unit_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const RunConfig c = parse_config("solver = micromacro\n");
    CHECK(c.solver == SolverKind::MicroMacro);
    CHECK(c.n_x == 200);
    CHECK(c.n_v == 160);
    CHECK(c.dt() == doctest::Approx(2.5e-3));
    CHECK(c.newton_tol == 1e-10);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("step keys convert to counts") {
    const RunConfig c = parse_config("dx = 5e-3\ndt = 1e-3\ndv = 0.05\nt_final = 0.5 # comment\n");
    CHECK(c.n_x == 400);
    CHECK(c.n_t == 500);
    CHECK(c.n_v == 40);
    CHECK(error_of([] { (void)parse_config("dx = 0.3\n"); }).find("dx") != std::string::npos);
}

TEST_CASE("config errors name the key") {
    const std::string cfl = error_of([] { validate(parse_config("dx = 1e-2\nt_final = 1.2\nn_t = 100\n")); });
    CHECK(cfl.find("v_max") != std::string::npos);
    CHECK(cfl.find("dt") != std::string::npos);
    const std::string unknown = error_of([] { (void)parse_config("eps = 1\nepsilon = 2\n"); });
    CHECK(unknown.find("line 2") != std::string::npos);
    CHECK(unknown.find("epsilon") != std::string::npos);
    CHECK(unknown.find("n_x") != std::string::npos);
    CHECK(error_of([] { (void)parse_config("eps = abc\n"); }).find("eps") != std::string::npos);
    CHECK(error_of([] { (void)parse_config("n_x = 201\n"); }).find("n_x") != std::string::npos);
}

TEST_CASE("figure preset") {
    const RunConfig c = parse_config("preset = fig_phi_reg_ep1\n");
    CHECK(c.eps == 1.0);
    CHECK(c.dt() == doctest::Approx(2.5e-3));
    CHECK(c.dx() == doctest::Approx(1e-2));
    CHECK(c.snapshot_times == std::vector<double>{0.25, 0.5, 0.75, 1.0});
    // Plain keys override the preset regardless of order.
    CHECK(parse_config("eps = 0.5\npreset = fig_phi_reg_ep1\n").eps == 0.5);
    CHECK_THROWS_AS((void)preset_config("no_such_preset"), ConfigError);
}

TEST_CASE("overrides") {
    RunConfig c = preset_config("fig_front");
    apply_overrides(c, {"eps=1e-2", "dx=2.5e-3", "solver=hj_limit"});
    CHECK(c.eps == 1e-2);
    CHECK(c.n_x == 800);
    CHECK(c.solver == SolverKind::HJLimit);
    CHECK_THROWS_AS(apply_overrides(c, {"eps"}), ConfigError);
}

TEST_CASE("unknown experiment lists the valid names") {
    const std::string e = error_of([] { (void)run_experiment("nope", {}, {}); });
    for (const auto& name : experiment_names()) CHECK(e.find(name) != std::string::npos);
}

TEST_CASE("number formatting round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 2.5e-3, -7.25e300, 5e-324}) {
        const std::string s = format_double(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == x);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("csv writer") {
    const auto dir = scratch("csv");
    ensure_directory(dir);
    {
        CsvWriter w(dir / "t.csv", {"x", "phi"}, "n_x=2");
        w.row(std::vector<double>{-0.5, 0.25});
        w.row(std::vector<double>{0.5, 1.0 / 3.0});
        CHECK_THROWS_AS(w.row(std::vector<double>{1.0}), IoError);
    }
    CHECK(slurp(dir / "t.csv") == "# n_x=2\nx,phi\n-0.5,0.25\n0.5,0.3333333333333333\n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("identical configs give identical output files") {
    RunConfig c = parse_config("eps = 1e-2\nr = 1\nn_x = 40\nn_v = 16\nt_final = 0.2\nn_t = 40\nsnapshot_times = 0.1 0.2\n");
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto files = write_run(run_single(c), a);
    (void)write_run(run_single(c), b);
    for (const auto& f : files) {
        if (f == "manifest.txt") continue;  // carries wall time
        CHECK(slurp(a / f) == slurp(b / f));
    }
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}
