#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "straintail/config.hpp"
#include "straintail/errors.hpp"
#include "straintail/rare_event.hpp"
#include "straintail/report.hpp"
#include "support.hpp"

using namespace straintail;
using straintail::testing::se_constant_spec;

namespace {

FlatConfig parse_text(const std::string& text)
{
    std::istringstream is(text);
    return FlatConfig::parse(is);
}

std::string write_temp_config(const std::string& name, const std::string& text)
{
    const std::string path = "/tmp/" + name;
    std::ofstream os(path);
    os << text;
    return path;
}

/// Runs `cli args` with stdout/stderr captured; returns the exit code.
int run_cli(const std::string& args)
{
    const char* cli = std::getenv("STRAINTAIL_CLI");
    REQUIRE(cli != nullptr);
    const std::string cmd = std::string("\"") + cli + "\" " + args
                          + " >/tmp/straintail_cli_stdout.txt 2>/tmp/straintail_cli_stderr.txt";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path)
{
    std::ifstream is(path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

bool have_cli()
{
    return std::getenv("STRAINTAIL_CLI") != nullptr
        && std::getenv("STRAINTAIL_CONFIG_DIR") != nullptr;
}

} // namespace

TEST_CASE("flat config: comments, whitespace, dotted keys")
{
    auto cfg = parse_text(
        "# full-line comment\n"
        "\n"
        "  kernel.family = squared-exponential  # trailing comment\n"
        "sigma=0.5\n"
        "b_list = 1.0, 2.0 ,3.5\n"
        "flag = yes\n"
        "count = 42\n");
    REQUIRE(cfg.get_string("kernel.family") == "squared-exponential");
    REQUIRE(cfg.get_double("sigma") == 0.5);
    const auto list = cfg.get_double_list("b_list");
    REQUIRE(list == std::vector<double>{1.0, 2.0, 3.5});
    REQUIRE(cfg.get_bool("flag", false));
    REQUIRE(cfg.get_int("count", 0) == 42);
    REQUIRE(cfg.get_u64("count", 0) == 42);
    REQUIRE(cfg.get_double("absent", 7.5) == 7.5);
    REQUIRE(cfg.get_string("absent", "dflt") == "dflt");
    REQUIRE_FALSE(cfg.get_optional_double("absent").has_value());
    REQUIRE_NOTHROW(cfg.fail_on_unused());
}

TEST_CASE("flat config: malformed input is rejected")
{
    REQUIRE_THROWS_AS(parse_text("a = 1\na = 2\n"), ConfigError);      // duplicate
    REQUIRE_THROWS_AS(parse_text("just a line\n"), ConfigError);       // no '='
    REQUIRE_THROWS_AS(parse_text(" = 3\n"), ConfigError);              // empty key

    auto cfg = parse_text("x = abc\nflag = maybe\nn = 1.5\nlist = 1,,2\nempty =\n");
    REQUIRE_THROWS_AS(cfg.get_double("x"), ConfigError);
    REQUIRE_THROWS_AS(cfg.get_bool("flag", false), ConfigError);
    REQUIRE_THROWS_AS(cfg.get_int("n", 0), ConfigError);
    REQUIRE_THROWS_AS(cfg.get_double_list("list"), ConfigError);
    REQUIRE_THROWS_AS(cfg.get_double_list("empty"), ConfigError);

    auto unused = parse_text("known = 1\nmystery = 2\n");
    REQUIRE(unused.get_double("known") == 1.0);
    REQUIRE_THROWS_AS(unused.fail_on_unused(), ConfigError);

    REQUIRE_THROWS_AS(FlatConfig::parse_file("/nonexistent/straintail.cfg"), ConfigError);
}

TEST_CASE("run config loader: happy path")
{
    const std::string path = write_temp_config("straintail_ok.cfg",
        "kernel.family = squared-exponential\n"
        "kernel.length_scale = 0.2\n"
        "sigma = 0.5\n"
        "L = 1.0\n"
        "forcing.kind = constant\n"
        "forcing.p0 = 1.0\n"
        "b = 1.0\n"
        "n = 500\n"
        "grid_n = 64\n"
        "seed = 7\n"
        "method = direct\n");
    const RunConfig rc = load_run_config(path);
    REQUIRE(rc.spec.sigma == 0.5);
    REQUIRE(rc.spec.L == 1.0);
    REQUIRE(rc.spec.kernel.length_scale == 0.2);
    REQUIRE(rc.spec.kernel.delta == Catch::Approx(25.0));
    REQUIRE(rc.spec.forcing.kind == ForcingKind::Constant);
    REQUIRE(rc.b_list == std::vector<double>{1.0});
    REQUIRE(rc.n == 500);
    REQUIRE(rc.grid_n == 64);
    REQUIRE(rc.seed == 7);
    REQUIRE(rc.method == "direct");
    REQUIRE_FALSE(rc.homo_literal_theorem);
    REQUIRE_FALSE(rc.x_star.has_value());
}

TEST_CASE("run config loader: rejections")
{
    auto loads = [](const std::string& body) {
        const std::string path = write_temp_config("straintail_bad.cfg", body);
        return load_run_config(path);
    };
    const std::string base =
        "kernel.family = squared-exponential\n"
        "kernel.length_scale = 0.2\n"
        "forcing.kind = constant\n"
        "forcing.p0 = 1.0\n";

    REQUIRE_THROWS_AS(loads("kernel.family = custom-analytic\n"
                            "kernel.length_scale = 0.2\nsigma = 0.5\n"
                            "forcing.kind = constant\nforcing.p0 = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(loads("kernel.family = matern\n"
                            "kernel.length_scale = 0.2\nsigma = 0.5\n"
                            "forcing.kind = constant\nforcing.p0 = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(loads(base), ConfigError); // sigma missing
    REQUIRE_THROWS_AS(loads(base + "sigma = 0.5\nb = 1\nb_list = 1,2\n"), ConfigError);
    REQUIRE_THROWS_AS(loads(base + "sigma = 0.5\nmethod = magic\n"), ConfigError);
    REQUIRE_THROWS_AS(loads(base + "sigma = 0.5\ngrid_n = 1\n"), ConfigError);
    REQUIRE_THROWS_AS(loads(base + "sigma = 0.5\nnbins = 0\n"), ConfigError);
    REQUIRE_THROWS_AS(loads(base + "sigma = 0.5\nb = -2\n"), ConfigError);
    REQUIRE_THROWS_AS(loads(base + "sigma = 0.5\nturbo = on\n"), ConfigError); // typo key
    REQUIRE_THROWS_AS(loads(base + "sigma = -1\n"), ConfigError);
    REQUIRE_THROWS_AS(loads("kernel.family = squared-exponential\n"
                            "kernel.length_scale = 0.2\nsigma = 0.5\n"
                            "forcing.kind = square-wave\n"), ConfigError);
}

TEST_CASE("json reports: absent values become null, dumps round-trip")
{
    const ProblemSpec spec = se_constant_spec(0.5, 0.2);
    const ApproxReport rep = approximate_tail(spec, 1.0);
    const nlohmann::json j = to_json(rep);
    REQUIRE(j["homogeneous"] == true);
    REQUIRE(j["u"].is_null()); // no interior channel for uniform forcing
    REQUIRE(j["total"].is_number());
    REQUIRE(j["dominant"] == "both-ends");
    REQUIRE(j["interior_x"].is_array());
    REQUIRE(j["interior_x"].empty());

    const std::string once = j.dump(2);
    const std::string twice = nlohmann::json::parse(once).dump(2);
    REQUIRE(once == twice);

    TailEstimate est;
    est.b = 1.0;
    est.method = "direct";
    est.p_hat = 0.25;
    est.std_error = 0.01;
    const nlohmann::json je = to_json(est);
    REQUIRE(je["stderr"] == 0.01);
    REQUIRE(je["zeta"].is_null()); // direct runs carry no tilt level
}

TEST_CASE("csv writers: headers and row shapes")
{
    const ProblemSpec spec = se_constant_spec(0.5, 0.2);
    const auto rows = compare(spec, {0.8}, "direct", 200, 64, 5);
    std::ostringstream os;
    write_compare_csv(os, rows);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    REQUIRE(line == "b,method,p_hat,stderr,approx_total,term_interior,term_left,term_right,ratio");
    int nrows = 0;
    while (std::getline(is, line)) ++nrows;
    REQUIRE(nrows == 1);

    const auto h = location_histogram(spec, 0.8, 2000, 64, 5, std::nullopt, std::nullopt, 8);
    std::ostringstream oh;
    write_histogram_csv(oh, h);
    std::istringstream ih(oh.str());
    REQUIRE(std::getline(ih, line));
    REQUIRE(line == "bin_lo,bin_hi,mass");
    nrows = 0;
    while (std::getline(ih, line)) ++nrows;
    REQUIRE(nrows == 8);

    PathSample path;
    path.grid = {0.0, 0.5, 1.0};
    path.values = {0.1, -0.2, 0.3};
    std::ostringstream op;
    write_path_csv(op, path);
    REQUIRE(op.str().rfind("x,xi\n", 0) == 0);

    REQUIRE_THROWS_AS(open_output("/nonexistent-dir/out.json"), ConfigError);
}

TEST_CASE("command line: tail approximation run")
{
    if (!have_cli())
        SKIP("cli environment not set");
    const std::string cfgdir = std::getenv("STRAINTAIL_CONFIG_DIR");
    const int rc = run_cli("approx --config \"" + cfgdir
                           + "/homogeneous.cfg\" --out /tmp/straintail_approx.json");
    REQUIRE(rc == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp("/tmp/straintail_approx.json"));
    REQUIRE(j["b"] == 1.0);
    REQUIRE(j["homogeneous"] == true);
    REQUIRE(j["dominant"] == "both-ends");
    REQUIRE(j["total"].is_number());
    REQUIRE(j["total"] > 0.0);
    REQUIRE(j["homo_literal_total"] > j["total"]);
}

TEST_CASE("command line: simulation and comparison ladder")
{
    if (!have_cli())
        SKIP("cli environment not set");
    const std::string cfg = write_temp_config("straintail_cli_small.cfg",
        "kernel.family = squared-exponential\n"
        "kernel.length_scale = 0.2\n"
        "sigma = 0.5\n"
        "forcing.kind = constant\n"
        "forcing.p0 = 1.0\n"
        "b_list = 0.8, 1.2\n"
        "n = 400\n"
        "grid_n = 64\n"
        "seed = 11\n"
        "method = direct\n");

    REQUIRE(run_cli("simulate --config \"" + cfg + "\" --out /tmp/straintail_sim.json") == 0);
    const nlohmann::json js = nlohmann::json::parse(slurp("/tmp/straintail_sim.json"));
    REQUIRE(js.is_array());
    REQUIRE(js.size() == 2);
    REQUIRE(js[0]["method"] == "direct");
    REQUIRE(js[0]["p_hat"].is_number());

    REQUIRE(run_cli("compare --config \"" + cfg + "\" --out /tmp/straintail_cmp.csv") == 0);
    std::istringstream is(slurp("/tmp/straintail_cmp.csv"));
    std::string line;
    REQUIRE(std::getline(is, line));
    REQUIRE(line == "b,method,p_hat,stderr,approx_total,term_interior,term_left,term_right,ratio");
    int nrows = 0;
    while (std::getline(is, line)) ++nrows;
    REQUIRE(nrows == 2);
}

TEST_CASE("command line: kernel description")
{
    if (!have_cli())
        SKIP("cli environment not set");
    const std::string cfgdir = std::getenv("STRAINTAIL_CONFIG_DIR");
    REQUIRE(run_cli("kernel-info --config \"" + cfgdir
                    + "/homogeneous.cfg\" --out /tmp/straintail_kinfo.json") == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp("/tmp/straintail_kinfo.json"));
    REQUIRE(j["family"] == "squared-exponential");
    REQUIRE(j["delta"] == Catch::Approx(25.0));
    REQUIRE(j["a4"] == Catch::Approx(1875.0));
    REQUIRE(j["zeta_hat"] == Catch::Approx(0.4810583936277878).margin(1e-6));
    REQUIRE(j["r"] == Catch::Approx(1.4685733423563878).margin(1e-9));
    REQUIRE(j["assumptions"]["unit_variance_ok"] == true);
}

TEST_CASE("command line: failure exit codes")
{
    if (!have_cli())
        SKIP("cli environment not set");
    // 2: unusable configuration
    REQUIRE(run_cli("approx --config /tmp/straintail_no_such.cfg") == 2);
    // 3: a level below the asymptotic regime
    const std::string cfg = write_temp_config("straintail_cli_low.cfg",
        "kernel.family = squared-exponential\n"
        "kernel.length_scale = 0.2\n"
        "sigma = 0.5\n"
        "forcing.kind = constant\n"
        "forcing.p0 = 1.0\n"
        "b = 0.01\n");
    REQUIRE(run_cli("approx --config \"" + cfg + "\"") == 3);
    // help is not a failure
    REQUIRE(run_cli("--help") == 0);
}
