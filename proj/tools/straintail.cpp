// Command-line front end: tail approximation, Monte Carlo validation,
// exceedance-location histograms and kernel diagnostics, driven by a flat
// key = value config file.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "straintail/config.hpp"
#include "straintail/elliptic.hpp"
#include "straintail/report.hpp"

namespace {

using namespace straintail;

int env_threads()
{
    const char* raw = std::getenv("STRAINTAIL_THREADS");
    if (raw == nullptr || *raw == '\0')
        return 0; // auto
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == nullptr || *end != '\0' || v < 0)
        throw ConfigError("STRAINTAIL_THREADS must be a non-negative integer");
    return static_cast<int>(v);
}

struct OutputTarget {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit OutputTarget(const std::string& path)
    {
        if (!path.empty()) {
            file = open_output(path);
            os = &file;
        }
    }
    std::ostream& stream() { return *os; }
};

void require_levels(const RunConfig& rc, const char* cmd)
{
    if (rc.b_list.empty())
        throw ConfigError(std::string(cmd) + ": config must set 'b' or 'b_list'");
}

ApproxOptions approx_options(const RunConfig& rc)
{
    ApproxOptions opts;
    opts.x_star = rc.x_star;
    opts.homo_literal_theorem = rc.homo_literal_theorem;
    return opts;
}

int run_approx(const RunConfig& rc, const std::string& out, const std::string& format)
{
    require_levels(rc, "approx");
    if (format != "json")
        throw ConfigError("approx supports --format json only");
    nlohmann::json result;
    if (rc.b_list.size() == 1) {
        result = to_json(approximate_tail(rc.spec, rc.b_list[0], approx_options(rc)));
    } else {
        result = nlohmann::json::array();
        for (double b : rc.b_list)
            result.push_back(to_json(approximate_tail(rc.spec, b, approx_options(rc))));
    }
    OutputTarget target(out);
    write_json(target.stream(), result);
    return 0;
}

int run_simulate(const RunConfig& rc, const std::string& out, const std::string& format,
                 const std::string& dump_path, const std::string& dump_solution)
{
    require_levels(rc, "simulate");
    if (format != "json")
        throw ConfigError("simulate supports --format json only");
    const int threads = env_threads();

    if (!dump_path.empty() || !dump_solution.empty()) {
        const GridGaussianSampler sampler(rc.spec.kernel,
                                          make_uniform_grid(rc.spec.L, rc.grid_n));
        const PathSample path = sampler.draw(draw_seed(rc.seed, 0));
        if (!dump_path.empty()) {
            std::ofstream os = open_output(dump_path);
            write_path_csv(os, path);
        }
        if (!dump_solution.empty()) {
            const FdSolution sol = solve_fd_oracle(rc.spec, path);
            std::ofstream os = open_output(dump_solution);
            write_solution_csv(path.grid, sol, os);
        }
    }

    auto estimate = [&](double b) {
        return rc.method == "direct"
            ? mc_direct(rc.spec, b, rc.n, rc.grid_n, rc.seed, threads)
            : mc_tilted(rc.spec, b, rc.n, rc.grid_n, rc.seed, rc.zeta, threads);
    };
    nlohmann::json result;
    if (rc.b_list.size() == 1) {
        result = to_json(estimate(rc.b_list[0]));
    } else {
        result = nlohmann::json::array();
        for (double b : rc.b_list)
            result.push_back(to_json(estimate(b)));
    }
    OutputTarget target(out);
    write_json(target.stream(), result);
    return 0;
}

int run_compare(const RunConfig& rc, const std::string& out, const std::string& format)
{
    require_levels(rc, "compare");
    const std::vector<CompareRow> rows =
        compare(rc.spec, rc.b_list, rc.method, rc.n, rc.grid_n, rc.seed,
                approx_options(rc), rc.zeta, env_threads());
    OutputTarget target(out);
    if (format == "csv")
        write_compare_csv(target.stream(), rows);
    else
        write_json(target.stream(), to_json(rows));
    return 0;
}

int run_locate(const RunConfig& rc, const std::string& out, const std::string& format)
{
    require_levels(rc, "locate");
    const double b = *std::max_element(rc.b_list.begin(), rc.b_list.end());
    const LocationHistogram h =
        location_histogram(rc.spec, b, rc.n, rc.grid_n, rc.seed, rc.rho, rc.zeta,
                           rc.nbins, env_threads());
    OutputTarget target(out);
    if (format == "csv")
        write_histogram_csv(target.stream(), h);
    else
        write_json(target.stream(), to_json(h));
    return 0;
}

int run_kernel_info(const RunConfig& rc, const std::string& out, const std::string& format)
{
    if (format != "json")
        throw ConfigError("kernel-info supports --format json only");
    const AssumptionReport chk = check_assumptions(rc.spec.kernel, rc.spec.L);
    const BoundaryProfile prof = boundary_profile(BoundaryInputs{1.0, 0.0, 1.0}, rc.spec);

    nlohmann::json j;
    j["family"] = "squared-exponential";
    j["length_scale"] = rc.spec.kernel.length_scale;
    j["delta"] = rc.spec.kernel.delta;
    j["a4"] = rc.spec.kernel.a4;
    j["b6"] = detail::num_or_null(rc.spec.kernel.b6);
    j["assumptions"] = {
        {"unit_variance_ok", chk.unit_variance_ok},
        {"expansion_ok", chk.expansion_ok},
        {"monotone_ok", chk.monotone_ok},
        {"fitted_delta", chk.fitted_delta},
        {"fitted_a4", chk.fitted_a4},
        {"all_ok", chk.all_ok()},
        {"detail", chk.detail},
    };
    j["zeta_hat"] = prof.zeta;
    j["Xi"] = prof.Xi;
    j["G_unit"] = prof.G; // log sup of the end functional for unit end load
    j["r"] = location_ratio_r();
    OutputTarget target(out);
    write_json(target.stream(), j);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sharp tail approximation and rare-event simulation of the maximal "
                 "strain of a 1D randomly heterogeneous elastic bar"};
    app.require_subcommand(1);

    struct SubOpts {
        std::string config;
        std::string out;
        std::string format = "json";
    };
    auto add_common = [](CLI::App* sub, SubOpts& o, const char* default_format) {
        o.format = default_format;
        sub->add_option("--config", o.config, "flat key = value config file")
            ->required();
        sub->add_option("--out", o.out, "output file (default: stdout)");
        sub->add_option("--format", o.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    SubOpts approx_opts, simulate_opts, compare_opts, locate_opts, kernel_opts;
    std::string dump_path, dump_solution;

    CLI::App* approx = app.add_subcommand("approx", "tail approximation at level(s) b");
    add_common(approx, approx_opts, "json");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo tail estimate");
    add_common(simulate, simulate_opts, "json");
    simulate->add_option("--dump-path", dump_path, "write one sampled field to CSV (x,xi)");
    simulate->add_option("--dump-solution", dump_solution,
                         "write the finite-difference solution of that field to CSV "
                         "(x,v,v_prime)");

    CLI::App* cmp = app.add_subcommand("compare", "approximation vs simulation table");
    add_common(cmp, compare_opts, "csv");

    CLI::App* locate = app.add_subcommand("locate", "where the maximal strain sits, "
                                                    "conditional on exceedance");
    add_common(locate, locate_opts, "json");

    CLI::App* kinfo = app.add_subcommand("kernel-info", "kernel diagnostics and "
                                                        "location constants");
    add_common(kinfo, kernel_opts, "json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad usage is a config error
    }

    try {
        if (app.got_subcommand(approx))
            return run_approx(load_run_config(approx_opts.config), approx_opts.out,
                              approx_opts.format);
        if (app.got_subcommand(simulate))
            return run_simulate(load_run_config(simulate_opts.config), simulate_opts.out,
                                simulate_opts.format, dump_path, dump_solution);
        if (app.got_subcommand(cmp))
            return run_compare(load_run_config(compare_opts.config), compare_opts.out,
                               compare_opts.format);
        if (app.got_subcommand(locate))
            return run_locate(load_run_config(locate_opts.config), locate_opts.out,
                              locate_opts.format);
        if (app.got_subcommand(kinfo))
            return run_kernel_info(load_run_config(kernel_opts.config), kernel_opts.out,
                                   kernel_opts.format);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const AssumptionError& e) {
        std::cerr << "assumption violated: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 4;
    }
}
