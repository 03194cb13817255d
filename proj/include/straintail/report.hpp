#ifndef STRAINTAIL_REPORT_HPP
#define STRAINTAIL_REPORT_HPP

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "straintail/errors.hpp"
#include "straintail/rare_event.hpp"

namespace straintail {

namespace detail {

/// JSON has no NaN/inf; report absent quantities as null.
inline nlohmann::json num_or_null(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    return v;
}

inline std::ostream& csv_num(std::ostream& os, double v)
{
    os << std::setprecision(17) << v;
    return os;
}

} // namespace detail

inline nlohmann::json to_json(const ApproxReport& rep)
{
    nlohmann::json j;
    j["b"] = rep.b;
    j["homogeneous"] = rep.homogeneous;
    j["u"] = detail::num_or_null(rep.u);
    j["u0"] = detail::num_or_null(rep.u0);
    j["uL"] = detail::num_or_null(rep.uL);
    j["zeta0"] = detail::num_or_null(rep.zeta0);
    j["zetaL"] = detail::num_or_null(rep.zetaL);
    j["Xi0"] = detail::num_or_null(rep.Xi0);
    j["XiL"] = detail::num_or_null(rep.XiL);
    j["kappa0"] = detail::num_or_null(rep.kappa0);
    j["kappaL"] = detail::num_or_null(rep.kappaL);
    j["D"] = detail::num_or_null(rep.D);
    j["D0"] = detail::num_or_null(rep.D0);
    j["DL"] = detail::num_or_null(rep.DL);
    j["term_interior"] = detail::num_or_null(rep.term_interior);
    j["term_left"] = detail::num_or_null(rep.term_left);
    j["term_right"] = detail::num_or_null(rep.term_right);
    j["total"] = detail::num_or_null(rep.total);
    j["dominant"] = to_string(rep.dominant);
    j["r"] = detail::num_or_null(rep.r);
    j["zeta_at_u_limit"] = rep.zeta_at_u_limit;
    j["homo_literal_total"] = detail::num_or_null(rep.homo_literal_total);
    j["interior_x"] = rep.interior_x;
    return j;
}

inline nlohmann::json to_json(const TailEstimate& est)
{
    nlohmann::json j;
    j["b"] = est.b;
    j["method"] = est.method;
    j["p_hat"] = est.p_hat;
    j["stderr"] = est.std_error;
    j["n"] = est.n;
    j["grid_n"] = est.grid_n;
    j["seed"] = est.seed;
    j["zeta"] = detail::num_or_null(est.zeta);
    return j;
}

inline nlohmann::json to_json(const LocationHistogram& h)
{
    nlohmann::json j;
    j["rho"] = h.rho;
    j["mass_near_left"] = h.mass_near_left;
    j["mass_near_right"] = h.mass_near_right;
    j["mass_near_interior"] = h.mass_near_interior;
    j["mass_left_half"] = h.mass_left_half;
    j["mass_right_half"] = h.mass_right_half;
    j["se_left_half"] = h.se_left_half;
    j["se_right_half"] = h.se_right_half;
    j["se_half_diff"] = h.se_half_diff;
    j["bin_edges"] = h.bin_edges;
    j["mass"] = h.mass;
    j["exceedance"] = to_json(h.exceedance);
    return j;
}

inline nlohmann::json to_json(const std::vector<CompareRow>& rows)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const CompareRow& row : rows) {
        nlohmann::json j;
        j["b"] = row.b;
        j["method"] = row.method;
        j["p_hat"] = row.p_hat;
        j["stderr"] = row.std_error;
        j["approx_total"] = row.approx_total;
        j["term_interior"] = row.term_interior;
        j["term_left"] = row.term_left;
        j["term_right"] = row.term_right;
        j["ratio"] = detail::num_or_null(row.ratio);
        arr.push_back(j);
    }
    return arr;
}

inline void write_json(std::ostream& os, const nlohmann::json& j)
{
    os << j.dump(2) << '\n';
}

inline void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows)
{
    os << "b,method,p_hat,stderr,approx_total,term_interior,term_left,term_right,ratio\n";
    for (const CompareRow& row : rows) {
        detail::csv_num(os, row.b) << ',' << row.method << ',';
        detail::csv_num(os, row.p_hat) << ',';
        detail::csv_num(os, row.std_error) << ',';
        detail::csv_num(os, row.approx_total) << ',';
        detail::csv_num(os, row.term_interior) << ',';
        detail::csv_num(os, row.term_left) << ',';
        detail::csv_num(os, row.term_right) << ',';
        detail::csv_num(os, row.ratio) << '\n';
    }
}

inline void write_histogram_csv(std::ostream& os, const LocationHistogram& h)
{
    os << "bin_lo,bin_hi,mass\n";
    for (std::size_t k = 0; k + 1 < h.bin_edges.size(); ++k) {
        detail::csv_num(os, h.bin_edges[k]) << ',';
        detail::csv_num(os, h.bin_edges[k + 1]) << ',';
        detail::csv_num(os, h.mass[k]) << '\n';
    }
}

inline void write_path_csv(std::ostream& os, const PathSample& path)
{
    os << "x,xi\n";
    for (std::size_t i = 0; i < path.grid.size(); ++i) {
        detail::csv_num(os, path.grid[i]) << ',';
        detail::csv_num(os, path.values[i]) << '\n';
    }
}

inline std::ofstream open_output(const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot open output file: " + path);
    return os;
}

} // namespace straintail

#endif
