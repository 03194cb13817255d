#ifndef STRAINTAIL_CONFIG_HPP
#define STRAINTAIL_CONFIG_HPP

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "straintail/errors.hpp"
#include "straintail/forcing.hpp"
#include "straintail/kernel.hpp"
#include "straintail/problem.hpp"

namespace straintail {

/// Flat key = value file: one pair per line, dotted keys allowed,
/// '#' starts a comment, blank lines ignored.
class FlatConfig {
public:
    static FlatConfig parse(std::istream& is)
    {
        FlatConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty())
                continue;
            const std::size_t eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError("config: duplicate key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static FlatConfig parse_file(const std::string& path)
    {
        std::ifstream is(path);
        if (!is)
            throw ConfigError("cannot open config file: " + path);
        return parse(is);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key)
    {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("config: missing required key '" + key + "'");
        consumed_.insert(key);
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback)
    {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key)
    {
        return parse_double(key, get_string(key));
    }

    double get_double(const std::string& key, double fallback)
    {
        return has(key) ? get_double(key) : fallback;
    }

    std::optional<double> get_optional_double(const std::string& key)
    {
        if (!has(key))
            return std::nullopt;
        return get_double(key);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback)
    {
        if (!has(key))
            return fallback;
        const std::string s = get_string(key);
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(s, &pos);
            if (pos != s.size())
                throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' is not a non-negative integer: " + s);
        }
    }

    int get_int(const std::string& key, int fallback)
    {
        if (!has(key))
            return fallback;
        const std::string s = get_string(key);
        try {
            std::size_t pos = 0;
            const int v = std::stoi(s, &pos);
            if (pos != s.size())
                throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' is not an integer: " + s);
        }
    }

    bool get_bool(const std::string& key, bool fallback)
    {
        if (!has(key))
            return fallback;
        const std::string s = get_string(key);
        if (s == "true" || s == "1" || s == "yes")
            return true;
        if (s == "false" || s == "0" || s == "no")
            return false;
        throw ConfigError("config: key '" + key + "' is not a boolean: " + s);
    }

    std::vector<double> get_double_list(const std::string& key)
    {
        const std::string s = get_string(key);
        std::vector<double> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (t.empty())
                throw ConfigError("config: key '" + key + "' has an empty list entry");
            out.push_back(parse_double(key, t));
        }
        if (out.empty())
            throw ConfigError("config: key '" + key + "' is an empty list");
        return out;
    }

    /// Reject typos: every key present must have been read by the loader.
    void fail_on_unused() const
    {
        std::vector<std::string> unused;
        for (const auto& kv : values_)
            if (!consumed_.count(kv.first))
                unused.push_back(kv.first);
        if (!unused.empty()) {
            std::string msg = "config: unknown key(s):";
            for (const std::string& k : unused)
                msg += " '" + k + "'";
            throw ConfigError(msg);
        }
    }

private:
    static std::string trim(const std::string& s)
    {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
            ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
            --b;
        return s.substr(a, b - a);
    }

    static double parse_double(const std::string& key, const std::string& s)
    {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size())
                throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' is not a number: " + s);
        }
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

/// Everything a run needs, assembled from a config file.
struct RunConfig {
    ProblemSpec spec;
    std::optional<double> x_star;     // optional interior-maximizer hint
    std::vector<double> b_list;       // levels; may be empty for kernel-info
    std::uint64_t n = 10000;
    int grid_n = 512;
    std::uint64_t seed = 12345;
    std::string method = "tilted";    // direct | tilted
    std::optional<double> zeta;       // tilt override
    std::optional<double> rho;        // locality radius override
    int nbins = 64;
    bool homo_literal_theorem = false;
};

inline RunConfig load_run_config(const std::string& path)
{
    FlatConfig cfg = FlatConfig::parse_file(path);
    RunConfig rc;

    const std::string family = cfg.get_string("kernel.family");
    if (family == "custom-analytic")
        throw ConfigError("kernel.family=custom-analytic needs analytic callables and "
                          "cannot be built from a config file; use the library API");
    if (family != "squared-exponential")
        throw ConfigError("kernel.family must be 'squared-exponential', got '" + family + "'");
    const double ell = cfg.get_double("kernel.length_scale");
    if (!(ell > 0.0))
        throw ConfigError("kernel.length_scale must be positive");
    rc.spec.kernel = make_se_kernel(ell);

    rc.spec.L = cfg.get_double("L", 1.0);
    rc.spec.sigma = cfg.get_double("sigma");

    const std::string kind = cfg.get_string("forcing.kind");
    if (kind == "constant") {
        rc.spec.forcing = make_constant_forcing(cfg.get_double("forcing.p0"));
    } else if (kind == "gaussian-bump") {
        rc.spec.forcing = make_gaussian_bump_forcing(cfg.get_double("forcing.offset"),
                                                     cfg.get_double("forcing.amp"),
                                                     cfg.get_double("forcing.center"),
                                                     cfg.get_double("forcing.width"));
    } else if (kind == "cosine-bump") {
        rc.spec.forcing = make_cosine_bump_forcing(cfg.get_double("forcing.offset"),
                                                   cfg.get_double("forcing.amp"),
                                                   cfg.get_double("forcing.center"),
                                                   cfg.get_double("forcing.period"));
    } else {
        throw ConfigError("forcing.kind must be constant, gaussian-bump or cosine-bump, got '" +
                          kind + "'");
    }

    rc.x_star = cfg.get_optional_double("x_star");
    if (cfg.has("b_list"))
        rc.b_list = cfg.get_double_list("b_list");
    else if (cfg.has("b"))
        rc.b_list = {cfg.get_double("b")};
    if (cfg.has("b_list") && cfg.has("b"))
        throw ConfigError("config: give either 'b' or 'b_list', not both");

    rc.n = cfg.get_u64("n", rc.n);
    rc.grid_n = cfg.get_int("grid_n", rc.grid_n);
    if (rc.grid_n < 2)
        throw ConfigError("grid_n must be at least 2");
    rc.seed = cfg.get_u64("seed", rc.seed);
    rc.method = cfg.get_string("method", rc.method);
    if (rc.method != "direct" && rc.method != "tilted")
        throw ConfigError("method must be 'direct' or 'tilted', got '" + rc.method + "'");
    rc.zeta = cfg.get_optional_double("zeta");
    rc.rho = cfg.get_optional_double("rho");
    rc.nbins = cfg.get_int("nbins", rc.nbins);
    if (rc.nbins < 1)
        throw ConfigError("nbins must be at least 1");
    rc.homo_literal_theorem = cfg.get_bool("homo_literal_theorem", false);

    cfg.fail_on_unused();
    validate(rc.spec);
    for (double b : rc.b_list)
        if (!(b > 0.0))
            throw ConfigError("levels b must be positive");
    return rc;
}

} // namespace straintail

#endif
