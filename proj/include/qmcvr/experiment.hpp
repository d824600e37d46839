#pragma once

// Experiment files (flat JSON) and the CSV tables produced from them.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "qmcvr/pipeline.hpp"

namespace qmcvr {

struct Experiment {
    double s0 = 100.0;
    double r = 0.0;
    double sigma = 0.2;
    double maturity = 1.0;
    int d = 1;
    std::vector<Method> methods;
    std::vector<double> strikes;
    std::size_t n = 1024;
    std::vector<std::size_t> n_list;
    int m = 10;
    int m_grad = 128;
    std::uint64_t seed = 0;
    Target target = Target::Price;
    std::string output;
    Randomization randomization = Randomization::Scramble;
    double max_evaluations = 0x1.0p34;

    RunConfig run_config(Method method, double k, std::size_t points) const
    {
        RunConfig cfg;
        cfg.market.s0 = s0;
        cfg.market.k = k;
        cfg.market.r = r;
        cfg.market.sigma = sigma;
        try {
            cfg.market.grid = TimeGrid(d, maturity);
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        cfg.method = method;
        cfg.n = points;
        cfg.m = m;
        cfg.m_grad = m_grad;
        cfg.seed = seed;
        cfg.target = target;
        cfg.randomization = randomization;
        cfg.max_evaluations = max_evaluations;
        return cfg;
    }
};

namespace detail {

template <class T>
T json_get(const nlohmann::json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(fmt::format("config: missing or invalid '{}'", key));
    }
}

template <class T>
void json_optional(const nlohmann::json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        out = json_get<T>(j, key);
    }
}

} // namespace detail

/// Parses and validates an experiment document. Unknown keys are errors.
inline Experiment parse_experiment(const nlohmann::json& j)
{
    static const std::set<std::string> known{
        "s0",     "r",      "sigma", "maturity", "d",      "methods",       "strikes",
        "n",      "n_list", "m",     "m_grad",   "seed",   "target",        "output",
        "randomization",    "max_evaluations"};
    if (!j.is_object()) {
        throw ConfigError("config: top level must be a JSON object");
    }
    for (const auto& item : j.items()) {
        if (!known.contains(item.key())) {
            throw ConfigError(fmt::format("config: unknown key '{}'", item.key()));
        }
    }

    Experiment e;
    e.s0 = detail::json_get<double>(j, "s0");
    e.r = detail::json_get<double>(j, "r");
    e.sigma = detail::json_get<double>(j, "sigma");
    e.maturity = detail::json_get<double>(j, "maturity");
    e.d = detail::json_get<int>(j, "d");
    for (const auto& name : detail::json_get<std::vector<std::string>>(j, "methods")) {
        const auto method = parse_method(name);
        if (!method) {
            throw ConfigError(fmt::format("config: unknown method '{}'", name));
        }
        e.methods.push_back(*method);
    }
    if (e.methods.empty()) {
        throw ConfigError("no methods");
    }
    e.strikes = detail::json_get<std::vector<double>>(j, "strikes");
    if (e.strikes.empty()) {
        throw ConfigError("no strikes");
    }
    detail::json_optional(j, "n", e.n);
    detail::json_optional(j, "n_list", e.n_list);
    detail::json_optional(j, "m", e.m);
    detail::json_optional(j, "m_grad", e.m_grad);
    detail::json_optional(j, "seed", e.seed);
    detail::json_optional(j, "output", e.output);
    detail::json_optional(j, "max_evaluations", e.max_evaluations);
    if (j.contains("target")) {
        const auto t = detail::json_get<std::string>(j, "target");
        if (t == "price") {
            e.target = Target::Price;
        } else if (t == "delta") {
            e.target = Target::Delta;
        } else {
            throw ConfigError(fmt::format("config: target must be 'price' or 'delta', got '{}'", t));
        }
    }
    if (j.contains("randomization")) {
        const auto kind = detail::json_get<std::string>(j, "randomization");
        if (kind == "scramble") {
            e.randomization = Randomization::Scramble;
        } else if (kind == "shift") {
            e.randomization = Randomization::Shift;
        } else {
            throw ConfigError(
                fmt::format("config: randomization must be 'scramble' or 'shift', got '{}'", kind));
        }
    }

    // Validate every run the file can produce before any work starts.
    std::vector<std::size_t> sizes = e.n_list;
    sizes.push_back(e.n);
    for (double k : e.strikes) {
        for (std::size_t n : sizes) {
            e.run_config(e.methods.front(), k, n).validate();
        }
    }
    return e;
}

/// Reads a file; IoError if it cannot be opened, ConfigError if it is not
/// valid JSON or not a valid experiment.
inline Experiment load_experiment(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot read config '{}'", path));
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", path, err.what()));
    }
    return parse_experiment(j);
}

/// Called after each finished run, e.g. for progress output.
using Progress = std::function<void(const EstimateReport&)>;

inline std::string format_number(double x) { return fmt::format("{:.17g}", x); }

inline std::string format_vrf(const std::optional<double>& v)
{
    if (!v) {
        return "Failed";
    }
    if (std::isinf(*v)) {
        return "inf";
    }
    return fmt::format("{:.1e}", *v);
}

/// One report per (method, K) at n.
inline std::vector<EstimateReport> run_price_table(const Experiment& e, const ExecOptions& exec,
                                                   const Progress& progress = {})
{
    std::vector<EstimateReport> out;
    for (Method method : e.methods) {
        for (double k : e.strikes) {
            out.push_back(run_method(e.run_config(method, k, e.n), exec));
            if (progress) {
                progress(out.back());
            }
        }
    }
    return out;
}

inline std::string price_csv(const std::vector<EstimateReport>& rows)
{
    std::string s = "method,K,n,mean,stderr,reason\n";
    for (const auto& r : rows) {
        s += fmt::format("{},{},{},{},{},{}\n", method_name(r.method), format_number(r.k), r.n,
                         r.failed ? "" : format_number(*r.mean),
                         r.failed ? "" : format_number(*r.std_error), r.failure_text());
    }
    return s;
}

/// One report per (method, K, n in n_list).
inline std::vector<EstimateReport> run_sweep(const Experiment& e, const ExecOptions& exec,
                                             const Progress& progress = {})
{
    if (e.n_list.empty()) {
        throw ConfigError("sweep needs a non-empty n_list");
    }
    std::vector<EstimateReport> out;
    for (Method method : e.methods) {
        for (double k : e.strikes) {
            for (std::size_t n : e.n_list) {
                out.push_back(run_method(e.run_config(method, k, n), exec));
                if (progress) {
                    progress(out.back());
                }
            }
        }
    }
    return out;
}

inline std::string sweep_csv(const std::vector<EstimateReport>& rows)
{
    std::string s = "method,K,n,mean,stderr,log2n,log10stderr,reason\n";
    for (const auto& r : rows) {
        const std::string log10se =
            r.failed || !(*r.std_error > 0.0) ? "" : format_number(std::log10(*r.std_error));
        s += fmt::format("{},{},{},{},{},{},{},{}\n", method_name(r.method), format_number(r.k),
                         r.n, r.failed ? "" : format_number(*r.mean),
                         r.failed ? "" : format_number(*r.std_error),
                         format_number(std::log2(static_cast<double>(r.n))), log10se,
                         r.failure_text());
    }
    return s;
}

struct VrfRow {
    double k = 0.0;
    EstimateReport mc;
    std::vector<EstimateReport> methods; ///< in experiment order, vrf filled
};

/// Crude MC plus every listed method at each strike; VRFs against that MC.
inline std::vector<VrfRow> run_vrf_table(const Experiment& e, const ExecOptions& exec,
                                         const Progress& progress = {})
{
    std::vector<VrfRow> out;
    for (double k : e.strikes) {
        VrfRow row;
        row.k = k;
        row.mc = run_method(e.run_config(Method::MC, k, e.n), exec);
        if (progress) {
            progress(row.mc);
        }
        for (Method method : e.methods) {
            EstimateReport rep = method == Method::MC ? row.mc
                                                      : run_method(e.run_config(method, k, e.n), exec);
            rep.vrf = vrf(rep, row.mc);
            if (progress && method != Method::MC) {
                progress(rep);
            }
            row.methods.push_back(std::move(rep));
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline std::string vrf_csv(const Experiment& e, const std::vector<VrfRow>& rows)
{
    std::string s = "K";
    for (Method m : e.methods) {
        s += fmt::format(",{}", method_name(m));
    }
    s += "\n";
    for (const auto& row : rows) {
        s += format_number(row.k);
        for (const auto& rep : row.methods) {
            s += "," + format_vrf(rep.vrf);
        }
        s += "\n";
    }
    return s;
}

inline void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open '{}' for writing", path));
    }
    out << contents;
    out.flush();
    if (!out) {
        throw IoError(fmt::format("failed writing '{}'", path));
    }
}

} // namespace qmcvr
