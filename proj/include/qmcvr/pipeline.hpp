#pragma once

// The nine estimators, randomized replications, standard errors and
// variance reduction factors.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qmcvr/actsub.hpp"
#include "qmcvr/brownian.hpp"
#include "qmcvr/errors.hpp"
#include "qmcvr/impsamp.hpp"
#include "qmcvr/model.hpp"
#include "qmcvr/preint.hpp"
#include "qmcvr/sampling.hpp"

namespace qmcvr {

enum class Method {
    MC,
    RQMC,
    PREINT,
    IS,
    AS,
    PREINT_GPCA,
    PREINT_IS_GPCA,
    AS_PREINT,
    IS_AS_PREINT,
};

inline constexpr std::array<Method, 9> kAllMethods{
    Method::MC,          Method::RQMC,           Method::PREINT,
    Method::IS,          Method::AS,             Method::PREINT_GPCA,
    Method::PREINT_IS_GPCA, Method::AS_PREINT,   Method::IS_AS_PREINT,
};

inline std::string_view method_name(Method m)
{
    switch (m) {
    case Method::MC: return "MC";
    case Method::RQMC: return "RQMC";
    case Method::PREINT: return "PREINT";
    case Method::IS: return "IS";
    case Method::AS: return "AS";
    case Method::PREINT_GPCA: return "PREINT_GPCA";
    case Method::PREINT_IS_GPCA: return "PREINT_IS_GPCA";
    case Method::AS_PREINT: return "AS_PREINT";
    case Method::IS_AS_PREINT: return "IS_AS_PREINT";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view name)
{
    for (Method m : kAllMethods) {
        if (method_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

inline std::string_view target_name(Target t) { return t == Target::Price ? "price" : "delta"; }

struct RunConfig {
    MarketParams market;
    Method method = Method::RQMC;
    std::size_t n = 1024; ///< points per replication, a power of two
    int m = 10;           ///< replications
    int m_grad = 128;     ///< Gaussian samples for gradient information matrices
    std::uint64_t seed = 0;
    Target target = Target::Price;
    double max_evaluations = 0x1.0p34; ///< bound on n * m
    Randomization randomization = Randomization::Scramble;

    void validate() const
    {
        try {
            market.validate();
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        if (n == 0 || (n & (n - 1)) != 0) {
            throw ConfigError("n must be a power of two");
        }
        if (m < 2) {
            throw ConfigError("m must be at least 2 to estimate a standard error");
        }
        if (m_grad < 1) {
            throw ConfigError("m_grad must be positive");
        }
        if (static_cast<double>(n) * m > max_evaluations) {
            throw ConfigError("n * m exceeds the evaluation budget");
        }
        if (market.d() > static_cast<int>(kMaxSobolDimension)) {
            throw ConfigError("d exceeds the supported Sobol dimension");
        }
    }
};

struct ExecOptions {
    int threads = 1;
};

struct EstimateReport {
    Method method = Method::RQMC;
    Target target = Target::Price;
    double k = 0.0;
    std::size_t n = 0;
    int m = 0;
    std::optional<double> mean;      ///< discounted for prices
    std::optional<double> std_error; ///< sd of replication means / sqrt(m)
    std::optional<double> vrf;
    bool failed = false;
    std::string stage;
    std::string reason;
    std::vector<double> replication_means; ///< undiscounted

    std::string failure_text() const { return failed ? stage + ": " + reason : std::string(); }
};

namespace detail {

struct Failure {
    std::string stage;
    std::string reason;
};

// Raised inside a replication to attach the stage name to a library error.
template <class F>
auto at_stage(const char* stage, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const MethodFailed& e) {
        throw Failure{stage, e.what()};
    } catch (const DriftFailure& e) {
        throw Failure{stage, e.what()};
    } catch (const DriftInconsistency& e) {
        throw Failure{stage, e.what()};
    } catch (const DomainExit& e) {
        throw Failure{stage, e.what()};
    } catch (const SeparabilityViolation& e) {
        throw Failure{stage, e.what()};
    } catch (const LaplaceDegenerate& e) {
        throw Failure{stage, e.what()};
    } catch (const InternalConsistency& e) {
        throw Failure{stage, e.what()};
    } catch (const NumericalError& e) {
        throw Failure{stage, e.what()};
    }
}

struct Prepared {
    Integrand f;
    std::size_t dim = 0;
};

// Everything that does not depend on the replication: generator, payoffs
// and the drifts.
class Plan {
public:
    explicit Plan(const RunConfig& cfg)
        : cfg_(cfg),
          gen_(gen_std(cfg.market.grid)),
          price_(payoff_integrand(cfg.market, gen_)),
          target_(cfg.target == Target::Price ? price_ : delta_integrand(cfg.market, gen_))
    {
        const Method m = cfg.method;
        const int d = cfg.market.d();
        if (m == Method::IS || m == Method::IS_AS_PREINT) {
            mu_ = at_stage("drift", [&] { return solve_optimal_drift_asian(cfg.market).mu; });
        }
        if (m == Method::PREINT || m == Method::PREINT_GPCA || m == Method::PREINT_IS_GPCA) {
            plain_ = at_stage("preintegration", [&] { return build_separable(cfg.market, gen_); });
        }
        if (m == Method::PREINT_IS_GPCA && d > 1) {
            // Start from the tail of the full-payoff drift, which is close to
            // the drift of the preintegrated function.
            const Vector full =
                at_stage("drift", [&] { return solve_optimal_drift_asian(cfg.market).mu; });
            const Integrand gp = preint_integrand(plain_, Target::Price);
            mu_ = at_stage("drift", [&] { return solve_drift_generic(gp, full.tail(d - 1)).mu; });
        }
    }

    Prepared prepare(RandomizationSeed key) const
    {
        const int d = cfg_.market.d();
        const auto aux = [&](std::size_t dim) {
            return gaussian_rqmc_points(dim, static_cast<std::size_t>(cfg_.m_grad), key,
                                        Stream::GradientShift, cfg_.randomization);
        };
        switch (cfg_.method) {
        case Method::MC:
        case Method::RQMC:
            return {target_, static_cast<std::size_t>(d)};
        case Method::PREINT:
            return {preint_integrand(plain_, cfg_.target), static_cast<std::size_t>(d - 1)};
        case Method::IS:
            return {shift_integrand(target_, mu_), static_cast<std::size_t>(d)};
        case Method::AS: {
            const auto as = at_stage("active_subspace", [&] {
                return active_subspace(estimate_c(price_, aux(d)), gen_.r, SignRule::Free);
            });
            return {rotate_integrand(target_, as), static_cast<std::size_t>(d)};
        }
        case Method::AS_PREINT:
        case Method::IS_AS_PREINT: {
            const bool shifted = cfg_.method == Method::IS_AS_PREINT;
            const Integrand g = shifted ? shift_integrand(price_, mu_) : price_;
            const auto as = at_stage("active_subspace", [&] {
                return active_subspace(estimate_c(g, aux(d)), gen_.r, SignRule::Separable);
            });
            const auto data = at_stage("preintegration", [&] {
                return build_separable(cfg_.market, gen_, as.q, shifted ? mu_ : Vector());
            });
            return {preint_integrand(data, cfg_.target), static_cast<std::size_t>(d - 1)};
        }
        case Method::PREINT_GPCA:
        case Method::PREINT_IS_GPCA: {
            const bool shifted = cfg_.method == Method::PREINT_IS_GPCA;
            const auto dim = static_cast<std::size_t>(d - 1);
            Integrand gp = preint_integrand(plain_, Target::Price);
            Integrand ft = preint_integrand(plain_, cfg_.target);
            if (dim == 0) {
                return {ft, dim};
            }
            if (shifted) {
                gp = shift_integrand(gp, mu_);
                ft = shift_integrand(ft, mu_);
            }
            const auto as = at_stage("active_subspace", [&] {
                return active_subspace(estimate_c(gp, aux(dim)), Matrix::Identity(d - 1, d - 1),
                                       SignRule::Free);
            });
            return {rotate_integrand(ft, as), dim};
        }
        }
        throw InternalConsistency("unknown method");
    }

private:
    RunConfig cfg_;
    PathGenerator gen_;
    Integrand price_;
    Integrand target_;
    Vector mu_;
    SeparableData plain_;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double replication_mean(const RunConfig& cfg, const Plan& plan, std::uint64_t rep)
{
    const RandomizationSeed key{cfg.seed, rep};
    const Prepared prep = plan.prepare(key);
    if (prep.dim == 0) {
        return at_stage("evaluation", [&] { return prep.f({}); });
    }
    std::vector<double> z(prep.dim);
    CompensatedSum sum;
    return at_stage("evaluation", [&] {
        if (cfg.method == Method::MC) {
            GaussianMcStream stream(prep.dim, key);
            for (std::size_t i = 0; i < cfg.n; ++i) {
                stream.next(z);
                sum.add(prep.f(z));
            }
        } else {
            GaussianRqmcStream stream(prep.dim, key, Stream::Shift, cfg.randomization);
            for (std::size_t i = 0; i < cfg.n; ++i) {
                stream.next(z);
                sum.add(prep.f(z));
            }
        }
        return sum.value() / static_cast<double>(cfg.n);
    });
}

} // namespace detail

/// Runs m independent randomized replications of one estimator. Estimator
/// failures are reported, not thrown; configuration errors throw
/// ConfigError. Results do not depend on the number of threads.
inline EstimateReport run_method(const RunConfig& cfg, const ExecOptions& exec = {})
{
    cfg.validate();
    EstimateReport report;
    report.method = cfg.method;
    report.target = cfg.target;
    report.k = cfg.market.k;
    report.n = cfg.n;
    report.m = cfg.m;

    std::optional<detail::Plan> plan;
    try {
        plan.emplace(cfg);
    } catch (const detail::Failure& f) {
        report.failed = true;
        report.stage = f.stage;
        report.reason = f.reason;
        return report;
    }

    const auto m = static_cast<std::size_t>(cfg.m);
    std::vector<double> means(m, 0.0);
    std::vector<std::optional<detail::Failure>> failures(m);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t rep = next++; rep < m; rep = next++) {
            try {
                means[rep] = detail::replication_mean(cfg, *plan, rep);
            } catch (const detail::Failure& f) {
                failures[rep] = f;
            } catch (const Error& e) {
                failures[rep] = detail::Failure{"internal", e.what()};
            }
        }
    };
    const int threads = std::clamp(exec.threads, 1, cfg.m);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    for (const auto& f : failures) {
        if (f) {
            report.failed = true;
            report.stage = f->stage;
            report.reason = f->reason;
            return report;
        }
    }

    detail::CompensatedSum total;
    for (double v : means) {
        total.add(v);
    }
    const double mean = total.value() / static_cast<double>(m);
    detail::CompensatedSum squares;
    for (double v : means) {
        squares.add((v - mean) * (v - mean));
    }
    const double sd = std::sqrt(squares.value() / static_cast<double>(m - 1));
    const double scale = cfg.target == Target::Price ? cfg.market.discount() : 1.0;
    report.mean = scale * mean;
    report.std_error = scale * sd / std::sqrt(static_cast<double>(m));
    report.replication_means = std::move(means);
    return report;
}

/// Ratio of per-replication estimator variances, crude MC over the method,
/// at the same n. Empty if either report failed; infinite if the method
/// has zero variance.
inline std::optional<double> vrf(const EstimateReport& method, const EstimateReport& mc)
{
    if (method.failed || mc.failed) {
        return std::nullopt;
    }
    if (method.n != mc.n || method.target != mc.target) {
        throw DomainError("vrf: reports differ in n or target");
    }
    const double v_mc = *mc.std_error * *mc.std_error * mc.m;
    const double v = *method.std_error * *method.std_error * method.m;
    if (v == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return v_mc / v;
}

/// One report per n in n_list for the method of the template config.
inline std::vector<EstimateReport> convergence_sweep(RunConfig cfg,
                                                     std::span<const std::size_t> n_list,
                                                     const ExecOptions& exec = {})
{
    std::vector<EstimateReport> out;
    out.reserve(n_list.size());
    for (std::size_t n : n_list) {
        cfg.n = n;
        out.push_back(run_method(cfg, exec));
    }
    return out;
}

/// Least-squares slope of log stderr against log n over the largest five
/// succeeding n values. NaN with fewer than two usable cells.
inline double loglog_slope(const std::vector<EstimateReport>& cells)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& c : cells) {
        if (!c.failed && *c.std_error > 0.0) {
            pts.emplace_back(std::log(static_cast<double>(c.n)), std::log(*c.std_error));
        }
    }
    std::sort(pts.begin(), pts.end());
    if (pts.size() > 5) {
        pts.erase(pts.begin(), pts.end() - 5);
    }
    if (pts.size() < 2) {
        return std::nan("");
    }
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [x, y] : pts) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxy / sxx;
}

} // namespace qmcvr
