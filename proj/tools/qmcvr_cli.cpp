// qmcvr: run pricing experiments from a JSON file and emit CSV tables.
//
//   qmcvr price     --config exp.json [--out table.csv] [--seed N] [--threads T]
//   qmcvr delta     ...   (price with target forced to delta)
//   qmcvr sweep     ...   (convergence data over n_list)
//   qmcvr vrf-table ...   (variance reduction factors against crude MC)
//
// Exit codes: 0 success, 2 config error, 3 I/O error.

#include <cstdio>
#include <optional>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "qmcvr/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

void add_common(CLI::App* cmd, Options& opt)
{
    cmd->add_option("--config", opt.config, "experiment JSON file")->required();
    cmd->add_option("--out", opt.out, "CSV output path (overrides the config's output)");
    cmd->add_option("--seed", opt.seed, "seed override");
    cmd->add_option("--threads", opt.threads, "worker threads (default: all cores)")
        ->check(CLI::NonNegativeNumber);
}

void report_progress(const qmcvr::EstimateReport& r)
{
    if (r.failed) {
        fmt::print(stderr, "  {:<15} K={:<8g} n={:<8} failed ({})\n", qmcvr::method_name(r.method),
                   r.k, r.n, r.failure_text());
    } else {
        fmt::print(stderr, "  {:<15} K={:<8g} n={:<8} mean={:.10g} stderr={:.3e}\n",
                   qmcvr::method_name(r.method), r.k, r.n, *r.mean, *r.std_error);
    }
}

int run(const std::string& command, const Options& opt)
{
    qmcvr::Experiment exp = qmcvr::load_experiment(opt.config);
    if (command == "delta") {
        exp.target = qmcvr::Target::Delta;
    }
    if (opt.seed) {
        exp.seed = *opt.seed;
    }
    const std::string path = opt.out.empty() ? exp.output : opt.out;
    qmcvr::ExecOptions exec;
    exec.threads = opt.threads > 0 ? opt.threads
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    std::string csv;
    if (command == "price" || command == "delta") {
        csv = qmcvr::price_csv(qmcvr::run_price_table(exp, exec, report_progress));
    } else if (command == "sweep") {
        const auto rows = qmcvr::run_sweep(exp, exec, report_progress);
        csv = qmcvr::sweep_csv(rows);
        for (qmcvr::Method m : exp.methods) {
            for (double k : exp.strikes) {
                std::vector<qmcvr::EstimateReport> cells;
                for (const auto& r : rows) {
                    if (r.method == m && r.k == k) {
                        cells.push_back(r);
                    }
                }
                fmt::print(stderr, "slope {:<15} K={:g}: {:.3f}\n", qmcvr::method_name(m), k,
                           qmcvr::loglog_slope(cells));
            }
        }
    } else {
        csv = qmcvr::vrf_csv(exp, qmcvr::run_vrf_table(exp, exec, report_progress));
    }

    if (path.empty()) {
        fmt::print("{}", csv);
    } else {
        qmcvr::write_file(path, csv);
        fmt::print(stderr, "wrote {}\n", path);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quasi-Monte Carlo variance reduction experiments for Asian options"};
    app.require_subcommand(1);
    Options opt;
    for (const char* name : {"price", "delta", "sweep", "vrf-table"}) {
        add_common(app.add_subcommand(name), opt);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), opt);
    } catch (const qmcvr::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kExitConfig;
    } catch (const qmcvr::IoError& e) {
        fmt::print(stderr, "I/O error: {}\n", e.what());
        return kExitIo;
    }
}
