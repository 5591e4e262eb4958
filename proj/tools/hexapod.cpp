// Command-line front end: run a scenario, validate configs, sweep one parameter.
//
// Exit codes: 0 success, 1 task failed, 2 config error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hexapod/errors.hpp"
#include "hexapod/harness/runner.hpp"
#include "hexapod/harness/scenario.hpp"
#include "hexapod/harness/trace_log.hpp"

namespace {

using namespace hexapod;
using namespace hexapod::harness;

constexpr int kOk = 0;
constexpr int kTaskFailed = 1;
constexpr int kConfigError = 2;

void print_summary(const RunSummary& s) {
    std::printf("%s [%s] seed=%llu ticks=%ld completed=%s%s\n", s.scenario.c_str(), s.mode.c_str(),
                static_cast<unsigned long long>(s.seed), s.ticks, s.completed ? "yes" : "no",
                s.aborted ? (" aborted: " + s.abort_reason).c_str() : "");
    std::printf("  max roll %.3f deg, max pitch %.3f deg, attitude deviation %.3f deg\n", s.max_roll_deg,
                s.max_pitch_deg, s.max_attitude_deviation_deg);
    std::printf("  hang %d, overstep %d, extend-down %d, hold ticks %d, final x %.1f mm\n", s.total_hangs(),
                s.total_oversteps(), s.total_extends(), s.hold_ticks, s.final_x);
    if (s.compensation.solves > 0) {
        std::printf("  compensation: %d solves, %d converged, iterations %d/%d/%d (min/median/max)\n",
                    s.compensation.solves, s.compensation.converged, s.compensation.iterations_min,
                    s.compensation.iterations_median, s.compensation.iterations_max);
    }
}

int cmd_run(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed) {
    Scenario s = load_scenario(path);
    if (seed) s.seed = *seed;
    const RunResult r = run_scenario(s);
    write_log(r, out);
    print_summary(r.summary);
    return r.summary.completed ? kOk : kTaskFailed;
}

int cmd_validate(const std::vector<std::string>& paths) {
    int code = kOk;
    for (const std::string& p : paths) {
        try {
            const Scenario s = load_scenario(p);
            std::printf("%s: ok (%s, %s, %ld ticks)\n", p.c_str(), to_string(s.mode).c_str(), s.gait.name.c_str(),
                        s.tick_count());
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.rfind(p, 0) == 0) {
                std::fprintf(stderr, "%s\n", what.c_str());
            } else {
                std::fprintf(stderr, "%s: %s\n", p.c_str(), what.c_str());
            }
            code = kConfigError;
        }
    }
    return code;
}

int cmd_sweep(const std::string& path, const std::string& key, double from, double to, int steps,
              const std::string& out, std::optional<std::uint64_t> seed, unsigned jobs) {
    if (steps < 1) throw ConfigError("--steps must be at least 1", "--steps");
    std::vector<double> values;
    for (int i = 0; i < steps; ++i) {
        values.push_back(steps == 1 ? from : from + (to - from) * i / (steps - 1));
    }
    // Fail fast on a bad key or value before spawning workers.
    std::vector<Scenario> scenarios;
    for (double v : values) {
        scenarios.push_back(with_parameter(path, key, v));
        if (seed) scenarios.back().seed = *seed;
    }

    std::vector<std::optional<RunSummary>> results(values.size());
    std::vector<std::string> errors(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            try {
                const RunResult r = run_scenario(scenarios[i]);
                if (!out.empty()) {
                    char dir[128];
                    std::snprintf(dir, sizeof dir, "%03zu_%g", i, values[i]);
                    write_log(r, std::filesystem::path(out) / dir);
                }
                results[i] = r.summary;
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(values.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    int code = kOk;
    std::printf("%-14s %-9s %6s %9s %10s %10s\n", key.c_str(), "completed", "hang", "overstep", "roll_deg",
                "pitch_deg");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!results[i]) {
            std::printf("%-14g error: %s\n", values[i], errors[i].c_str());
            code = kTaskFailed;
            continue;
        }
        const RunSummary& s = *results[i];
        std::printf("%-14g %-9s %6d %9d %10.3f %10.3f\n", values[i], s.completed ? "yes" : "no", s.total_hangs(),
                    s.total_oversteps(), s.max_roll_deg, s.max_pitch_deg);
        if (!s.completed) code = kTaskFailed;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hexapod control stack simulator"};
    app.require_subcommand(1);

    std::string run_path;
    std::string run_out = "out";
    std::optional<std::uint64_t> run_seed;
    CLI::App* run = app.add_subcommand("run", "Run a scenario and write logs");
    run->add_option("scenario", run_path, "Scenario config file")->required();
    run->add_option("--out", run_out, "Output directory")->capture_default_str();
    run->add_option("--seed", run_seed, "Override the scenario seed");

    std::vector<std::string> validate_paths;
    CLI::App* validate = app.add_subcommand("validate", "Check scenario configs without running them");
    validate->add_option("scenario", validate_paths, "Scenario config files")->required();

    std::string sweep_path;
    std::string sweep_key;
    double sweep_from = 0.0;
    double sweep_to = 0.0;
    int sweep_steps = 5;
    std::string sweep_out;
    std::optional<std::uint64_t> sweep_seed;
    unsigned sweep_jobs = std::max(1u, std::thread::hardware_concurrency());
    CLI::App* sweep = app.add_subcommand("sweep", "Run a scenario over a range of one scalar setting");
    sweep->add_option("scenario", sweep_path, "Scenario config file")->required();
    sweep->add_option("--param", sweep_key, "Setting to vary, e.g. scenario.noise_sigma")->required();
    sweep->add_option("--from", sweep_from, "First value")->required();
    sweep->add_option("--to", sweep_to, "Last value")->required();
    sweep->add_option("--steps", sweep_steps, "Number of values")->capture_default_str();
    sweep->add_option("--out", sweep_out, "Write each run's logs under this directory");
    sweep->add_option("--seed", sweep_seed, "Override the scenario seed");
    sweep->add_option("--jobs", sweep_jobs, "Parallel runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(run_path, run_out, run_seed);
        if (*validate) return cmd_validate(validate_paths);
        if (*sweep) {
            return cmd_sweep(sweep_path, sweep_key, sweep_from, sweep_to, sweep_steps, sweep_out, sweep_seed,
                             sweep_jobs);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kTaskFailed;
    }
    return kOk;
}
