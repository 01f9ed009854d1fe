// irsv: single trials, NMSE sweeps and MODE convergence traces from the command line.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "irsv/error.hpp"
#include "irsv/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitTotalFailure = 3;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::vector<std::string> methods;
    std::string out;
    std::optional<int> p_stack;
    bool no_noise = false;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--trials", f.trials, "Monte-Carlo trials per point")->check(CLI::PositiveNumber);
    cmd->add_option("--method", f.methods, "mode | music | esprit | no-irs (comma list for sweeps)")
        ->delimiter(',');
    cmd->add_option("--out", f.out, "output path (stdout when omitted)");
    cmd->add_option("--p-stack", f.p_stack, "stacking dimension P");
    cmd->add_flag("--no-noise", f.no_noise, "disable receiver noise");
    cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
}

irsv::ExperimentConfig build_config(const CommonFlags& f) {
    irsv::ExperimentConfig cfg = f.config.empty() ? irsv::ExperimentConfig{} : irsv::load_config(f.config);
    if (f.seed) cfg.base_seed = *f.seed;
    if (f.trials) cfg.n_trials = *f.trials;
    if (f.p_stack) cfg.system.stack_dim = *f.p_stack;
    if (f.no_noise) cfg.system.noise_enabled = false;
    if (f.methods.size() == 1) cfg.method = irsv::parse_method(f.methods.front());
    cfg.validate();
    return cfg;
}

std::vector<irsv::Method> methods_or(const CommonFlags& f, std::vector<irsv::Method> fallback) {
    if (f.methods.empty()) return fallback;
    std::vector<irsv::Method> out;
    for (const auto& m : f.methods) out.push_back(irsv::parse_method(m));
    return out;
}

std::vector<double> axis_values(const irsv::ExperimentConfig& cfg, irsv::SweepAxis axis,
                                const std::vector<double>& flag, std::vector<double> fallback) {
    if (!flag.empty()) return flag;
    if (cfg.sweep_axis == axis && !cfg.sweep_values.empty()) return cfg.sweep_values;
    return fallback;
}

// Writes to --out, then the config's output path, then stdout.
template <typename Writer>
void emit(const CommonFlags& f, const irsv::ExperimentConfig& cfg, Writer&& write) {
    std::string path = f.out;
    if (path.empty() && cfg.output) path = cfg.output->string();
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw irsv::ConfigError("cannot open output file " + path);
    write(os);
}

int sweep_exit_code(const std::vector<irsv::SweepRow>& rows) {
    for (const auto& r : rows) {
        if (r.n_success == 0) {
            std::cerr << "irsv: every trial failed at axis value " << r.axis_value << " ("
                      << irsv::to_string(r.method) << ")\n";
            return kExitTotalFailure;
        }
        if (r.n_fail > 0) {
            std::cerr << "irsv: " << r.n_fail << " failed trial(s) excluded at axis value "
                      << r.axis_value << " (" << irsv::to_string(r.method) << ")\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IRS-aided true-velocity estimation: simulator and Monte-Carlo harness"};
    app.require_subcommand(1);

    CommonFlags trial_f, snr_f, speed_f, conv_f;
    std::uint64_t trial_index = 0;
    std::vector<double> snr_values, speed_values;
    int iterations = 20;

    auto* trial = app.add_subcommand("trial", "run one trial and print its record as JSON");
    add_common(trial, trial_f);
    trial->add_option("--index", trial_index, "trial index within the seed's stream");

    auto* sweep_snr = app.add_subcommand("sweep-snr", "NMSE versus SNR");
    add_common(sweep_snr, snr_f);
    sweep_snr->add_option("--values", snr_values, "SNR points in dB")->delimiter(',');

    auto* sweep_speed = app.add_subcommand("sweep-speed", "NMSE versus target speed");
    add_common(sweep_speed, speed_f);
    sweep_speed->add_option("--values", speed_values, "speeds in m/s")->delimiter(',');

    auto* conv = app.add_subcommand("convergence", "per-iteration MODE discrepancy quantiles");
    add_common(conv, conv_f);
    conv->add_option("--iterations", iterations, "MODE updates per trial")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*trial) {
            const auto cfg = build_config(trial_f);
            const auto rec = irsv::run_trial(cfg, trial_index);
            emit(trial_f, cfg, [&](std::ostream& os) { os << irsv::trial_to_json(rec).dump(2) << '\n'; });
            return rec.failed ? kExitTotalFailure : 0;
        }
        if (*sweep_snr) {
            const auto cfg = build_config(snr_f);
            const auto values = axis_values(cfg, irsv::SweepAxis::kSnr, snr_values, {-10, -5, 0, 5, 10});
            const auto methods = methods_or(
                snr_f, {irsv::Method::kMode, irsv::Method::kMusic, irsv::Method::kEsprit});
            const auto rows = irsv::sweep(cfg, irsv::SweepAxis::kSnr, values, methods, snr_f.workers);
            emit(snr_f, cfg, [&](std::ostream& os) { irsv::write_sweep_csv(os, rows); });
            return sweep_exit_code(rows);
        }
        if (*sweep_speed) {
            const auto cfg = build_config(speed_f);
            const auto values =
                axis_values(cfg, irsv::SweepAxis::kSpeed, speed_values, {10, 20, 30, 40, 50});
            const auto methods = methods_or(speed_f, {irsv::Method::kMode, irsv::Method::kNoIrs});
            const auto rows =
                irsv::sweep(cfg, irsv::SweepAxis::kSpeed, values, methods, speed_f.workers);
            emit(speed_f, cfg, [&](std::ostream& os) { irsv::write_sweep_csv(os, rows); });
            return sweep_exit_code(rows);
        }
        if (*conv) {
            const auto cfg = build_config(conv_f);
            const auto rows = irsv::convergence(cfg, iterations, conv_f.workers);
            if (rows.empty()) {
                std::cerr << "irsv: no MODE iteration completed\n";
                return kExitTotalFailure;
            }
            emit(conv_f, cfg, [&](std::ostream& os) { irsv::write_convergence_csv(os, rows); });
            return 0;
        }
    } catch (const irsv::ConfigError& e) {
        std::cerr << "irsv: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const irsv::GeometryError& e) {
        std::cerr << "irsv: geometry error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const irsv::Error& e) {
        std::cerr << "irsv: " << e.what() << '\n';
        return kExitTotalFailure;
    }
    return 0;
}
