#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "irsv/geometry.hpp"
#include "irsv/mode.hpp"
#include "irsv/signal_model.hpp"

namespace irsv {

enum class Method { kMode, kMusic, kEsprit, kNoIrs };

std::string_view to_string(Method m);
/// Accepts mode | music | root-music | esprit | no-irs. Throws ConfigError otherwise.
Method parse_method(std::string_view name);

enum class SweepAxis { kNone, kSnr, kSpeed };

struct ExperimentConfig {
    SystemParams system;
    SceneGeometry scene = scene_from_angles({0.0, 0.0}, {20.0, 0.0}, deg2rad(30.0), deg2rad(120.0));
    VelocityVector velocity{40.0, deg2rad(60.0)};
    Method method = Method::kMode;
    SweepAxis sweep_axis = SweepAxis::kNone;
    std::vector<double> sweep_values;
    int n_trials = 1000;
    std::uint64_t base_seed = 1;
    ModeOptions mode;
    int coarse_oversample = 4;
    std::optional<std::filesystem::path> output;

    void validate() const;
};

/// JSON config; angles in degrees, unknown keys rejected. Missing keys keep the defaults above.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Independent stream per trial, a pure function of (base_seed, trial_index).
Rng trial_rng(std::uint64_t base_seed, std::uint64_t trial_index);

struct TrialRecord {
    std::uint64_t base_seed = 0;
    std::uint64_t trial_index = 0;
    Method method = Method::kMode;
    DopplerPair true_doppler;
    VelocityVector true_velocity;
    double coarse_mu = 0.0;
    DopplerPair refined;
    VelocityVector estimate;
    std::vector<double> discrepancy;
    std::vector<double> coeff_norm;
    bool converged = false;
    bool failed = false;
    std::string failure;
    double sq_error = 0.0;  // ||v - v_hat||^2 / ||v||^2
};

/// Normalized squared error between two velocity vectors.
double normalized_sq_error(const VelocityVector& truth, const VelocityVector& estimate);

/// One full two-stage trial. Estimator failures are recorded, configuration errors throw.
TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_index);

/// Runs trials 0..n_trials-1 on a pool of `workers` threads; results ordered by index.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, int workers);

/// Root of the mean normalized squared error over successful trials.
/// Throws EstimationError if no trial succeeded.
double nmse(const std::vector<TrialRecord>& records);

struct SweepRow {
    double axis_value = 0.0;
    Method method = Method::kMode;
    double nmse = 0.0;  // NaN when every trial failed
    int n_success = 0;
    int n_fail = 0;
    std::uint64_t seed = 0;
};

/// One row per (axis point, method). Every point reuses the same per-trial streams.
std::vector<SweepRow> sweep(const ExperimentConfig& cfg, SweepAxis axis,
                            const std::vector<double>& values, const std::vector<Method>& methods,
                            int workers);

struct ConvergenceRow {
    int iteration = 0;
    double median = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
};

/// Per-iteration quantiles of the MODE discrepancy, running exactly `iterations` updates.
std::vector<ConvergenceRow> convergence(const ExperimentConfig& cfg, int iterations, int workers);

/// First iteration (1-based) at which D_t < rel * ||c_(t+1)||, or nullopt if never.
std::optional<int> first_settled_iteration(const TrialRecord& rec, double rel);

/// Linear-interpolated quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> data, double q);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);
nlohmann::json trial_to_json(const TrialRecord& rec);

}  // namespace irsv
