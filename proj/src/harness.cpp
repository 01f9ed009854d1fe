#include "irsv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "irsv/baselines.hpp"
#include "irsv/coarse.hpp"
#include "irsv/error.hpp"

namespace irsv {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (std::ranges::find(allowed, key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

Point2 read_point(const json& obj, const char* key, Point2 fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_array() || it->size() != 2) {
        throw ConfigError(std::string(key) + " must be a two-element array");
    }
    return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

SystemParams parse_system(const json& j) {
    reject_unknown(j,
                   {"n_bs", "m_irs", "carrier_hz", "spacing_m", "symbol_period_s",
                    "n_pilots_stage1", "n_pilots_stage2", "stack_dim", "snr_db",
                    "rician_factor_db", "n_nlos_paths", "irs_gain_ratio", "noise_enabled"},
                   "system");
    SystemParams p;
    read(j, "n_bs", p.n_bs);
    read(j, "m_irs", p.m_irs);
    read(j, "carrier_hz", p.carrier_hz);
    if (auto it = j.find("spacing_m"); it != j.end() && !it->is_null()) {
        p.spacing_m = it->get<double>();
    }
    read(j, "symbol_period_s", p.symbol_period_s);
    read(j, "n_pilots_stage1", p.n_pilots_stage1);
    read(j, "n_pilots_stage2", p.n_pilots_stage2);
    read(j, "stack_dim", p.stack_dim);
    read(j, "snr_db", p.snr_db);
    read(j, "rician_factor_db", p.rician_factor_db);
    read(j, "n_nlos_paths", p.n_nlos_paths);
    read(j, "irs_gain_ratio", p.irs_gain_ratio);
    read(j, "noise_enabled", p.noise_enabled);
    return p;
}

SceneGeometry parse_scene(const json& j) {
    reject_unknown(j,
                   {"bs_position", "irs_position", "target_position", "theta_tb_deg",
                    "theta_it_deg"},
                   "scene");
    const Point2 bs = read_point(j, "bs_position", {0.0, 0.0});
    const Point2 irs = read_point(j, "irs_position", {20.0, 0.0});
    const bool has_target = j.contains("target_position");
    const bool has_angles = j.contains("theta_tb_deg") || j.contains("theta_it_deg");
    if (has_target && has_angles) {
        throw ConfigError("scene: give either target_position or the two angles, not both");
    }
    if (has_target) return angles_from_positions(bs, irs, read_point(j, "target_position", {}));
    double tb = 30.0, it = 120.0;
    read(j, "theta_tb_deg", tb);
    read(j, "theta_it_deg", it);
    return scene_from_angles(bs, irs, deg2rad(tb), deg2rad(it));
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "none") return SweepAxis::kNone;
    if (s == "snr_db") return SweepAxis::kSnr;
    if (s == "speed") return SweepAxis::kSpeed;
    throw ConfigError("unknown sweep axis '" + s + "' (expected none | snr_db | speed)");
}

std::string_view axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::kNone: return "none";
        case SweepAxis::kSnr: return "snr_db";
        case SweepAxis::kSpeed: return "speed";
    }
    return "none";
}

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const auto pool = static_cast<std::size_t>(std::max(1, workers));
    if (pool == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < std::min(pool, n); ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    threads.clear();
    if (error) std::rethrow_exception(error);
}

// Stage-2 frequency pair from the chosen subspace estimator. MODE also fills the trace.
std::pair<double, double> stage2_frequencies(const ExperimentConfig& cfg,
                                             const SubspaceDecomposition& decomp,
                                             double coarse, TrialRecord& rec) {
    const double t_s = cfg.system.symbol_period_s;
    switch (cfg.method) {
        case Method::kMode: {
            const ModeResult res = mode_iterate(decomp, init_c(coarse, t_s), cfg.mode);
            rec.discrepancy = res.discrepancy;
            rec.coeff_norm = res.coeff_norm;
            rec.converged = res.converged();
            if (res.status == ModeStatus::kDiverged) {
                throw EstimationError("MODE iteration diverged");
            }
            return roots_and_freqs(res.c, t_s);
        }
        case Method::kMusic: rec.converged = true; return root_music(decomp, t_s);
        case Method::kEsprit: rec.converged = true; return esprit(decomp, t_s);
        case Method::kNoIrs: break;
    }
    throw ConfigError("stage-2 estimator requested for the no-IRS baseline");
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::kMode: return "mode";
        case Method::kMusic: return "music";
        case Method::kEsprit: return "esprit";
        case Method::kNoIrs: return "no-irs";
    }
    return "mode";
}

Method parse_method(std::string_view name) {
    if (name == "mode") return Method::kMode;
    if (name == "music" || name == "root-music") return Method::kMusic;
    if (name == "esprit") return Method::kEsprit;
    if (name == "no-irs") return Method::kNoIrs;
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected mode | music | esprit | no-irs)");
}

void ExperimentConfig::validate() const {
    system.validate();
    if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
    if (sweep_axis != SweepAxis::kNone && sweep_values.empty()) {
        throw ConfigError("sweep values must be non-empty when a sweep axis is selected");
    }
    if (mode.max_iter < 1) throw ConfigError("mode.max_iter must be >= 1");
    if (!(mode.tol >= 0.0)) throw ConfigError("mode.tol must be >= 0");
    if (coarse_oversample < 1) throw ConfigError("coarse_oversample must be >= 1");
}

ExperimentConfig parse_config(const json& doc) {
    reject_unknown(doc,
                   {"system", "scene", "velocity", "method", "sweep", "n_trials", "base_seed",
                    "mode", "coarse_oversample", "output"},
                   "config");
    ExperimentConfig cfg;
    if (doc.contains("system")) cfg.system = parse_system(doc["system"]);
    if (doc.contains("scene")) cfg.scene = parse_scene(doc["scene"]);
    if (doc.contains("velocity")) {
        const json& v = doc["velocity"];
        reject_unknown(v, {"speed_mps", "heading_deg"}, "velocity");
        double speed = cfg.velocity.speed();
        double heading = rad2deg(cfg.velocity.heading());
        read(v, "speed_mps", speed);
        read(v, "heading_deg", heading);
        if (speed < 0.0) throw ConfigError("velocity.speed_mps must be >= 0");
        cfg.velocity = VelocityVector(speed, deg2rad(heading));
    }
    if (doc.contains("method")) cfg.method = parse_method(doc["method"].get<std::string>());
    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        reject_unknown(s, {"axis", "values"}, "sweep");
        std::string axis = "none";
        read(s, "axis", axis);
        cfg.sweep_axis = parse_axis(axis);
        read(s, "values", cfg.sweep_values);
    }
    read(doc, "n_trials", cfg.n_trials);
    read(doc, "base_seed", cfg.base_seed);
    if (doc.contains("mode")) {
        const json& m = doc["mode"];
        reject_unknown(m, {"tol", "max_iter"}, "mode");
        read(m, "tol", cfg.mode.tol);
        read(m, "max_iter", cfg.mode.max_iter);
    }
    read(doc, "coarse_oversample", cfg.coarse_oversample);
    if (auto it = doc.find("output"); it != doc.end() && !it->is_null()) {
        cfg.output = it->get<std::string>();
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const ExperimentConfig& cfg) {
    const SystemParams& p = cfg.system;
    json sys = {{"n_bs", p.n_bs},
                {"m_irs", p.m_irs},
                {"carrier_hz", p.carrier_hz},
                {"spacing_m", p.spacing()},
                {"symbol_period_s", p.symbol_period_s},
                {"n_pilots_stage1", p.n_pilots_stage1},
                {"n_pilots_stage2", p.n_pilots_stage2},
                {"stack_dim", p.stack_dim},
                {"snr_db", p.snr_db},
                {"rician_factor_db", p.rician_factor_db},
                {"n_nlos_paths", p.n_nlos_paths},
                {"irs_gain_ratio", p.irs_gain_ratio},
                {"noise_enabled", p.noise_enabled}};
    const SceneGeometry& g = cfg.scene;
    json scene = {{"bs_position", {g.bs_position.x, g.bs_position.y}},
                  {"irs_position", {g.irs_position.x, g.irs_position.y}},
                  {"target_position", {g.target_position.x, g.target_position.y}}};
    json out = {{"system", sys},
                {"scene", scene},
                {"velocity",
                 {{"speed_mps", cfg.velocity.speed()},
                  {"heading_deg", rad2deg(cfg.velocity.heading())}}},
                {"method", to_string(cfg.method)},
                {"sweep", {{"axis", axis_name(cfg.sweep_axis)}, {"values", cfg.sweep_values}}},
                {"n_trials", cfg.n_trials},
                {"base_seed", cfg.base_seed},
                {"mode", {{"tol", cfg.mode.tol}, {"max_iter", cfg.mode.max_iter}}},
                {"coarse_oversample", cfg.coarse_oversample}};
    out["output"] = cfg.output ? json(cfg.output->string()) : json(nullptr);
    return out;
}

Rng trial_rng(std::uint64_t base_seed, std::uint64_t trial_index) {
    return Rng(splitmix64(splitmix64(base_seed) ^ trial_index));
}

double normalized_sq_error(const VelocityVector& truth, const VelocityVector& estimate) {
    const auto t = truth.cartesian();
    const auto e = estimate.cartesian();
    const double num = (t[0] - e[0]) * (t[0] - e[0]) + (t[1] - e[1]) * (t[1] - e[1]);
    return num / (truth.speed() * truth.speed());
}

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_index) {
    const SystemParams& sys = cfg.system;
    const SceneGeometry& scene = cfg.scene;
    const double lambda = sys.wavelength_m();

    TrialRecord rec;
    rec.base_seed = cfg.base_seed;
    rec.trial_index = trial_index;
    rec.method = cfg.method;
    rec.true_velocity = cfg.velocity;
    rec.true_doppler = doppler_pair(cfg.velocity, scene.theta_tb, scene.theta_it, lambda);

    Rng rng = trial_rng(cfg.base_seed, trial_index);
    const ChannelRealization channel = gen_channel(sys, scene, rng);

    // Stage I: IRS off, matched filter on the direct link.
    const SnapshotSet z_d = synth_stage1(sys, scene, channel, rec.true_doppler.mu_d, rng);
    const CoarseGrid grid =
        CoarseGrid::make(sys.n_pilots_stage1, sys.symbol_period_s, cfg.coarse_oversample);
    rec.coarse_mu = coarse_estimate(z_d, grid);

    try {
        if (cfg.method == Method::kNoIrs) {
            const double mu_d = refine_peak(z_d, rec.coarse_mu, grid.bin_width);
            rec.refined = {mu_d, 0.0};
            rec.converged = true;
            rec.estimate = radial_velocity_no_irs(mu_d, scene.theta_tb, lambda);
        } else {
            const SnapshotSet z_r = synth_stage2(sys, scene, channel, rec.true_doppler, rng);
            const SubspaceDecomposition decomp =
                decompose(sample_covariance(stack(z_r, sys.stack_dim)));
            const auto [mu1, mu2] = stage2_frequencies(cfg, decomp, rec.coarse_mu, rec);
            rec.refined = match_tones(mu1, mu2, rec.coarse_mu);
            rec.estimate = recover_velocity(rec.refined, scene.theta_tb, scene.theta_it, lambda);
        }
        rec.sq_error = normalized_sq_error(rec.true_velocity, rec.estimate);
        if (!std::isfinite(rec.sq_error)) throw EstimationError("non-finite velocity estimate");
    } catch (const EstimationError& e) {
        rec.failed = true;
        rec.failure = e.what();
    } catch (const InputError& e) {
        rec.failed = true;
        rec.failure = e.what();
    }
    return rec;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, int workers) {
    cfg.validate();
    std::vector<TrialRecord> out(static_cast<std::size_t>(cfg.n_trials));
    parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = run_trial(cfg, i); });
    return out;
}

double nmse(const std::vector<TrialRecord>& records) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (r.failed) continue;
        sum += r.sq_error;
        ++n;
    }
    if (n == 0) throw EstimationError("NMSE undefined: no successful trials");
    return std::sqrt(sum / static_cast<double>(n));
}

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, SweepAxis axis,
                            const std::vector<double>& values, const std::vector<Method>& methods,
                            int workers) {
    if (axis == SweepAxis::kNone) throw ConfigError("sweep needs an axis");
    if (values.empty()) throw ConfigError("sweep needs at least one axis value");
    if (methods.empty()) throw ConfigError("sweep needs at least one method");

    std::vector<SweepRow> rows;
    for (double value : values) {
        for (Method m : methods) {
            ExperimentConfig point = cfg;
            point.method = m;
            if (axis == SweepAxis::kSnr) {
                point.system.snr_db = value;
            } else {
                if (value < 0.0) throw ConfigError("speed sweep values must be >= 0");
                point.velocity = VelocityVector(value, cfg.velocity.heading());
            }
            const auto records = run_trials(point, workers);
            SweepRow row;
            row.axis_value = value;
            row.method = m;
            row.seed = cfg.base_seed;
            for (const auto& r : records) (r.failed ? row.n_fail : row.n_success)++;
            row.nmse = row.n_success > 0 ? nmse(records) : std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
        }
    }
    return rows;
}

double quantile(std::vector<double> data, double q) {
    if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::ranges::sort(data);
    const double pos = q * static_cast<double>(data.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, data.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return data[lo] + frac * (data[hi] - data[lo]);
}

std::vector<ConvergenceRow> convergence(const ExperimentConfig& cfg, int iterations, int workers) {
    if (iterations < 1) throw ConfigError("convergence needs at least one iteration");
    ExperimentConfig run = cfg;
    run.method = Method::kMode;
    run.mode.tol = 0.0;
    run.mode.max_iter = iterations;
    const auto records = run_trials(run, workers);

    std::vector<ConvergenceRow> rows;
    for (int t = 0; t < iterations; ++t) {
        std::vector<double> d;
        for (const auto& r : records) {
            if (static_cast<int>(r.discrepancy.size()) > t) d.push_back(r.discrepancy[t]);
        }
        if (d.empty()) break;
        rows.push_back({t + 1, quantile(d, 0.5), quantile(d, 0.1), quantile(d, 0.9)});
    }
    return rows;
}

std::optional<int> first_settled_iteration(const TrialRecord& rec, double rel) {
    for (std::size_t t = 0; t < rec.discrepancy.size(); ++t) {
        if (rec.discrepancy[t] < rel * rec.coeff_norm[t]) return static_cast<int>(t) + 1;
    }
    return std::nullopt;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "axis_value,method,nmse,n_success,n_fail,seed\n";
    for (const auto& r : rows) {
        os << fmt9(r.axis_value) << ',' << to_string(r.method) << ',' << fmt9(r.nmse) << ','
           << r.n_success << ',' << r.n_fail << ',' << r.seed << '\n';
    }
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    os << "iteration,median_Dt,q10_Dt,q90_Dt\n";
    for (const auto& r : rows) {
        os << r.iteration << ',' << fmt9(r.median) << ',' << fmt9(r.q10) << ',' << fmt9(r.q90)
           << '\n';
    }
}

json trial_to_json(const TrialRecord& rec) {
    auto velocity = [](const VelocityVector& v) {
        const auto c = v.cartesian();
        return json{{"speed_mps", v.speed()},
                    {"heading_deg", rad2deg(v.heading())},
                    {"cartesian", {c[0], c[1]}}};
    };
    json j = {{"base_seed", rec.base_seed},
              {"trial_index", rec.trial_index},
              {"method", to_string(rec.method)},
              {"true_doppler", {{"mu_d", rec.true_doppler.mu_d}, {"mu_r", rec.true_doppler.mu_r}}},
              {"true_velocity", velocity(rec.true_velocity)},
              {"coarse_mu_d", rec.coarse_mu},
              {"refined", {{"mu_d", rec.refined.mu_d}, {"mu_r", rec.refined.mu_r}}},
              {"estimate", velocity(rec.estimate)},
              {"discrepancy", rec.discrepancy},
              {"converged", rec.converged},
              {"failed", rec.failed},
              {"sq_error", rec.sq_error}};
    if (rec.failed) j["failure"] = rec.failure;
    return j;
}

}  // namespace irsv
