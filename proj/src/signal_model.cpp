#include "irsv/signal_model.hpp"

#include <cmath>
#include <span>
#include <string>

#include "irsv/error.hpp"

namespace irsv {

namespace {

CVector ula_response(double theta, int n, double spacing_m, double wavelength_m) {
    const double step = kTwoPi * spacing_m * std::cos(theta) / wavelength_m;
    CVector v(n);
    for (int i = 0; i < n; ++i) v[i] = std::polar(1.0, step * i);
    return v;
}

void check_aliasing(double mu, double t_s) {
    if (std::abs(mu * t_s) >= 0.5) {
        throw ConfigError("Doppler " + std::to_string(mu) +
                          " Hz aliases at the configured symbol period");
    }
}

// One combined snapshot per symbol: sum of rotating tones plus w^H p, p ~ CN(0, sigma^2/N I).
std::vector<Complex> combine_tones(std::span<const Complex> betas, std::span<const double> mus,
                                   int n_symbols, double t_s, const CVector& combiner,
                                   double sigma_sq, Rng& rng) {
    const auto n = combiner.size();
    const double element_var = sigma_sq / static_cast<double>(n);
    std::vector<Complex> z(n_symbols);
    CVector p(n);
    for (int k = 0; k < n_symbols; ++k) {
        Complex acc{0.0, 0.0};
        for (std::size_t t = 0; t < betas.size(); ++t) {
            acc += betas[t] * std::polar(1.0, kTwoPi * mus[t] * k * t_s);
        }
        if (sigma_sq > 0.0) {
            for (Eigen::Index i = 0; i < n; ++i) p[i] = complex_normal(rng, element_var);
            acc += combiner.dot(p);  // Eigen's dot conjugates the left operand
        }
        z[k] = acc;
    }
    return z;
}

}  // namespace

double SystemParams::rician_k() const { return std::pow(10.0, rician_factor_db / 10.0); }

double SystemParams::sigma_r_sq() const {
    return noise_enabled ? std::pow(10.0, -snr_db / 10.0) : 0.0;
}

void SystemParams::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (n_bs < 1) fail("n_bs must be >= 1");
    if (m_irs < 1) fail("m_irs must be >= 1");
    if (!(carrier_hz > 0.0)) fail("carrier_hz must be > 0");
    if (!(symbol_period_s > 0.0)) fail("symbol_period_s must be > 0");
    if (spacing_m && !(*spacing_m > 0.0)) fail("spacing_m must be > 0");
    if (n_pilots_stage1 < 2) fail("n_pilots_stage1 must be >= 2");
    if (stack_dim < 3 || stack_dim > n_pilots_stage2) {
        fail("stack_dim must satisfy 3 <= stack_dim <= n_pilots_stage2");
    }
    if (n_nlos_paths < 0) fail("n_nlos_paths must be >= 0");
    if (!(irs_gain_ratio >= 0.0)) fail("irs_gain_ratio must be >= 0");
    if (!std::isfinite(snr_db)) fail("snr_db must be finite");
}

CVector steering_bs(double theta, int n, double spacing_m, double wavelength_m) {
    return ula_response(theta, n, spacing_m, wavelength_m);
}

CVector steering_irs(double theta, int m, double spacing_m, double wavelength_m) {
    return ula_response(theta, m, spacing_m, wavelength_m);
}

CVector doppler_steering(double mu, int length, double symbol_period_s) {
    CVector v(length);
    for (int k = 0; k < length; ++k) v[k] = std::polar(1.0, -kTwoPi * mu * k * symbol_period_s);
    return v;
}

CVector phase_shifter(double theta_it, double theta_ib, int m, double spacing_m,
                      double wavelength_m) {
    const CVector b_it = steering_irs(theta_it, m, spacing_m, wavelength_m);
    const CVector b_ib = steering_irs(theta_ib, m, spacing_m, wavelength_m);
    return b_ib.cwiseProduct(b_it.conjugate());
}

ChannelRealization gen_channel(const SystemParams& params, const SceneGeometry& scene, Rng& rng) {
    const int n = params.n_bs;
    const int m = params.m_irs;
    const double d = params.spacing();
    const double lambda = params.wavelength_m();
    const double k = params.rician_k();

    std::uniform_real_distribution<double> phase(-kPi, kPi);
    std::uniform_real_distribution<double> aoa(-0.5 * kPi, 0.5 * kPi);

    ChannelRealization ch;
    ch.alpha_d = std::polar(1.0, phase(rng));
    ch.alpha_r = std::polar(params.irs_gain_ratio, phase(rng));

    const CVector a_bi = steering_bs(scene.theta_bi, n, d, lambda);
    const CVector b_ib = steering_irs(scene.theta_ib, m, d, lambda);
    ch.g_matrix = std::sqrt(k / (k + 1.0)) * (a_bi * b_ib.adjoint());

    if (params.n_nlos_paths > 0) {
        const double scale = std::sqrt(1.0 / (k + 1.0)) / std::sqrt(params.n_nlos_paths);
        for (int p = 0; p < params.n_nlos_paths; ++p) {
            const double phi = aoa(rng);
            const double psi = aoa(rng);
            const Complex gamma = complex_normal(rng, 1.0);
            ch.g_matrix += (scale * gamma) * (steering_bs(phi, n, d, lambda) *
                                              steering_irs(psi, m, d, lambda).adjoint());
        }
    }
    ch.psi_phases = phase_shifter(scene.theta_it, scene.theta_ib, m, d, lambda);
    return ch;
}

CVector normalize_combiner(const CVector& w) {
    const double norm = w.norm();
    if (norm == 0.0) throw ConfigError("combiner has zero norm");
    return w * (std::sqrt(static_cast<double>(w.size())) / norm);
}

CVector stage1_combiner(const SystemParams& params, const SceneGeometry& scene) {
    return normalize_combiner(
        steering_bs(scene.theta_tb, params.n_bs, params.spacing(), params.wavelength_m()));
}

CVector stage2_combiner(const SystemParams& params, const SceneGeometry& scene) {
    const double d = params.spacing();
    const double lambda = params.wavelength_m();
    return normalize_combiner(steering_bs(scene.theta_tb, params.n_bs, d, lambda) +
                              steering_bs(scene.theta_bi, params.n_bs, d, lambda));
}

LinkGains link_gains(const SystemParams& params, const SceneGeometry& scene,
                     const ChannelRealization& channel, const CVector& combiner) {
    const double d = params.spacing();
    const double lambda = params.wavelength_m();
    const CVector a_tb = steering_bs(scene.theta_tb, params.n_bs, d, lambda);
    const CVector b_it = steering_irs(scene.theta_it, params.m_irs, d, lambda);
    // Probing beam f = a(theta_tb), so a^H(theta_tb) f = ||a||^2.
    const Complex illumination = a_tb.squaredNorm();
    const CVector irs_echo = channel.g_matrix * channel.psi_phases.cwiseProduct(b_it);
    return {channel.alpha_d * combiner.dot(a_tb) * illumination,
            channel.alpha_r * combiner.dot(irs_echo) * illumination};
}

SnapshotSet synth_stage1(const SystemParams& params, const SceneGeometry& scene,
                         const ChannelRealization& channel, double mu_d, Rng& rng) {
    check_aliasing(mu_d, params.symbol_period_s);
    const CVector w = stage1_combiner(params, scene);
    const Complex beta = link_gains(params, scene, channel, w).beta_d;
    const Complex betas[] = {beta};
    const double mus[] = {mu_d};
    return {combine_tones(betas, mus, params.n_pilots_stage1, params.symbol_period_s, w,
                          params.sigma_d_sq(), rng),
            Stage::kDirectOnly, params.symbol_period_s};
}

SnapshotSet synth_stage2(const SystemParams& params, const SceneGeometry& scene,
                         const ChannelRealization& channel, const DopplerPair& mu, Rng& rng) {
    check_aliasing(mu.mu_d, params.symbol_period_s);
    check_aliasing(mu.mu_r, params.symbol_period_s);
    const CVector w = stage2_combiner(params, scene);
    const LinkGains g = link_gains(params, scene, channel, w);
    const Complex betas[] = {g.beta_d, g.beta_r};
    const double mus[] = {mu.mu_d, mu.mu_r};
    return {combine_tones(betas, mus, params.n_pilots_stage2, params.symbol_period_s, w,
                          params.sigma_r_sq(), rng),
            Stage::kCombined, params.symbol_period_s};
}

}  // namespace irsv
