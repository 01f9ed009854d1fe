#pragma once

#include <optional>
#include <vector>

#include "irsv/geometry.hpp"
#include "irsv/types.hpp"

namespace irsv {

inline constexpr double kSpeedOfLight = 3.0e8;

struct SystemParams {
    int n_bs = 16;
    int m_irs = 32;
    double carrier_hz = 3.0e9;
    std::optional<double> spacing_m;  // half a wavelength when unset
    double symbol_period_s = 0.5e-3;
    int n_pilots_stage1 = 16;
    int n_pilots_stage2 = 16;
    int stack_dim = 8;
    double snr_db = 0.0;
    double rician_factor_db = 13.2;
    int n_nlos_paths = 3;
    double irs_gain_ratio = 1.0;
    bool noise_enabled = true;

    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
    double spacing() const { return spacing_m.value_or(0.5 * wavelength_m()); }
    double rician_k() const;
    /// Combined noise powers. |alpha_d| = 1, so sigma^2 = 10^(-SNR/10).
    double sigma_r_sq() const;
    double sigma_d_sq() const { return sigma_r_sq(); }

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

struct ChannelRealization {
    CMatrix g_matrix;    // N x M, BS <- IRS
    CVector psi_phases;  // diagonal of the IRS phase-shift matrix
    Complex alpha_d;
    Complex alpha_r;
};

enum class Stage { kDirectOnly, kCombined };

struct SnapshotSet {
    std::vector<Complex> values;
    Stage stage = Stage::kDirectOnly;
    double symbol_period_s = 0.0;
};

/// ULA response, entry i = exp(j*2*pi*d*i*cos(theta)/lambda).
CVector steering_bs(double theta, int n, double spacing_m, double wavelength_m);
CVector steering_irs(double theta, int m, double spacing_m, double wavelength_m);

/// Doppler-domain steering, entry k = exp(-j*2*pi*mu*k*T_s).
CVector doppler_steering(double mu, int length, double symbol_period_s);

/// Phases that co-phase the LoS cascade: |b^H(theta_ib) diag(psi) b(theta_it)| = m.
CVector phase_shifter(double theta_it, double theta_ib, int m, double spacing_m,
                      double wavelength_m);

ChannelRealization gen_channel(const SystemParams& params, const SceneGeometry& scene, Rng& rng);

/// Rescales w so that w^H p ~ CN(0, sigma^2) when p ~ CN(0, sigma^2/N I).
CVector normalize_combiner(const CVector& w);

CVector stage1_combiner(const SystemParams& params, const SceneGeometry& scene);
CVector stage2_combiner(const SystemParams& params, const SceneGeometry& scene);

struct LinkGains {
    Complex beta_d;
    Complex beta_r;
};

/// Combined-output amplitudes of the two tones for a given combiner.
LinkGains link_gains(const SystemParams& params, const SceneGeometry& scene,
                     const ChannelRealization& channel, const CVector& combiner);

/// Direct-link echoes with the IRS switched off. Throws ConfigError if |mu_d*T_s| >= 1/2.
SnapshotSet synth_stage1(const SystemParams& params, const SceneGeometry& scene,
                         const ChannelRealization& channel, double mu_d, Rng& rng);

/// Echoes through both links, combined toward the target and the IRS.
SnapshotSet synth_stage2(const SystemParams& params, const SceneGeometry& scene,
                         const ChannelRealization& channel, const DopplerPair& mu, Rng& rng);

}  // namespace irsv
