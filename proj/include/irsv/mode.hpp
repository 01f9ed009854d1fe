#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "irsv/geometry.hpp"
#include "irsv/signal_model.hpp"
#include "irsv/types.hpp"

namespace irsv {

/// Column i is [z_{k}, z_{k-1}, ..., z_{k-P+1}]^T for k = P-1+i (0-based samples).
struct StackedSnapshots {
    CMatrix vectors;  // P x (N_r - P + 1)

    int dim() const { return static_cast<int>(vectors.rows()); }
    int count() const { return static_cast<int>(vectors.cols()); }
};

/// Throws ConfigError unless 3 <= p <= number of samples.
StackedSnapshots stack(const SnapshotSet& z_r, int p);

CMatrix sample_covariance(const StackedSnapshots& s);

/// Eigen-structure of the sample covariance split into a two-tone signal subspace and
/// the residual noise subspace.
struct SubspaceDecomposition {
    Eigen::VectorXd eigenvalues;  // descending
    CMatrix signal_subspace;      // P x 2
    CMatrix noise_subspace;       // P x (P-2)
    double noise_power = 0.0;     // mean of the P-2 smallest eigenvalues
    std::array<double, 2> gamma{};

    int dim() const { return static_cast<int>(eigenvalues.size()); }
};

/// Throws InputError when the input is not Hermitian to 1e-8 (relative) or smaller than 3x3.
SubspaceDecomposition decompose(const CMatrix& r_hat);

/// Coefficients of the annihilating polynomial 1 + c1*w + c2*w^2.
struct PolyCoeffs {
    Complex c1;
    Complex c2;
};

/// Polynomial whose roots are exp(-j*2*pi*mu_a*T_s) and exp(-j*2*pi*mu_b*T_s).
PolyCoeffs coeffs_from_tones(double mu_a, double mu_b, double symbol_period_s);

/// Initial guess pairing the coarse direct-link Doppler with a second tone at 0 Hz.
PolyCoeffs init_c(double mu_coarse, double symbol_period_s);

/// (P-2) x P banded Toeplitz matrix whose rows are shifted copies of [1, c1, c2].
CMatrix build_c_matrix(const PolyCoeffs& c, int p);

/// Linear form vec(C * G_s) = psi * [c1, c2]^T - q.
struct WlsSystem {
    CMatrix psi;  // 2(P-2) x 2
    CVector q;    // 2(P-2)

    int band_rows() const { return static_cast<int>(psi.rows() / 2); }
};

WlsSystem build_psi_q(const CMatrix& g_s);

/// (psi*c - q)^H W (psi*c - q), W = diag(gamma) kron (C_w C_w^H)^{-1} with C_w built from c_weights.
double wls_objective(const WlsSystem& sys, const PolyCoeffs& c, const PolyCoeffs& c_weights,
                     const std::array<double, 2>& gamma);

/// Exact minimizer of the weighted residual with the weights frozen at c_prev.
/// Empty when the normal equations are singular.
std::optional<PolyCoeffs> wls_step(const WlsSystem& sys, const PolyCoeffs& c_prev,
                                   const std::array<double, 2>& gamma);

struct ModeOptions {
    double tol = 1e-8;
    int max_iter = 50;
};

enum class ModeStatus { kConverged, kMaxIterations, kDiverged };

struct ModeResult {
    PolyCoeffs c;
    std::vector<double> discrepancy;  // ||c_(t+1) - c_(t)|| per iteration
    std::vector<double> coeff_norm;   // ||c_(t+1)|| per iteration
    ModeStatus status = ModeStatus::kDiverged;

    bool converged() const { return status == ModeStatus::kConverged; }
    int iterations() const { return static_cast<int>(discrepancy.size()); }
};

ModeResult mode_iterate(const SubspaceDecomposition& decomp, const PolyCoeffs& c0,
                        const ModeOptions& opts = {});

inline constexpr double kRootEpsilon = 1e-12;

/// Both roots of 1 + c1*w + c2*w^2, computed without cancellation.
/// Throws EstimationError when |c2| <= kRootEpsilon.
std::pair<Complex, Complex> quadratic_roots(const PolyCoeffs& c);

/// Tone frequency encoded by a root w = exp(-j*2*pi*mu*T_s), in [-1/(2T_s), 1/(2T_s)).
double root_to_frequency(Complex root, double symbol_period_s);

std::pair<double, double> roots_and_freqs(const PolyCoeffs& c, double symbol_period_s);

/// The tone closer to the coarse direct-link estimate is the direct link.
DopplerPair match_tones(double mu1, double mu2, double mu_coarse);

}  // namespace irsv
