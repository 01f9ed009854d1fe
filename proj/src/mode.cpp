#include "irsv/mode.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "irsv/error.hpp"

namespace irsv {

namespace {

bool finite(const PolyCoeffs& c) {
    return std::isfinite(c.c1.real()) && std::isfinite(c.c1.imag()) &&
           std::isfinite(c.c2.real()) && std::isfinite(c.c2.imag());
}

double distance(const PolyCoeffs& a, const PolyCoeffs& b) {
    return std::sqrt(std::norm(a.c1 - b.c1) + std::norm(a.c2 - b.c2));
}

// Cholesky factor of C C^H, with a small ridge if the plain factorization fails.
std::optional<Eigen::LLT<CMatrix>> band_gram_factor(const PolyCoeffs& c, int p) {
    const CMatrix cmat = build_c_matrix(c, p);
    CMatrix gram = cmat * cmat.adjoint();
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() == Eigen::Success) return llt;

    const double ridge = 1e-12 * gram.trace().real() / static_cast<double>(gram.rows());
    gram.diagonal().array() += ridge;
    llt.compute(gram);
    if (llt.info() == Eigen::Success) return llt;
    return std::nullopt;
}

}  // namespace

StackedSnapshots stack(const SnapshotSet& z_r, int p) {
    const int n = static_cast<int>(z_r.values.size());
    if (p < 3 || p > n) {
        throw ConfigError("stacking dimension must satisfy 3 <= P <= N_r (P=" + std::to_string(p) +
                          ", N_r=" + std::to_string(n) + ")");
    }
    StackedSnapshots s;
    s.vectors.resize(p, n - p + 1);
    for (int col = 0; col < n - p + 1; ++col) {
        const int k = p - 1 + col;
        for (int row = 0; row < p; ++row) s.vectors(row, col) = z_r.values[k - row];
    }
    return s;
}

CMatrix sample_covariance(const StackedSnapshots& s) {
    if (s.count() < 1) throw InputError("sample covariance needs at least one vector");
    CMatrix r = s.vectors * s.vectors.adjoint() / static_cast<double>(s.count());
    // enforce exact Hermitian symmetry against rounding in the product
    return 0.5 * (r + r.adjoint());
}

SubspaceDecomposition decompose(const CMatrix& r_hat) {
    const auto p = r_hat.rows();
    if (p != r_hat.cols() || p < 3) throw InputError("covariance must be square with P >= 3");
    const double scale = std::max(1.0, r_hat.norm());
    if ((r_hat - r_hat.adjoint()).norm() > 1e-8 * scale) {
        throw InputError("covariance matrix is not Hermitian");
    }

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(r_hat);
    if (eig.info() != Eigen::Success) throw InputError("eigendecomposition failed");

    SubspaceDecomposition d;
    d.eigenvalues = eig.eigenvalues().reverse();
    const CMatrix vecs = eig.eigenvectors().rowwise().reverse();
    d.signal_subspace = vecs.leftCols(2);
    d.noise_subspace = vecs.rightCols(p - 2);
    d.noise_power = d.eigenvalues.tail(p - 2).sum() / static_cast<double>(p - 2);
    for (int j = 0; j < 2; ++j) {
        const double lam = d.eigenvalues[j];
        const double excess = lam - d.noise_power;
        d.gamma[j] = lam > 0.0 ? excess * excess / lam : 0.0;
    }
    return d;
}

PolyCoeffs coeffs_from_tones(double mu_a, double mu_b, double symbol_period_s) {
    const Complex ea = std::polar(1.0, kTwoPi * mu_a * symbol_period_s);
    const Complex eb = std::polar(1.0, kTwoPi * mu_b * symbol_period_s);
    return {-(ea + eb), ea * eb};
}

PolyCoeffs init_c(double mu_coarse, double symbol_period_s) {
    const Complex e = std::polar(1.0, kTwoPi * mu_coarse * symbol_period_s);
    return {-(e + 1.0), e};
}

CMatrix build_c_matrix(const PolyCoeffs& c, int p) {
    if (p < 3) throw ConfigError("C matrix needs P >= 3");
    CMatrix m = CMatrix::Zero(p - 2, p);
    for (int i = 0; i < p - 2; ++i) {
        m(i, i) = 1.0;
        m(i, i + 1) = c.c1;
        m(i, i + 2) = c.c2;
    }
    return m;
}

WlsSystem build_psi_q(const CMatrix& g_s) {
    const int p = static_cast<int>(g_s.rows());
    const int cols = static_cast<int>(g_s.cols());
    if (p < 3) throw ConfigError("subspace rows must be >= 3");
    const int band = p - 2;
    WlsSystem sys;
    sys.psi.resize(cols * band, 2);
    sys.q.resize(cols * band);
    for (int j = 0; j < cols; ++j) {
        sys.psi.block(j * band, 0, band, 1) = g_s.col(j).segment(1, band);
        sys.psi.block(j * band, 1, band, 1) = g_s.col(j).segment(2, band);
        sys.q.segment(j * band, band) = -g_s.col(j).head(band);
    }
    return sys;
}

double wls_objective(const WlsSystem& sys, const PolyCoeffs& c, const PolyCoeffs& c_weights,
                     const std::array<double, 2>& gamma) {
    const int band = sys.band_rows();
    const auto llt = band_gram_factor(c_weights, band + 2);
    if (!llt) return std::numeric_limits<double>::quiet_NaN();
    Eigen::Vector2cd cv(c.c1, c.c2);
    const CVector resid = sys.psi * cv - sys.q;
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
        const CVector r = resid.segment(j * band, band);
        total += gamma[j] * r.dot(llt->solve(r)).real();
    }
    return total;
}

std::optional<PolyCoeffs> wls_step(const WlsSystem& sys, const PolyCoeffs& c_prev,
                                   const std::array<double, 2>& gamma) {
    const int band = sys.band_rows();
    const auto llt = band_gram_factor(c_prev, band + 2);
    if (!llt) return std::nullopt;

    // W is block diagonal: gamma_j (C C^H)^{-1} on each subspace column's residual block.
    Eigen::Matrix2cd normal = Eigen::Matrix2cd::Zero();
    Eigen::Vector2cd rhs = Eigen::Vector2cd::Zero();
    for (int j = 0; j < 2; ++j) {
        const CMatrix psi_j = sys.psi.middleRows(j * band, band);
        const CVector q_j = sys.q.segment(j * band, band);
        const CMatrix w_psi = llt->solve(psi_j);
        const CVector w_q = llt->solve(q_j);
        normal += gamma[j] * (psi_j.adjoint() * w_psi);
        rhs += gamma[j] * (psi_j.adjoint() * w_q);
    }
    const Eigen::FullPivLU<Eigen::Matrix2cd> lu(normal);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::Vector2cd sol = lu.solve(rhs);
    PolyCoeffs out{sol[0], sol[1]};
    if (!finite(out)) return std::nullopt;
    return out;
}

ModeResult mode_iterate(const SubspaceDecomposition& decomp, const PolyCoeffs& c0,
                        const ModeOptions& opts) {
    ModeResult res;
    res.c = c0;
    if (!finite(c0)) return res;

    const WlsSystem sys = build_psi_q(decomp.signal_subspace);
    for (int t = 0; t < opts.max_iter; ++t) {
        const auto next = wls_step(sys, res.c, decomp.gamma);
        if (!next) {
            res.status = ModeStatus::kDiverged;
            return res;
        }
        const double d = distance(*next, res.c);
        res.discrepancy.push_back(d);
        res.coeff_norm.push_back(std::sqrt(std::norm(next->c1) + std::norm(next->c2)));
        res.c = *next;
        if (d < opts.tol) {
            res.status = ModeStatus::kConverged;
            return res;
        }
    }
    res.status = ModeStatus::kMaxIterations;
    return res;
}

std::pair<Complex, Complex> quadratic_roots(const PolyCoeffs& c) {
    if (std::abs(c.c2) <= kRootEpsilon) {
        throw EstimationError("degenerate polynomial: leading coefficient vanished");
    }
    // c2 w^2 + c1 w + 1 = 0. q = -(c1 + s*sqrt(disc))/2 with the sign that avoids
    // cancellation; then w1 = q/c2 and w2 = 1/q (product of roots is 1/c2).
    const Complex disc = std::sqrt(c.c1 * c.c1 - 4.0 * c.c2);
    const double sign = (std::conj(c.c1) * disc).real() >= 0.0 ? 1.0 : -1.0;
    const Complex q = -0.5 * (c.c1 + sign * disc);
    if (q == Complex{0.0, 0.0}) {
        throw EstimationError("degenerate polynomial: no finite root split");
    }
    return {q / c.c2, 1.0 / q};
}

double root_to_frequency(Complex root, double symbol_period_s) {
    return -std::arg(root) / (kTwoPi * symbol_period_s);
}

std::pair<double, double> roots_and_freqs(const PolyCoeffs& c, double symbol_period_s) {
    const auto [w1, w2] = quadratic_roots(c);
    return {root_to_frequency(w1, symbol_period_s), root_to_frequency(w2, symbol_period_s)};
}

DopplerPair match_tones(double mu1, double mu2, double mu_coarse) {
    if (std::abs(mu_coarse - mu2) < std::abs(mu_coarse - mu1)) return {mu2, mu1};
    return {mu1, mu2};
}

}  // namespace irsv
