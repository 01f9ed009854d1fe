#include "irsv/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Eigenvalues>

#include "irsv/error.hpp"

namespace irsv {

namespace {

constexpr double kCircleSlack = 1e-6;
constexpr double kSameRoot = 1e-6;

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coef) {
    auto hi = static_cast<int>(coef.size()) - 1;
    while (hi > 0 && coef[hi] == Complex{0.0, 0.0}) --hi;
    if (hi < 1) return {};
    CMatrix companion = CMatrix::Zero(hi, hi);
    for (int i = 1; i < hi; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < hi; ++i) companion(i, hi - 1) = -coef[i] / coef[hi];
    Eigen::ComplexEigenSolver<CMatrix> eig(companion, false);
    if (eig.info() != Eigen::Success) return {};
    const CVector ev = eig.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// Value of the first and second derivative of the polynomial at z (Horner).
std::pair<Complex, Complex> derivatives(const std::vector<Complex>& coef, Complex z) {
    Complex p1{0.0, 0.0};
    Complex p2{0.0, 0.0};
    for (auto i = static_cast<int>(coef.size()) - 1; i >= 1; --i) {
        p2 = p2 * z + p1;
        p1 = p1 * z + static_cast<double>(i) * coef[i];
    }
    // p1 accumulated sum(i c_i z^(i-1)); p2 accumulated its derivative
    return {p1, p2};
}

// Newton on the derivative: converges to the stationary point between a root and its
// conjugate-reciprocal partner, which lies on the same ray from the origin.
Complex polish(const std::vector<Complex>& coef, Complex r) {
    const double rho = std::abs(r);
    const double reach = std::abs(1.0 / rho - rho) + kCircleSlack;
    Complex z = r;
    for (int it = 0; it < 50; ++it) {
        const auto [d1, d2] = derivatives(coef, z);
        if (d2 == Complex{0.0, 0.0}) break;
        const Complex step = d1 / d2;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return r;
        if (std::abs(step) <= 1e-15 * std::abs(z)) break;
    }
    return std::abs(z - r) <= reach ? z : r;
}

}  // namespace

std::vector<Complex> root_music_polynomial(const CMatrix& noise_subspace) {
    const auto p = static_cast<int>(noise_subspace.rows());
    const CMatrix proj = noise_subspace * noise_subspace.adjoint();
    std::vector<Complex> coef(2 * p - 1);
    for (int l = -(p - 1); l <= p - 1; ++l) coef[l + p - 1] = proj.diagonal(l).sum();
    return coef;
}

std::pair<double, double> root_music(const SubspaceDecomposition& decomp, double symbol_period_s) {
    if (decomp.dim() < 3) throw EstimationError("root-MUSIC needs P >= 3");
    const auto coef = root_music_polynomial(decomp.noise_subspace);
    std::vector<Complex> roots = polynomial_roots(coef);

    std::erase_if(roots, [](Complex r) { return !(std::abs(r) <= 1.0 + kCircleSlack); });
    std::ranges::sort(roots, {}, [](Complex r) { return std::abs(1.0 - std::abs(r)); });

    std::vector<Complex> picked;
    for (Complex r : roots) {
        const Complex z = polish(coef, r);
        const bool duplicate = std::ranges::any_of(
            picked, [&](Complex w) { return std::abs(w - z) <= kSameRoot; });
        if (!duplicate) picked.push_back(z);
        if (picked.size() == 2) break;
    }
    if (picked.size() < 2) throw EstimationError("root-MUSIC found fewer than two admissible roots");
    return {root_to_frequency(picked[0], symbol_period_s),
            root_to_frequency(picked[1], symbol_period_s)};
}

std::pair<double, double> esprit(const SubspaceDecomposition& decomp, double symbol_period_s) {
    const auto p = decomp.dim();
    if (p < 3) throw EstimationError("ESPRIT needs P >= 3");
    // Row p+1 of a Doppler steering vector is row p times exp(-j 2 pi mu T_s).
    const CMatrix upper = decomp.signal_subspace.topRows(p - 1);
    const CMatrix lower = decomp.signal_subspace.bottomRows(p - 1);
    const Eigen::ColPivHouseholderQR<CMatrix> qr(upper);
    if (qr.rank() < 2) throw EstimationError("ESPRIT subspace block is rank deficient");
    const Eigen::Matrix2cd rotation = qr.solve(lower);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> eig(rotation, false);
    if (eig.info() != Eigen::Success) throw EstimationError("ESPRIT eigen-solve failed");
    const auto ev = eig.eigenvalues();
    return {root_to_frequency(ev[0], symbol_period_s), root_to_frequency(ev[1], symbol_period_s)};
}

}  // namespace irsv
