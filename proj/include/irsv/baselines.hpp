#pragma once

#include <utility>
#include <vector>

#include "irsv/mode.hpp"

namespace irsv {

/// Coefficients (ascending powers) of w^(P-1) a^H(w) G_N G_N^H a(w), a(w) = [1, w, ..., w^(P-1)].
std::vector<Complex> root_music_polynomial(const CMatrix& noise_subspace);

/// Root-MUSIC on the noise subspace. The two admissible roots nearest the unit circle
/// are taken, each refined to the stationary point of the null spectrum polynomial
/// shared with its reciprocal partner. Throws EstimationError with < 2 admissible roots.
std::pair<double, double> root_music(const SubspaceDecomposition& decomp, double symbol_period_s);

/// Least-squares ESPRIT on the signal subspace. Throws EstimationError when the
/// shifted subspace blocks are rank deficient.
std::pair<double, double> esprit(const SubspaceDecomposition& decomp, double symbol_period_s);

}  // namespace irsv
