#pragma once

#include <span>
#include <vector>

#include "irsv/signal_model.hpp"

namespace irsv {

/// Uniform Doppler grid over [-1/(2 T_s), 1/(2 T_s)) with spacing 1/(oversample * N_d * T_s).
struct CoarseGrid {
    std::vector<double> frequencies;
    double bin_width = 0.0;

    static CoarseGrid make(int n_pilots, double symbol_period_s, int oversample = 4);
};

/// Matched-filter power |z^T a_f(mu)|^2.
double coarse_objective(std::span<const Complex> z, double mu, double symbol_period_s);

/// Grid point maximizing the matched-filter power; ties go to the smaller |mu|.
/// Throws InputError for fewer than two snapshots.
double coarse_estimate(const SnapshotSet& z_d, const CoarseGrid& grid);

/// Continuous maximizer of the matched-filter power within one grid bin of `coarse`.
double refine_peak(const SnapshotSet& z_d, double coarse, double bin_width);

}  // namespace irsv
