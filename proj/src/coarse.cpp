#include "irsv/coarse.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "irsv/error.hpp"

namespace irsv {

CoarseGrid CoarseGrid::make(int n_pilots, double symbol_period_s, int oversample) {
    if (n_pilots < 1 || oversample < 1 || !(symbol_period_s > 0.0)) {
        throw ConfigError("coarse grid needs n_pilots >= 1, oversample >= 1, T_s > 0");
    }
    const int count = oversample * n_pilots;
    const double span = 1.0 / symbol_period_s;
    CoarseGrid g;
    g.bin_width = span / count;
    g.frequencies.reserve(count);
    for (int i = 0; i < count; ++i) g.frequencies.push_back(-0.5 * span + i * g.bin_width);
    return g;
}

double coarse_objective(std::span<const Complex> z, double mu, double symbol_period_s) {
    // z^T a_f(mu): plain transpose, a_f carries the exp(-j...) progression
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < z.size(); ++k) {
        acc += z[k] * std::polar(1.0, -kTwoPi * mu * static_cast<double>(k) * symbol_period_s);
    }
    return std::norm(acc);
}

double coarse_estimate(const SnapshotSet& z_d, const CoarseGrid& grid) {
    if (z_d.values.size() < 2) throw InputError("coarse estimation needs at least 2 snapshots");
    if (grid.frequencies.empty()) throw InputError("empty coarse grid");

    double best_mu = 0.0;
    double best = -1.0;
    for (double mu : grid.frequencies) {
        const double v = coarse_objective(z_d.values, mu, z_d.symbol_period_s);
        if (v > best || (v == best && std::abs(mu) < std::abs(best_mu))) {
            best = v;
            best_mu = mu;
        }
    }
    return best_mu;
}

double refine_peak(const SnapshotSet& z_d, double coarse, double bin_width) {
    if (z_d.values.size() < 2) throw InputError("peak refinement needs at least 2 snapshots");
    auto neg = [&](double mu) { return -coarse_objective(z_d.values, mu, z_d.symbol_period_s); };
    std::uintmax_t max_iter = 200;
    const auto [mu, value] = boost::math::tools::brent_find_minima(
        neg, coarse - bin_width, coarse + bin_width, std::numeric_limits<double>::digits / 2,
        max_iter);
    // Brent can only improve on the bracket interior; keep the grid point if it did not
    return value <= neg(coarse) ? mu : coarse;
}

}  // namespace irsv
