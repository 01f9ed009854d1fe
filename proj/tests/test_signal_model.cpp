#include <cmath>
#include <numeric>

#include "doctest.h"
#include "irsv/error.hpp"
#include "irsv/signal_model.hpp"
#include "test_util.hpp"

using namespace irsv;

namespace {

SystemParams reference_params() { return SystemParams{}; }

SceneGeometry reference_scene() {
    return scene_from_angles({0, 0}, {20, 0}, deg2rad(30), deg2rad(120));
}

// Full antenna-level received vector built with dense matrices, then combined. Test-only oracle.
std::vector<Complex> matrix_pipeline(const SystemParams& p, const SceneGeometry& s,
                                     const ChannelRealization& ch, const DopplerPair& mu, int n_sym) {
    const double d = p.spacing(), lam = p.wavelength_m();
    const CVector a_tb = steering_bs(s.theta_tb, p.n_bs, d, lam);
    const CVector f = a_tb;
    const CVector b_it = steering_irs(s.theta_it, p.m_irs, d, lam);
    const CMatrix psi = ch.psi_phases.asDiagonal();
    CVector w = steering_bs(s.theta_tb, p.n_bs, d, lam) + steering_bs(s.theta_bi, p.n_bs, d, lam);
    w *= std::sqrt(static_cast<double>(p.n_bs)) / w.norm();
    std::vector<Complex> z;
    for (int k = 0; k < n_sym; ++k) {
        const double t = k * p.symbol_period_s;
        const CMatrix direct = a_tb * a_tb.adjoint();
        const CMatrix irs = ch.g_matrix * psi * b_it * a_tb.adjoint();
        const CVector y = ch.alpha_d * std::polar(1.0, kTwoPi * mu.mu_d * t) * (direct * f) +
                          ch.alpha_r * std::polar(1.0, kTwoPi * mu.mu_r * t) * (irs * f);
        z.push_back((w.adjoint() * y)(0));
    }
    return z;
}

}  // namespace

TEST_SUITE("signal_model") {

TEST_CASE("spatial steering vectors") {
    const CVector broadside = steering_bs(kPi / 2, 8, 0.05, 0.1);
    for (Eigen::Index i = 0; i < broadside.size(); ++i) CHECK(std::abs(broadside[i] - 1.0) < 1e-13);

    const CVector a = steering_bs(deg2rad(60), 4, 0.05, 0.1);
    const Complex expected[] = {1.0, kJ, -1.0, -kJ};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i] - expected[i]) < 1e-12);

    const CVector r = steering_bs(1.234, 33, 0.05, 0.1);
    CHECK(r[0] == Complex(1.0, 0.0));
    for (Eigen::Index i = 0; i < r.size(); ++i) CHECK(std::abs(r[i]) == doctest::Approx(1.0));

    CHECK(steering_irs(0.7, 1, 0.05, 0.1).size() == 1);
    CHECK(steering_irs(0.7, 1, 0.05, 0.1)[0] == Complex(1.0, 0.0));
    CHECK((steering_irs(0.7, 16, 0.05, 0.1) - steering_bs(0.7, 16, 0.05, 0.1)).norm() == 0.0);
}

TEST_CASE("Doppler steering vectors") {
    const CVector zero = doppler_steering(0.0, 5, 1e-3);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(zero[i] == Complex(1.0, 0.0));

    const CVector pos = doppler_steering(123.4, 16, 0.5e-3);
    const CVector neg = doppler_steering(-123.4, 16, 0.5e-3);
    CHECK((neg - pos.conjugate()).norm() < 1e-14);

    const double ts = 0.5e-3;
    const CVector q = doppler_steering(1.0 / (4 * ts), 4, ts);
    const Complex expected[] = {1.0, -kJ, -1.0, kJ};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(q[i] - expected[i]) < 1e-12);
}

TEST_CASE("phase shifter co-phases the LoS cascade") {
    const double d = 0.05, lam = 0.1;
    const CVector flat = phase_shifter(kPi / 2, kPi / 2, 8, d, lam);
    for (Eigen::Index i = 0; i < 8; ++i) CHECK(std::abs(flat[i] - 1.0) < 1e-15);

    Rng rng(3);
    std::uniform_real_distribution<double> ang(0, kTwoPi);
    for (int trial = 0; trial < 100; ++trial) {
        const double it = ang(rng), ib = ang(rng);
        const int m = 1 + trial % 40;
        const CVector psi = phase_shifter(it, ib, m, d, lam);
        for (Eigen::Index i = 0; i < m; ++i) CHECK(std::abs(psi[i]) == doctest::Approx(1.0));
        const Complex gain = steering_irs(ib, m, d, lam).dot(psi.cwiseProduct(steering_irs(it, m, d, lam)));
        CHECK(std::abs(gain) == doctest::Approx(static_cast<double>(m)).epsilon(1e-12));
    }
}

TEST_CASE("channel: pure LoS limit and unit-modulus phases") {
    SystemParams p = reference_params();
    p.rician_factor_db = 300.0;
    const auto scene = reference_scene();
    Rng rng(1);
    const auto ch = gen_channel(p, scene, rng);
    const CMatrix los = steering_bs(scene.theta_bi, p.n_bs, p.spacing(), p.wavelength_m()) *
                        steering_irs(scene.theta_ib, p.m_irs, p.spacing(), p.wavelength_m()).adjoint();
    CHECK((ch.g_matrix - los).norm() / los.norm() < 1e-6);
    CHECK(std::abs(ch.alpha_d) == doctest::Approx(1.0));
    CHECK(std::abs(ch.alpha_r) == doctest::Approx(p.irs_gain_ratio));
    for (Eigen::Index i = 0; i < ch.psi_phases.size(); ++i) CHECK(std::abs(ch.psi_phases[i]) == doctest::Approx(1.0));

    p.n_nlos_paths = 0;
    p.rician_factor_db = 13.2;
    const auto ch0 = gen_channel(p, scene, rng);
    const double k = p.rician_k();
    CHECK((ch0.g_matrix - std::sqrt(k / (k + 1)) * los).norm() < 1e-12);
}

TEST_CASE("channel power normalization and Rician split (Monte-Carlo)") {
    const SystemParams p = reference_params();
    const auto scene = reference_scene();
    const double k = p.rician_k();
    CHECK(k == doctest::Approx(20.89).epsilon(1e-3));
    const CMatrix los = std::sqrt(k / (k + 1)) *
                        steering_bs(scene.theta_bi, p.n_bs, p.spacing(), p.wavelength_m()) *
                        steering_irs(scene.theta_ib, p.m_irs, p.spacing(), p.wavelength_m()).adjoint();
    Rng rng(42);
    double total = 0.0, nlos = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const auto ch = gen_channel(p, scene, rng);
        total += ch.g_matrix.squaredNorm();
        nlos += (ch.g_matrix - los).squaredNorm();
    }
    const double nm = p.n_bs * p.m_irs;
    CHECK(total / draws / nm == doctest::Approx(1.0).epsilon(0.02));
    CHECK(nlos / total == doctest::Approx(1.0 / (k + 1)).epsilon(0.05));
    CHECK(1.0 / (k + 1) == doctest::Approx(0.0457).epsilon(0.01));
}

TEST_CASE("stage 1 synthesis, noiseless") {
    SystemParams p = reference_params();
    p.noise_enabled = false;
    const auto scene = reference_scene();
    Rng rng(5);
    const auto ch = gen_channel(p, scene, rng);
    const double mu = 692.8203230275509;
    const auto z = synth_stage1(p, scene, ch, mu, rng);
    REQUIRE(z.values.size() == 16u);
    CHECK(z.stage == Stage::kDirectOnly);
    const Complex beta = ch.alpha_d * std::pow(p.n_bs, 2.0);
    CHECK(std::abs(z.values[0] - beta) < 1e-10);
    for (const auto& v : z.values) CHECK(std::abs(v) == doctest::Approx(std::abs(beta)));
    const double step = std::arg(z.values[1] / z.values[0]);
    CHECK(std::remainder(step - kTwoPi * 0.34641016, kTwoPi) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("aliasing precondition") {
    const SystemParams p = reference_params();
    const auto scene = reference_scene();
    Rng rng(5);
    const auto ch = gen_channel(p, scene, rng);
    CHECK_THROWS_AS(synth_stage1(p, scene, ch, 1000.0, rng), ConfigError);
    CHECK_THROWS_AS(synth_stage2(p, scene, ch, {10.0, -1200.0}, rng), ConfigError);
}

TEST_CASE("stage 2: matrix pipeline agrees with the two-tone fast path") {
    SystemParams p = reference_params();
    p.noise_enabled = false;
    const auto scene = reference_scene();
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ch = gen_channel(p, scene, rng);
        const DopplerPair mu{692.8203230275509, 546.4101615137755};
        const auto fast = synth_stage2(p, scene, ch, mu, rng);
        const auto slow = matrix_pipeline(p, scene, ch, mu, p.n_pilots_stage2);
        CHECK(fast.stage == Stage::kCombined);
        for (int k = 0; k < p.n_pilots_stage2; ++k) {
            CHECK(std::abs(fast.values[k] - slow[k]) <= 1e-10 * std::abs(slow[k]));
        }
    }
}

TEST_CASE("stage 2 special cases") {
    SystemParams p = reference_params();
    p.noise_enabled = false;
    const auto scene = reference_scene();
    Rng rng(12);
    auto ch = gen_channel(p, scene, rng);
    const auto g = link_gains(p, scene, ch, stage2_combiner(p, scene));

    const auto merged = synth_stage2(p, scene, ch, {300.0, 300.0}, rng);
    for (const auto& v : merged.values) CHECK(std::abs(v) == doctest::Approx(std::abs(g.beta_d + g.beta_r)));

    ch.alpha_r = 0.0;
    const auto direct = synth_stage2(p, scene, ch, {300.0, -200.0}, rng);
    for (int k = 0; k < p.n_pilots_stage2; ++k) {
        const Complex expect = g.beta_d * std::polar(1.0, kTwoPi * 300.0 * k * p.symbol_period_s);
        CHECK(std::abs(direct.values[k] - expect) < 1e-9);
    }
}

TEST_CASE("combined noise variance equals sigma^2 for both combiners") {
    SystemParams p = reference_params();
    p.snr_db = 3.0;
    p.n_pilots_stage1 = 100000;
    p.n_pilots_stage2 = 100000;
    const auto scene = reference_scene();
    Rng rng(99);
    auto ch = gen_channel(p, scene, rng);
    ch.alpha_d = 0.0;
    ch.alpha_r = 0.0;
    const auto var = [](const SnapshotSet& s) {
        double acc = 0.0;
        for (const auto& v : s.values) acc += std::norm(v);
        return acc / static_cast<double>(s.values.size());
    };
    CHECK(var(synth_stage1(p, scene, ch, 0.0, rng)) == doctest::Approx(p.sigma_d_sq()).epsilon(0.02));
    CHECK(var(synth_stage2(p, scene, ch, {0.0, 0.0}, rng)) == doctest::Approx(p.sigma_r_sq()).epsilon(0.02));
    CHECK(p.sigma_r_sq() == doctest::Approx(std::pow(10.0, -0.3)));
}

TEST_CASE("fixed seed reproduces noise bit for bit") {
    const SystemParams p = reference_params();
    const auto scene = reference_scene();
    auto run = [&] {
        Rng rng(77);
        const auto ch = gen_channel(p, scene, rng);
        return synth_stage2(p, scene, ch, {100.0, -50.0}, rng).values;
    };
    CHECK(run() == run());
}

TEST_CASE("system parameter validation") {
    SystemParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.wavelength_m() == doctest::Approx(0.1));
    CHECK(p.spacing() == doctest::Approx(0.05));
    p.stack_dim = 2;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.stack_dim = 17;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = SystemParams{};
    p.n_bs = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = SystemParams{};
    p.symbol_period_s = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

}  // TEST_SUITE
