#include "qwalk/kspace.hpp"

#include <numbers>

#include "gtest/gtest.h"
#include "qwalk/evolve.hpp"

using namespace qwalk;

namespace {

constexpr double kPi = std::numbers::pi;

Vector right_state(Index dim) {
    Vector v = Vector::Zero(dim);
    v[0] = 1.0;
    return v;
}

// Û = I: the coin never changes, the walker drifts deterministically.
CoinSpec drift_coin() {
    Matrix pr = Matrix::Zero(2, 2);
    pr(0, 0) = 1.0;
    return make_coin(Matrix::Identity(2, 2), pr);
}

void expect_series_close(const MomentSeries& a, const MomentSeries& b, double tol) {
    ASSERT_EQ(a.records.size(), b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_NEAR(a.records[i].mean, b.records[i].mean, tol) << "t=" << a.records[i].t;
        EXPECT_NEAR(a.records[i].second_moment, b.records[i].second_moment, tol)
            << "t=" << a.records[i].t;
        EXPECT_NEAR(a.records[i].variance, b.records[i].variance, tol) << "t=" << a.records[i].t;
    }
}

}  // namespace

TEST(kgrid, nodes_and_weights) {
    const KGrid grid = KGrid::for_horizon(5);
    EXPECT_EQ(grid.n_points, 12);
    EXPECT_NEAR(grid.node(0), -kPi, 1e-15);
    EXPECT_NEAR(grid.weight(), 2.0 * kPi / 12.0, 1e-15);
    EXPECT_LT(grid.node(grid.n_points - 1), kPi);
}

TEST(kspace_moments, rejects_too_coarse_grids) {
    const CoinSpec coin = hadamard_coin();
    EXPECT_THROW(
        kspace_moments(coin, identity_channel(2), right_state(2), 5, KGrid{10}),
        GridTooCoarse);
    // N = 11 = 2t+1 is the minimum and fine.
    EXPECT_NO_THROW(
        kspace_moments(coin, identity_channel(2), right_state(2), 5, KGrid{11}));
}

TEST(kspace_moments, trivial_drift_coin_locks_the_sign) {
    // Û = I from |R⟩ walks right deterministically: ⟨x⟩ = +t, variance 0.
    const MomentSeries series = kspace_moments(drift_coin(), identity_channel(2),
                                               right_state(2), 10, KGrid::for_horizon(10));
    for (long t = 1; t <= 10; ++t) {
        EXPECT_NEAR(series.at_time(t).mean, static_cast<double>(t), 1e-12);
        EXPECT_NEAR(series.at_time(t).second_moment, static_cast<double>(t * t), 1e-11);
        EXPECT_NEAR(series.at_time(t).variance, 0.0, 1e-10);
    }
}

TEST(kspace_moments, single_step_examples) {
    const CoinSpec coin = hadamard_coin();
    const MomentSeries series = kspace_moments(coin, identity_channel(2), right_state(2), 2,
                                               KGrid::for_horizon(2));
    EXPECT_NEAR(series.at_time(1).mean, 0.0, 1e-13);   // symmetric single step
    EXPECT_NEAR(series.at_time(1).second_moment, 1.0, 1e-13);
    EXPECT_NEAR(series.at_time(2).mean, 0.0, 1e-12);   // four-path sum value
}

TEST(kspace_moments, second_moment_is_one_for_any_unbiased_coin_at_t1) {
    Matrix rotated(2, 2);
    const double a = std::cos(kPi / 5.0), b = std::sin(kPi / 5.0);
    rotated << a, b, b, -a;  // Hermitian unitary, unbiased projectors
    Matrix pr = Matrix::Zero(2, 2);
    pr(0, 0) = 1.0;
    const CoinSpec coin = make_coin(rotated, pr);
    const MomentSeries series = kspace_moments(coin, identity_channel(2), right_state(2), 1,
                                               KGrid::for_horizon(1));
    EXPECT_NEAR(series.at_time(1).second_moment, 1.0, 1e-13);
}

TEST(kspace_moments, matches_direct_unitary_evolution) {
    const MomentSeries direct = pure_walk_moments(multicoin(1), right_state(2), 25);
    const MomentSeries ks = kspace_moments(hadamard_coin(), identity_channel(2),
                                           right_state(2), 25, KGrid::for_horizon(25));
    expect_series_close(direct, ks, 1e-12);
}

TEST(kspace_moments, matches_direct_multicoin_evolution) {
    const MultiCoinSpec spec = multicoin(2);
    const MomentSeries direct = pure_walk_moments(spec, right_state(4), 20);
    const MomentSeries ks = kspace_moments(spec, right_state(4), 20, KGrid::for_horizon(20));
    expect_series_close(direct, ks, 1e-12);
}

TEST(kspace_moments, matches_density_evolution_under_dephasing) {
    const CoinSpec coin = hadamard_coin();
    const KrausChannel channel = dephasing_channel(kPi / 8.0);
    const MomentSeries direct = density_walk_moments(coin, channel, right_state(2), 25);
    const MomentSeries ks =
        kspace_moments(coin, channel, right_state(2), 25, KGrid::for_horizon(25));
    expect_series_close(direct, ks, 1e-10);
}

TEST(kspace_moments, grid_doubling_changes_nothing) {
    const CoinSpec coin = hadamard_coin();
    EXPECT_LT(kspace_quadrature_residual(coin, identity_channel(2), right_state(2), 20,
                                         KGrid::for_horizon(20)),
              1e-12);
    EXPECT_LT(kspace_quadrature_residual(coin, dephasing_channel(kPi / 8.0), right_state(2),
                                         20, KGrid::for_horizon(20)),
              1e-12);
}

TEST(kspace_moments, first_moment_saturates_under_dephasing) {
    const MomentSeries series =
        kspace_moments(hadamard_coin(), dephasing_channel(kPi / 8.0), right_state(2), 200,
                       KGrid::for_horizon(200));
    double tail_avg = 0.0;
    for (long t = 170; t < 200; ++t) {
        tail_avg += std::abs(series.at_time(t + 1).mean - series.at_time(t).mean);
    }
    tail_avg /= 30.0;
    EXPECT_LT(tail_avg, 1e-3);
    // Early increments are macroscopic; late ones are not.
    EXPECT_GT(std::abs(series.at_time(3).mean - series.at_time(2).mean), 0.1);
}

TEST(first_moment_kspace, wrapper_returns_mean_sequence) {
    const std::vector<double> means = first_moment_kspace(
        hadamard_coin(), identity_channel(2), right_state(2), 5, KGrid::for_horizon(5));
    const std::vector<double> seconds = second_moment_kspace(
        hadamard_coin(), identity_channel(2), right_state(2), 5, KGrid::for_horizon(5));
    ASSERT_EQ(means.size(), 5u);
    ASSERT_EQ(seconds.size(), 5u);
    EXPECT_NEAR(means[2], 0.5, 1e-12);
    EXPECT_NEAR(seconds[0], 1.0, 1e-13);
}

TEST(multicoin_variance_coefficient, closed_form_values) {
    EXPECT_NEAR(multicoin_variance_coefficient(1), 0.207107, 1e-6);
    EXPECT_NEAR(multicoin_variance_coefficient(2), 0.118718, 1e-6);
    // Large-M limit (3−√8)/√32 ≈ 0.030330: positive, so the quadratic growth
    // never vanishes for any fixed number of coins.
    const double limit = (3.0 - std::sqrt(8.0)) / std::sqrt(32.0);
    EXPECT_NEAR(limit, 0.030330, 1e-6);
    EXPECT_NEAR(multicoin_variance_coefficient(1000000000L), limit, 1e-8);
    EXPECT_GT(multicoin_variance_coefficient(1000000000L), limit);
}

TEST(multicoin_variance_coefficient, strictly_decreasing_with_positive_infimum) {
    const double limit = (3.0 - std::sqrt(8.0)) / std::sqrt(32.0);
    for (long m = 1; m < 50; ++m) {
        EXPECT_GT(multicoin_variance_coefficient(m), multicoin_variance_coefficient(m + 1));
        EXPECT_GT(multicoin_variance_coefficient(m), limit);
    }
    EXPECT_THROW(multicoin_variance_coefficient(0), DomainError);
}

TEST(dephasing_variance_slope, closed_form_values) {
    EXPECT_NEAR(dephasing_variance_slope(kPi / 4.0), 1.0, 1e-14);
    EXPECT_NEAR(dephasing_variance_slope(kPi / 8.0), 3.0, 1e-14);
    EXPECT_NEAR(dephasing_variance_slope(kPi / 16.0), 12.65685, 1e-5);
    EXPECT_NEAR(dephasing_variance_slope(3.0 * kPi / 16.0), 1.343146, 1e-6);
    EXPECT_THROW(dephasing_variance_slope(0.0), DomainError);
    EXPECT_THROW(dephasing_variance_slope(kPi / 4.0 + 0.1), DomainError);
}

TEST(decoherent_asymptotic_slope, agrees_with_the_closed_form) {
    const CoinSpec coin = hadamard_coin();
    for (double theta : {kPi / 16.0, kPi / 8.0, 3.0 * kPi / 16.0}) {
        const AsymptoticEstimate estimate =
            decoherent_asymptotic_slope(coin, dephasing_channel(theta), KGrid{256});
        EXPECT_EQ(estimate.order, GrowthOrder::linear);
        EXPECT_NEAR(estimate.leading_coefficient, dephasing_variance_slope(theta), 1e-8);
    }
}

TEST(decoherent_asymptotic_slope, quarter_pi_is_exactly_classical) {
    const AsymptoticEstimate estimate = decoherent_asymptotic_slope(
        hadamard_coin(), dephasing_channel(kPi / 4.0), KGrid{128});
    EXPECT_NEAR(estimate.leading_coefficient, 1.0, 1e-10);
}

TEST(decoherent_asymptotic_slope, rejects_the_unitary_limit) {
    EXPECT_THROW(
        decoherent_asymptotic_slope(hadamard_coin(), identity_channel(2), KGrid{64}),
        SingularOnSubspace);
}

TEST(unitary_asymptotic_coefficient, hadamard_from_right) {
    const AsymptoticEstimate estimate =
        unitary_asymptotic_coefficient(hadamard_coin(), right_state(2), KGrid{512});
    EXPECT_EQ(estimate.order, GrowthOrder::quadratic);
    EXPECT_NEAR(estimate.leading_coefficient, multicoin_variance_coefficient(1), 1e-9);
}

TEST(unitary_asymptotic_coefficient, drift_coin_has_no_spreading) {
    // Û = I walks deterministically; the eigendecomposition is degenerate at
    // the k = 0 and k = ±π nodes, exercising the group-projected cross terms.
    const AsymptoticEstimate estimate =
        unitary_asymptotic_coefficient(drift_coin(), right_state(2), KGrid{64});
    EXPECT_NEAR(estimate.leading_coefficient, 0.0, 1e-12);
}

TEST(unitary_asymptotic_coefficient, symmetric_start) {
    const double s = 1.0 / std::sqrt(2.0);
    Vector symmetric(2);
    symmetric << Complex(s, 0.0), Complex(0.0, s);
    const AsymptoticEstimate estimate =
        unitary_asymptotic_coefficient(hadamard_coin(), symmetric, KGrid{512});
    EXPECT_GT(estimate.leading_coefficient, 0.0);

    // The symmetric walk does not drift and its variance/t² approaches the
    // coefficient; t = 200 is close enough for a 5% comparison.
    const MomentSeries direct = pure_walk_moments(multicoin(1), symmetric, 200);
    EXPECT_NEAR(direct.at_time(200).mean, 0.0, 1e-9);
    const double measured = direct.at_time(200).variance / (200.0 * 200.0);
    EXPECT_NEAR(measured, estimate.leading_coefficient,
                0.05 * estimate.leading_coefficient);
}

TEST(fit_growth, exact_models) {
    MomentSeries linear;
    linear.method = Method::closed_form;
    MomentSeries quadratic;
    quadratic.method = Method::closed_form;
    for (long t = 1; t <= 100; ++t) {
        const double tt = static_cast<double>(t);
        linear.records.push_back({t, 0.0, tt, tt});
        quadratic.records.push_back({t, 0.0, 0.2 * tt * tt, 0.2 * tt * tt});
    }
    const GrowthFit slope = fit_growth(linear, 10, 100, FitModel::linear);
    EXPECT_NEAR(slope.coefficient, 1.0, 1e-12);
    EXPECT_NEAR(slope.residual, 0.0, 1e-10);

    const GrowthFit coeff = fit_growth(quadratic, 10, 100, FitModel::quadratic);
    EXPECT_NEAR(coeff.coefficient, 0.2, 1e-13);
    EXPECT_NEAR(coeff.residual, 0.0, 1e-9);
}

TEST(fit_growth, simulated_hadamard_walk) {
    const MomentSeries series = pure_walk_moments(multicoin(1), right_state(2), 200);
    const GrowthFit fit = fit_growth(series, 100, 200, FitModel::quadratic);
    EXPECT_NEAR(fit.coefficient, 0.2071, 0.05 * 0.2071);
}

TEST(fit_growth, window_errors) {
    const MomentSeries series = classical_reference(20);
    EXPECT_THROW(fit_growth(series, 0, 10, FitModel::linear), EmptyWindow);
    EXPECT_THROW(fit_growth(series, 10, 5, FitModel::linear), EmptyWindow);
    EXPECT_THROW(fit_growth(series, 10, 30, FitModel::linear), EmptyWindow);
    EXPECT_NO_THROW(fit_growth(series, 1, 20, FitModel::linear));
}
