// End-to-end acceptance suite: one test per headline claim, each printing the
// measured value against its target. ctest reports one pass/fail line per
// criterion.

#include <cstdio>
#include <numbers>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "qwalk/qwalk.hpp"

using namespace qwalk;

namespace {

constexpr double kPi = std::numbers::pi;

Vector right_state(Index dim) {
    Vector v = Vector::Zero(dim);
    v[0] = 1.0;
    return v;
}

double worst_series_gap(const MomentSeries& a, const MomentSeries& b) {
    EXPECT_EQ(a.records.size(), b.records.size());
    double worst = 0.0;
    for (size_t i = 0; i < a.records.size(); ++i) {
        worst = std::max({worst, std::abs(a.records[i].mean - b.records[i].mean),
                          std::abs(a.records[i].second_moment - b.records[i].second_moment),
                          std::abs(a.records[i].variance - b.records[i].variance)});
    }
    return worst;
}

}  // namespace

// 1. Multicoin quadratic law: simulate M = 1..5 to t = 200 and fit the t²
//    coefficient over [100, 200]; each within 5% of (3 − √8 + 1/M)/√32.
TEST(acceptance, criterion1_multicoin_quadratic_law) {
    for (int m = 1; m <= 5; ++m) {
        const MultiCoinSpec spec = multicoin(m);
        const MomentSeries series = pure_walk_moments(spec, right_state(spec.dim()), 200);
        const GrowthFit fit = fit_growth(series, 100, 200, FitModel::quadratic);
        const double target = multicoin_variance_coefficient(m);
        const double rel = std::abs(fit.coefficient - target) / target;
        std::printf("  M=%d fitted=%.6f target=%.6f rel_err=%.4f\n", m, fit.coefficient,
                    target, rel);
        EXPECT_LT(rel, 0.05) << "M=" << m;
    }
}

// 2. Dephasing linear law: k-space variance to t = 400, slope fitted over
//    [200, 400] within 5% of cot²2θ + csc²2θ; at θ = π/4 the variance is the
//    classical t to within 1e−6 at every step.
TEST(acceptance, criterion2_dephasing_linear_law) {
    const CoinSpec coin = hadamard_coin();
    for (double theta : {kPi / 16.0, kPi / 8.0, 3.0 * kPi / 16.0, kPi / 4.0}) {
        const MomentSeries series = kspace_moments(coin, dephasing_channel(theta),
                                                   right_state(2), 400, KGrid::for_horizon(400));
        const GrowthFit fit = fit_growth(series, 200, 400, FitModel::linear);
        const double target = dephasing_variance_slope(theta);
        const double rel = std::abs(fit.coefficient - target) / target;
        std::printf("  theta=%.6f fitted=%.6f target=%.6f rel_err=%.2e\n", theta,
                    fit.coefficient, target, rel);
        EXPECT_LT(rel, 0.05) << "theta=" << theta;
        if (theta == kPi / 4.0) {
            for (const MomentRecord& r : series.records) {
                EXPECT_NEAR(r.variance, static_cast<double>(r.t), 1e-6) << "t=" << r.t;
            }
            EXPECT_NEAR(fit.coefficient, 1.0, 1e-6);
        }
    }
}

// 3. Method cross-validation (master oracle): for t ≤ 50 the k-space moments
//    equal the direct-evolution moments within 1e−10 at every step, for
//    unitary M = 1 and 2 and for dephasing θ = π/8 and π/4.
TEST(acceptance, criterion3_method_cross_validation) {
    const long horizon = 50;
    const KGrid grid = KGrid::for_horizon(horizon);

    for (int m : {1, 2}) {
        const MultiCoinSpec spec = multicoin(m);
        const Vector initial = right_state(spec.dim());
        const double worst = worst_series_gap(pure_walk_moments(spec, initial, horizon),
                                              kspace_moments(spec, initial, horizon, grid));
        std::printf("  unitary M=%d worst=%.3e\n", m, worst);
        EXPECT_LT(worst, 1e-10);
    }
    const CoinSpec coin = hadamard_coin();
    for (double theta : {kPi / 8.0, kPi / 4.0}) {
        const KrausChannel channel = dephasing_channel(theta);
        const double worst =
            worst_series_gap(density_walk_moments(coin, channel, right_state(2), horizon),
                             kspace_moments(coin, channel, right_state(2), horizon, grid));
        std::printf("  dephasing theta=%.6f worst=%.3e\n", theta, worst);
        EXPECT_LT(worst, 1e-10);
    }
}

// 4. Resolvent/closed-form consistency: the resolvent slope matches
//    cot²2θ + csc²2θ within 1e−8 at the four θ values.
TEST(acceptance, criterion4_resolvent_closed_form_consistency) {
    const CoinSpec coin = hadamard_coin();
    for (double theta : {kPi / 16.0, kPi / 8.0, 3.0 * kPi / 16.0, kPi / 4.0}) {
        const AsymptoticEstimate estimate =
            decoherent_asymptotic_slope(coin, dephasing_channel(theta), KGrid{4096});
        const double target = dephasing_variance_slope(theta);
        std::printf("  theta=%.6f resolvent=%.12f closed=%.12f diff=%.2e\n", theta,
                    estimate.leading_coefficient, target,
                    std::abs(estimate.leading_coefficient - target));
        EXPECT_NEAR(estimate.leading_coefficient, target, 1e-8);
    }
}

// 5. Unitary asymptotics: the spectral t² coefficient for the Hadamard coin
//    from |R⟩ on a 4096-node grid equals 0.207107 within 1e−4.
TEST(acceptance, criterion5_unitary_asymptotics) {
    const AsymptoticEstimate estimate =
        unitary_asymptotic_coefficient(hadamard_coin(), right_state(2), KGrid{4096});
    std::printf("  coefficient=%.10f target=0.207107\n", estimate.leading_coefficient);
    EXPECT_NEAR(estimate.leading_coefficient, 0.207107, 1e-4);
}

// 6. First-moment saturation under decoherence: at θ = π/8 the mean-position
//    increments over t ∈ [350, 400] average below 1e−3 in absolute value.
TEST(acceptance, criterion6_first_moment_saturation) {
    const MomentSeries series =
        kspace_moments(hadamard_coin(), dephasing_channel(kPi / 8.0), right_state(2), 400,
                       KGrid::for_horizon(400));
    double avg = 0.0;
    int count = 0;
    for (long t = 350; t < 400; ++t) {
        avg += std::abs(series.at_time(t + 1).mean - series.at_time(t).mean);
        ++count;
    }
    avg /= count;
    std::printf("  avg |<x>_t+1 - <x>_t| over [350,400] = %.3e (mean plateau %.6f)\n", avg,
                series.at_time(400).mean);
    EXPECT_LT(avg, 1e-3);
}

// 7. Property suite: channel completeness, superoperator unitality/trace
//    preservation and contractivity across a (θ,k) grid, walk normalization
//    and parity, the exhaustive path oracle at t = 12, and the derivative
//    identity d(U_k)/dk = −iẐU_k.
TEST(acceptance, criterion7_property_suite) {
    const CoinSpec coin = hadamard_coin();

    // Channel completeness at 1e−12, both sums.
    for (double theta : {0.0, kPi / 16.0, kPi / 8.0, 3.0 * kPi / 16.0, kPi / 4.0}) {
        const KrausChannel channel = dephasing_channel(theta);
        Matrix tp = Matrix::Zero(2, 2), un = Matrix::Zero(2, 2);
        for (const Matrix& a : channel.ops) {
            tp += a.adjoint() * a;
            un += a * a.adjoint();
        }
        EXPECT_LT(max_abs(tp - Matrix::Identity(2, 2)), 1e-12);
        EXPECT_LT(max_abs(un - Matrix::Identity(2, 2)), 1e-12);
    }

    // Superoperator unitality, trace preservation and spectral radius.
    const Vector vec_id = vectorize(Matrix::Identity(2, 2)).vec;
    double worst_radius = 0.0;
    for (double theta : {0.0, kPi / 16.0, kPi / 8.0, 3.0 * kPi / 16.0, kPi / 4.0}) {
        const KrausChannel channel = dephasing_channel(theta);
        for (int j = 0; j < 64; ++j) {
            const SuperOperator s = superop_k(coin, channel, -kPi + 2.0 * kPi * j / 64.0);
            EXPECT_LT((s.matrix * vec_id - vec_id).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_LT((s.matrix.adjoint() * vec_id - vec_id).cwiseAbs().maxCoeff(), 1e-12);
            Eigen::ComplexEigenSolver<Matrix> eig(s.matrix);
            for (Index i = 0; i < eig.eigenvalues().size(); ++i) {
                worst_radius = std::max(worst_radius, std::abs(eig.eigenvalues()[i]));
            }
        }
    }
    std::printf("  worst superoperator spectral radius = %.12f\n", worst_radius);
    EXPECT_LE(worst_radius, 1.0 + 1e-10);

    // Normalization and parity at every step.
    WalkState walk = initial_walk_state(right_state(2));
    for (long t = 1; t <= 40; ++t) {
        walk = step_unitary(walk, coin);
        EXPECT_LT(walk.norm_error(), 1e-12);
        const PositionDistribution dist = distribution(walk);
        for (long x = -t; x <= t; ++x) {
            if ((x + t) % 2 != 0) EXPECT_LT(dist.probability_at(x), 1e-14);
        }
    }

    // Exhaustive path-amplitude oracle at t = 12 (4096 paths).
    const long t_oracle = 12;
    WalkState state = initial_walk_state(right_state(2));
    for (long i = 0; i < t_oracle; ++i) state = step_unitary(state, coin);
    const oracles::AmplitudeMap expected = oracles::path_sum(1, t_oracle);
    double worst_amp = 0.0;
    for (long x = -t_oracle; x <= t_oracle; ++x) {
        for (unsigned c = 0; c < 2; ++c) {
            Complex want(0.0, 0.0);
            const auto it = expected.find({x, c});
            if (it != expected.end()) want = it->second;
            worst_amp = std::max(worst_amp, std::abs(state.amplitude(x, c) - want));
        }
    }
    std::printf("  path-oracle worst amplitude gap at t=12: %.3e\n", worst_amp);
    EXPECT_LT(worst_amp, 1e-12);

    // Derivative identity by central differences.
    const double h = 1e-5;
    double worst_derivative = 0.0;
    for (const CoinSpec& c : {hadamard_coin(), multicoin_composite(multicoin(2), 1)}) {
        for (double k : {-2.0, -0.5, 0.0, 1.0, 2.8}) {
            const Matrix numeric = (u_k(c, k + h) - u_k(c, k - h)) / (2.0 * h);
            const Matrix analytic = Complex(0.0, -1.0) * c.z() * u_k(c, k);
            worst_derivative = std::max(worst_derivative, max_abs(numeric - analytic));
        }
    }
    std::printf("  derivative identity worst gap: %.3e\n", worst_derivative);
    EXPECT_LT(worst_derivative, 1e-8);
}
