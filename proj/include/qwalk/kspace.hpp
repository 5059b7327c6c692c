#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/channel.hpp"
#include "qwalk/coin.hpp"
#include "qwalk/evolve.hpp"
#include "qwalk/linalg.hpp"

namespace qwalk {

// ---------------------------------------------------------------------------
// Momentum-space moment machinery. Position moments are integrals over k of
// traces of iterated coin-space superoperators; because those integrands are
// trigonometric polynomials of degree ≤ 2t, the uniform periodic rule with
// N ≥ 2t+1 nodes evaluates them exactly, and any disagreement with direct
// evolution is an implementation bug rather than discretization error.
// ---------------------------------------------------------------------------

/// Uniform periodic quadrature on [−π, π): nodes k_j = −π + 2πj/N with
/// weight 2π/N each.
struct KGrid {
    int n_points = 0;

    double node(int j) const {
        return -std::numbers::pi + (2.0 * std::numbers::pi * j) / n_points;
    }
    double weight() const { return 2.0 * std::numbers::pi / n_points; }

    /// Smallest even grid that is exact for moments up to horizon t.
    static KGrid for_horizon(long t) { return KGrid{static_cast<int>(2 * t + 2)}; }
};

namespace detail {

/// A cyclic per-step schedule of coins and channels; the homogeneous walk is
/// the single-entry cycle.
struct StepCycle {
    Index dim = 0;
    std::vector<CoinSpec> coins;
    std::vector<KrausChannel> channels;
};

inline StepCycle make_cycle(const CoinSpec& coin, const KrausChannel& channel) {
    if (coin.dim != channel.dim) {
        throw DimensionMismatch("channel dimension does not match coin dimension");
    }
    StepCycle cycle;
    cycle.dim = coin.dim;
    cycle.coins.push_back(coin);
    cycle.channels.push_back(channel);
    return cycle;
}

inline StepCycle make_cycle(const MultiCoinSpec& spec) {
    StepCycle cycle;
    cycle.dim = spec.dim();
    for (int s = 0; s < spec.m; ++s) {
        cycle.coins.push_back(multicoin_composite(spec, s));
        cycle.channels.push_back(identity_channel(cycle.dim));
    }
    return cycle;
}

inline StepCycle make_cycle(const MultiCoinSpec& spec, const KrausChannel& base_channel) {
    StepCycle cycle;
    cycle.dim = spec.dim();
    for (int s = 0; s < spec.m; ++s) {
        cycle.coins.push_back(multicoin_composite(spec, s));
        cycle.channels.push_back(spec.m == 1 && base_channel.dim == cycle.dim
                                     ? base_channel
                                     : embed_on_slot(base_channel, spec.m, s));
    }
    return cycle;
}

inline void check_grid(const KGrid& grid, long t) {
    if (grid.n_points < 2 * t + 1) {
        throw GridTooCoarse("k grid with N=" + std::to_string(grid.n_points) +
                            " nodes cannot integrate moments to t=" + std::to_string(t) +
                            " exactly; need N >= " + std::to_string(2 * t + 1) +
                            " (default 2t+2)");
    }
}

/// Accumulates, at one k node, the per-step trace integrands of the first and
/// second moment. With σ_j the j-step evolved coin operator and Ẑ⁽ʲ⁾ the
/// active-slot Ẑ of step j, the running operators
///   A_j = L⁽ʲ⁾(A_{j−1}) + Ẑ⁽ʲ⁾ σ_j          (A_0 = 0)
///   B_j = L⁽ʲ⁾(B_{j−1} + σ_{j−1} Ẑ⁽ʲ⁻¹⁾)     (B_1 = 0)
/// carry the nested sums of the second-moment double sum, so the whole series
/// costs O(t) superoperator applications per node.
inline void accumulate_node(const StepCycle& cycle, const Matrix& rho0, long t, double k,
                            std::vector<double>& first, std::vector<double>& second) {
    const Index d = cycle.dim;
    const size_t period = cycle.coins.size();
    std::vector<Matrix> u(period), z(period);
    for (size_t s = 0; s < period; ++s) {
        u[s] = u_k(cycle.coins[s], k);
        z[s] = cycle.coins[s].z();
    }
    auto apply_step = [&](size_t s, const Matrix& x) -> Matrix {
        Matrix chi = Matrix::Zero(d, d);
        for (const Matrix& a : cycle.channels[s].ops) chi += a * x * a.adjoint();
        return u[s] * chi * u[s].adjoint();
    };

    Matrix sigma = rho0;
    Matrix acc_a = Matrix::Zero(d, d);
    Matrix acc_b = Matrix::Zero(d, d);
    size_t s_prev = 0;
    for (long j = 1; j <= t; ++j) {
        const size_t s = static_cast<size_t>((j - 1) % static_cast<long>(period));
        if (j > 1) acc_b = apply_step(s, acc_b + sigma * z[s_prev]);
        acc_a = apply_step(s, acc_a);
        sigma = apply_step(s, sigma);
        acc_a += z[s] * sigma;
        first[static_cast<size_t>(j - 1)] = (z[s] * sigma).trace().real();
        second[static_cast<size_t>(j - 1)] = (z[s] * (acc_a + acc_b)).trace().real();
        s_prev = s;
    }
}

inline MomentSeries kspace_moments_engine(const StepCycle& cycle, const Vector& initial,
                                          long t, const KGrid& grid, const Tolerances& tol) {
    if (t < 1) throw DomainError("horizon must be at least 1");
    check_grid(grid, t);
    if (initial.size() != cycle.dim) {
        throw DimensionMismatch("initial coin state does not match coin dimension");
    }
    const Vector phi = normalized_coin_state(initial, tol);
    const Matrix rho0 = phi * phi.adjoint();

    std::vector<double> mean_integrand(static_cast<size_t>(t), 0.0);
    std::vector<double> second_integrand(static_cast<size_t>(t), 0.0);
    std::vector<double> first(static_cast<size_t>(t)), second(static_cast<size_t>(t));
    // Node contributions are independent; they are accumulated in fixed node
    // order so results do not depend on evaluation order.
    for (int j = 0; j < grid.n_points; ++j) {
        accumulate_node(cycle, rho0, t, grid.node(j), first, second);
        for (size_t i = 0; i < first.size(); ++i) {
            mean_integrand[i] += first[i];
            second_integrand[i] += second[i];
        }
    }
    const double scale = 1.0 / static_cast<double>(grid.n_points);  // weight/(2π)

    MomentSeries series;
    series.method = Method::kspace;
    series.records.reserve(static_cast<size_t>(t));
    double mean = 0.0;
    double second_moment = 0.0;
    for (long j = 1; j <= t; ++j) {
        mean += scale * mean_integrand[static_cast<size_t>(j - 1)];
        second_moment += scale * second_integrand[static_cast<size_t>(j - 1)];
        series.records.push_back({j, mean, second_moment, second_moment - mean * mean});
    }
    return series;
}

}  // namespace detail

/// Exact finite-t moments of a single-coin walk with noise, by quadrature
/// over k of the iterated diagonal superoperator.
inline MomentSeries kspace_moments(const CoinSpec& coin, const KrausChannel& channel,
                                   const Vector& initial, long t, const KGrid& grid,
                                   const Tolerances& tol = default_tolerances()) {
    return detail::kspace_moments_engine(detail::make_cycle(coin, channel), initial, t, grid, tol);
}

/// Exact finite-t moments of the unitary multicoin walk.
inline MomentSeries kspace_moments(const MultiCoinSpec& spec, const Vector& initial, long t,
                                   const KGrid& grid,
                                   const Tolerances& tol = default_tolerances()) {
    return detail::kspace_moments_engine(detail::make_cycle(spec), initial, t, grid, tol);
}

/// Multicoin walk with the base channel applied to the active slot each step.
inline MomentSeries kspace_moments(const MultiCoinSpec& spec, const KrausChannel& base_channel,
                                   const Vector& initial, long t, const KGrid& grid,
                                   const Tolerances& tol = default_tolerances()) {
    return detail::kspace_moments_engine(detail::make_cycle(spec, base_channel), initial, t,
                                         grid, tol);
}

/// ⟨x⟩_1..⟨x⟩_t via the k-space route.
inline std::vector<double> first_moment_kspace(const CoinSpec& coin, const KrausChannel& channel,
                                               const Vector& initial, long t, const KGrid& grid,
                                               const Tolerances& tol = default_tolerances()) {
    const MomentSeries series = kspace_moments(coin, channel, initial, t, grid, tol);
    std::vector<double> out;
    out.reserve(series.records.size());
    for (const MomentRecord& r : series.records) out.push_back(r.mean);
    return out;
}

/// ⟨x²⟩_1..⟨x²⟩_t via the k-space route.
inline std::vector<double> second_moment_kspace(const CoinSpec& coin, const KrausChannel& channel,
                                                const Vector& initial, long t, const KGrid& grid,
                                                const Tolerances& tol = default_tolerances()) {
    const MomentSeries series = kspace_moments(coin, channel, initial, t, grid, tol);
    std::vector<double> out;
    out.reserve(series.records.size());
    for (const MomentRecord& r : series.records) out.push_back(r.second_moment);
    return out;
}

/// Internal consistency check of the quadrature: the largest change in any
/// moment when the node count is doubled. Exactness makes this roundoff-sized
/// whenever N ≥ 2t+1.
inline double kspace_quadrature_residual(const CoinSpec& coin, const KrausChannel& channel,
                                         const Vector& initial, long t, const KGrid& grid,
                                         const Tolerances& tol = default_tolerances()) {
    const MomentSeries coarse = kspace_moments(coin, channel, initial, t, grid, tol);
    const MomentSeries fine =
        kspace_moments(coin, channel, initial, t, KGrid{2 * grid.n_points}, tol);
    double residual = 0.0;
    for (size_t i = 0; i < coarse.records.size(); ++i) {
        residual = std::max(residual,
                            std::abs(coarse.records[i].mean - fine.records[i].mean));
        residual = std::max(residual, std::abs(coarse.records[i].second_moment -
                                               fine.records[i].second_moment));
    }
    return residual;
}

/// p(x,t) assembled from the off-diagonal superoperators on a double k grid.
/// Exact for N ≥ 2t+1; intended for small-t cross-validation of the direct
/// evolution path, which is cheaper at scale.
inline PositionDistribution distribution_kspace(const CoinSpec& coin,
                                                const KrausChannel& channel,
                                                const Vector& initial, long t,
                                                const KGrid& grid,
                                                const Tolerances& tol = default_tolerances()) {
    if (t < 0) throw DomainError("horizon must be nonnegative");
    detail::check_grid(grid, t);
    if (coin.dim != channel.dim) {
        throw DimensionMismatch("channel dimension does not match coin dimension");
    }
    const Vector phi = normalized_coin_state(initial, tol);
    const Matrix rho0 = phi * phi.adjoint();
    const int n = grid.n_points;

    std::vector<Matrix> u(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) u[static_cast<size_t>(j)] = u_k(coin, grid.node(j));

    Eigen::MatrixXcd trace_table(n, n);
    for (int j = 0; j < n; ++j) {
        for (int jp = 0; jp < n; ++jp) {
            Matrix chi = rho0;
            for (long step = 0; step < t; ++step) {
                chi = u[static_cast<size_t>(j)] * apply_channel(channel, chi) *
                      u[static_cast<size_t>(jp)].adjoint();
            }
            trace_table(j, jp) = chi.trace();
        }
    }

    PositionDistribution dist;
    dist.t = t;
    dist.offset = -t;
    dist.probabilities.resize(static_cast<size_t>(2 * t + 1));
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    double sum = 0.0;
    for (long x = -t; x <= t; ++x) {
        Complex p(0.0, 0.0);
        for (int j = 0; j < n; ++j) {
            for (int jp = 0; jp < n; ++jp) {
                const double phase = static_cast<double>(x) * (grid.node(j) - grid.node(jp));
                p += std::exp(Complex(0.0, phase)) * trace_table(j, jp);
            }
        }
        const double px = scale * p.real();
        dist.probabilities[static_cast<size_t>(x + t)] = px;
        sum += px;
    }
    if (std::abs(sum - 1.0) > tol.distribution_sum) {
        throw DomainError("k-space distribution does not sum to 1");
    }
    return dist;
}

// ---------------------------------------------------------------------------
// Long-time asymptotics.
// ---------------------------------------------------------------------------

enum class AsymptoticModel { unitary_multicoin, decoherent_dephasing, unitary_general };
enum class GrowthOrder { quadratic, linear };

inline const char* model_name(AsymptoticModel m) {
    switch (m) {
        case AsymptoticModel::unitary_multicoin: return "unitary-multicoin";
        case AsymptoticModel::decoherent_dephasing: return "decoherent-dephasing";
        case AsymptoticModel::unitary_general: return "unitary-general";
    }
    return "unknown";
}

inline const char* order_name(GrowthOrder o) {
    return o == GrowthOrder::quadratic ? "quadratic" : "linear";
}

struct AsymptoticEstimate {
    AsymptoticModel model = AsymptoticModel::unitary_general;
    double leading_coefficient = 0.0;
    GrowthOrder order = GrowthOrder::quadratic;
    std::optional<double> subleading;
};

/// Closed-form t² variance coefficient of the cyclic M-coin Hadamard walk,
/// (3 − √8 + 1/M)/√32. Strictly decreasing in M with a positive limit
/// (3 − √8)/√32 ≈ 0.0303: more coins dilute interference but never remove
/// the quadratic growth.
inline double multicoin_variance_coefficient(long m) {
    if (m < 1) throw DomainError("coin count must be at least 1");
    return (3.0 - std::sqrt(8.0) + 1.0 / static_cast<double>(m)) / std::sqrt(32.0);
}

/// Closed-form long-time variance slope of the dephasing walk,
/// cot²2θ + csc²2θ. Equals 1 at θ = π/4 (classical walk) and diverges as
/// θ → 0, where the long-time approximation breaks down.
inline double dephasing_variance_slope(double theta) {
    if (!(theta > 0.0 && theta <= std::numbers::pi / 4.0)) {
        throw DomainError("dephasing slope is defined for theta in (0, pi/4]; "
                          "it diverges as theta -> 0");
    }
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    return (c * c + 1.0) / (s * s);
}

/// Long-time variance slope of a strictly noisy walk via the resolvent
/// 1 + (1/πD) ∫dk Tr{Ẑ (1−L_k)⁻¹ L_k Ẑ}, evaluated node-wise with the
/// traceless-subspace solve. SingularOnSubspace propagates when the channel
/// is too close to unitary for the resolvent to exist.
inline AsymptoticEstimate decoherent_asymptotic_slope(const CoinSpec& coin,
                                                      const KrausChannel& channel,
                                                      const KGrid& grid,
                                                      const Tolerances& tol = default_tolerances()) {
    if (coin.dim != channel.dim) {
        throw DimensionMismatch("channel dimension does not match coin dimension");
    }
    const Index d = coin.dim;
    const Matrix projector = traceless_projector(d);
    const Vector vec_z = vectorize(coin.z()).vec;
    const Matrix id = Matrix::Identity(d * d, d * d);

    double integral = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const SuperOperator l_k = superop_k(coin, channel, grid.node(j));
        const Vector rhs = l_k.matrix * vec_z;  // L_k Ẑ, traceless for unbiased coins
        const Vector x = solve_on_subspace(id - l_k.matrix, rhs, projector, tol);
        integral += (coin.z() * devectorize(x, d)).trace().real();
    }
    AsymptoticEstimate estimate;
    estimate.model = AsymptoticModel::decoherent_dephasing;
    estimate.order = GrowthOrder::linear;
    estimate.leading_coefficient =
        1.0 + 2.0 * integral / (static_cast<double>(d) * grid.n_points);
    return estimate;
}

/// t² variance coefficient of a unitary walk from the spectral decomposition
/// of U_k: only terms diagonal in the eigenbasis survive the long-time
/// average, so the coefficient is
///   ∫dk/2π Σ_l |c_kl|² ⟨φ_kl|Ẑ|φ_kl⟩²  −  (∫dk/2π Σ_l |c_kl|² ⟨φ_kl|Ẑ|φ_kl⟩)².
/// Within a degenerate eigenvalue group the cross terms do not oscillate and
/// are kept: Ẑ is block-projected with the group projector P_G, giving
/// ⟨Φ₀|P_G Ẑ P_G|Φ₀⟩ and ⟨Φ₀|P_G Ẑ P_G Ẑ P_G|Φ₀⟩ per group.
inline AsymptoticEstimate unitary_asymptotic_coefficient(const CoinSpec& coin,
                                                         const Vector& initial,
                                                         const KGrid& grid,
                                                         const Tolerances& tol = default_tolerances()) {
    if (initial.size() != coin.dim) {
        throw DimensionMismatch("initial coin state does not match coin dimension");
    }
    const Vector phi = normalized_coin_state(initial, tol);
    const Matrix z = coin.z();

    double mean_accum = 0.0;
    double second_accum = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const UnitaryEigensystem eig = eig_unitary(u_k(coin, grid.node(j)), tol);
        const auto groups = group_degenerate(eig.values, tol.eig_degeneracy);
        for (const auto& group : groups) {
            Matrix basis(coin.dim, static_cast<Index>(group.size()));
            for (size_t g = 0; g < group.size(); ++g) {
                basis.col(static_cast<Index>(g)) = eig.vectors.col(group[g]);
            }
            const Vector in_group = basis * (basis.adjoint() * phi);  // P_G |Φ₀⟩
            const Vector z_in_group = z * in_group;
            mean_accum += (in_group.adjoint() * z_in_group)(0).real();
            second_accum += (basis.adjoint() * z_in_group).squaredNorm();
        }
    }
    const double mean = mean_accum / grid.n_points;
    const double second = second_accum / grid.n_points;

    AsymptoticEstimate estimate;
    estimate.model = AsymptoticModel::unitary_general;
    estimate.order = GrowthOrder::quadratic;
    estimate.leading_coefficient = second - mean * mean;
    return estimate;
}

// ---------------------------------------------------------------------------
// Growth-law fitting.
// ---------------------------------------------------------------------------

enum class FitModel { linear, quadratic };

struct GrowthFit {
    double coefficient = 0.0;
    double residual = 0.0;  // RMS deviation of the fitted model over the window
};

/// Extracts the growth coefficient of a variance series over [t_lo, t_hi].
/// Linear: least-squares slope (intercept free, absorbing the long-time
/// constant). Quadratic: mean of variance/t², which averages out the
/// oscillatory O(t) remainder.
inline GrowthFit fit_growth(const MomentSeries& series, long t_lo, long t_hi, FitModel model) {
    if (t_lo < 1 || t_hi < t_lo) {
        throw EmptyWindow("fit window must satisfy 1 <= lo <= hi");
    }
    std::vector<std::pair<double, double>> points;  // (t, variance)
    for (const MomentRecord& r : series.records) {
        if (r.t >= t_lo && r.t <= t_hi) points.emplace_back(static_cast<double>(r.t), r.variance);
    }
    if (points.size() != static_cast<size_t>(t_hi - t_lo + 1)) {
        throw EmptyWindow("fit window extends beyond the series");
    }

    GrowthFit fit;
    const double n = static_cast<double>(points.size());
    if (model == FitModel::linear) {
        double st = 0.0, sv = 0.0, stt = 0.0, stv = 0.0;
        for (const auto& [t, v] : points) {
            st += t;
            sv += v;
            stt += t * t;
            stv += t * v;
        }
        const double denom = n * stt - st * st;
        const double slope = denom == 0.0 ? 0.0 : (n * stv - st * sv) / denom;
        const double intercept = (sv - slope * st) / n;
        double ss = 0.0;
        for (const auto& [t, v] : points) {
            const double d = v - (intercept + slope * t);
            ss += d * d;
        }
        fit.coefficient = slope;
        fit.residual = std::sqrt(ss / n);
    } else {
        double mean_ratio = 0.0;
        for (const auto& [t, v] : points) mean_ratio += v / (t * t);
        mean_ratio /= n;
        double ss = 0.0;
        for (const auto& [t, v] : points) {
            const double d = v - mean_ratio * t * t;
            ss += d * d;
        }
        fit.coefficient = mean_ratio;
        fit.residual = std::sqrt(ss / n);
    }
    return fit;
}

}  // namespace qwalk
