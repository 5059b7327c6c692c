#pragma once

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/channel.hpp"
#include "qwalk/coin.hpp"
#include "qwalk/linalg.hpp"

namespace qwalk {

// ---------------------------------------------------------------------------
// Direct position-space evolution. This module is the ground truth the
// momentum-space machinery is checked against.
// ---------------------------------------------------------------------------

enum class Method { direct_pure, direct_density, kspace, closed_form };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::direct_pure: return "direct-pure";
        case Method::direct_density: return "direct-density";
        case Method::kspace: return "kspace";
        case Method::closed_form: return "closed-form";
    }
    return "unknown";
}

struct MomentRecord {
    long t = 0;
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
};

/// Per-step position moments with the method that produced them.
struct MomentSeries {
    Method method = Method::direct_pure;
    std::vector<MomentRecord> records;

    const MomentRecord& at_time(long t) const {
        for (const MomentRecord& r : records) {
            if (r.t == t) return r;
        }
        throw EmptyWindow("no record at t=" + std::to_string(t));
    }
};

struct PositionDistribution {
    long t = 0;
    long offset = 0;  // position of probabilities[0]
    std::vector<double> probabilities;

    double probability_at(long x) const {
        const long i = x - offset;
        if (i < 0 || i >= static_cast<long>(probabilities.size())) return 0.0;
        return probabilities[static_cast<size_t>(i)];
    }
};

struct Moments {
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
};

inline Moments moments(const PositionDistribution& dist) {
    Moments m;
    for (size_t i = 0; i < dist.probabilities.size(); ++i) {
        const double x = static_cast<double>(dist.offset + static_cast<long>(i));
        const double p = dist.probabilities[i];
        m.mean += x * p;
        m.second_moment += x * x * p;
    }
    m.variance = m.second_moment - m.mean * m.mean;
    return m;
}

inline Vector normalized_coin_state(const Vector& coin_state,
                                    const Tolerances& tol = default_tolerances()) {
    const double norm = coin_state.norm();
    if (std::abs(norm - 1.0) > tol.state_norm) {
        throw DomainError("coin state must be normalized");
    }
    return coin_state / norm;
}

/// Pure state of the walker: one amplitude per (position, coin basis) pair.
/// Positions occupy [offset, offset + position_count); the block for
/// position index i starts at amplitude i·coin_dim.
struct WalkState {
    long t = 0;
    long offset = 0;
    Index coin_dim = 0;
    Vector amplitudes;

    Index position_count() const { return amplitudes.size() / coin_dim; }

    Complex amplitude(long x, Index coin) const {
        const long i = x - offset;
        if (i < 0 || i >= position_count()) return Complex(0.0, 0.0);
        return amplitudes[i * coin_dim + coin];
    }

    double norm_error() const { return std::abs(amplitudes.squaredNorm() - 1.0); }
};

/// |0⟩ ⊗ |Φ₀⟩.
inline WalkState initial_walk_state(const Vector& coin_state,
                                    const Tolerances& tol = default_tolerances()) {
    WalkState state;
    state.coin_dim = coin_state.size();
    state.amplitudes = normalized_coin_state(coin_state, tol);
    return state;
}

/// One step: flip the coin, then shift right on P̂_R and left on P̂_L.
inline WalkState step_unitary(const WalkState& state, const CoinSpec& coin) {
    if (coin.dim != state.coin_dim) {
        throw DimensionMismatch("coin dimension does not match walk state");
    }
    const Index d = coin.dim;
    const Index npos = state.position_count();
    WalkState next;
    next.t = state.t + 1;
    next.offset = state.offset - 1;
    next.coin_dim = d;
    next.amplitudes = Vector::Zero((npos + 2) * d);
    for (Index i = 0; i < npos; ++i) {
        const Vector flipped = coin.flip * state.amplitudes.segment(i * d, d);
        const Vector right = coin.proj_right * flipped;
        next.amplitudes.segment((i + 2) * d, d) += right;          // x + 1
        next.amplitudes.segment(i * d, d) += flipped - right;      // x − 1, via P̂_L = I − P̂_R
    }
    return next;
}

/// Multicoin step: the slot flipped is state.t mod M.
inline WalkState step_unitary(const WalkState& state, const MultiCoinSpec& spec) {
    return step_unitary(state, multicoin_composite(spec, state.t));
}

/// Density operator on the truncated line ⊗ coin space. The window is fixed
/// at construction; stepping beyond it throws WindowOverflow rather than
/// silently truncating support.
struct DensityState {
    long t = 0;
    long window = 0;  // support must stay within [−window, window]
    Index coin_dim = 0;
    Matrix rho;       // side (2·window+1)·coin_dim, coin blocks per position

    Index block_start(long x) const { return (x + window) * coin_dim; }

    Matrix coin_block(long x, long xprime) const {
        return rho.block(block_start(x), block_start(xprime), coin_dim, coin_dim);
    }

    double trace_error() const { return std::abs(rho.trace() - Complex(1.0, 0.0)); }
};

inline DensityState initial_density_state(const Vector& coin_state, long window,
                                          const Tolerances& tol = default_tolerances()) {
    if (window < 0) throw DomainError("window must be nonnegative");
    const Vector phi = normalized_coin_state(coin_state, tol);
    DensityState state;
    state.window = window;
    state.coin_dim = phi.size();
    const Index side = (2 * window + 1) * state.coin_dim;
    state.rho = Matrix::Zero(side, side);
    state.rho.block(state.block_start(0), state.block_start(0), state.coin_dim, state.coin_dim) =
        phi * phi.adjoint();
    return state;
}

/// One decoherent step: the channel acts on the coin factor of every position
/// block, then the unitary flip-and-shift is applied.
inline DensityState step_density(const DensityState& state, const CoinSpec& coin,
                                 const KrausChannel& channel) {
    if (coin.dim != state.coin_dim || channel.dim != state.coin_dim) {
        throw DimensionMismatch("coin/channel dimension does not match density state");
    }
    if (state.t + 1 > state.window) {
        throw WindowOverflow("position support would leave the window; "
                             "enlarge the window or switch to the k-space method");
    }
    const Index d = state.coin_dim;
    const long lo = -state.t;
    const long hi = state.t;

    DensityState next;
    next.t = state.t + 1;
    next.window = state.window;
    next.coin_dim = d;
    next.rho = Matrix::Zero(state.rho.rows(), state.rho.cols());

    // Channel + flip, blockwise, into scratch storage over the occupied range.
    const long span = hi - lo + 1;
    Matrix mid = Matrix::Zero(span * d, span * d);
    for (long x = lo; x <= hi; ++x) {
        for (long xp = lo; xp <= hi; ++xp) {
            Matrix block = state.rho.block(state.block_start(x), state.block_start(xp), d, d);
            block = apply_channel(channel, block);
            mid.block((x - lo) * d, (xp - lo) * d, d, d) =
                coin.flip * block * coin.flip.adjoint();
        }
    }

    // Shift: |x⟩⊗|φ⟩ → |x+1⟩⊗P̂_R φ + |x−1⟩⊗P̂_L φ applied on both sides.
    const Matrix& pr = coin.proj_right;
    const Matrix& pl = coin.proj_left;
    auto mid_block = [&](long x, long xp) -> Matrix {
        if (x < lo || x > hi || xp < lo || xp > hi) return Matrix::Zero(d, d);
        return mid.block((x - lo) * d, (xp - lo) * d, d, d);
    };
    for (long y = lo - 1; y <= hi + 1; ++y) {
        for (long yp = lo - 1; yp <= hi + 1; ++yp) {
            Matrix out = pr * mid_block(y - 1, yp - 1) * pr;
            out += pr * mid_block(y - 1, yp + 1) * pl;
            out += pl * mid_block(y + 1, yp - 1) * pr;
            out += pl * mid_block(y + 1, yp + 1) * pl;
            next.rho.block(next.block_start(y), next.block_start(yp), d, d) = out;
        }
    }
    return next;
}

inline constexpr int kMaxDensityCoins = 5;

/// Multicoin decoherent step; the base channel acts on the active slot.
inline DensityState step_density(const DensityState& state, const MultiCoinSpec& spec,
                                 const KrausChannel& base_channel) {
    if (spec.m > kMaxDensityCoins) {
        throw DomainError("density evolution supports at most " +
                          std::to_string(kMaxDensityCoins) + " coins");
    }
    const CoinSpec composite = multicoin_composite(spec, state.t);
    if (base_channel.dim == composite.dim) {
        return step_density(state, composite, base_channel);
    }
    const KrausChannel lifted =
        embed_on_slot(base_channel, spec.m, spec.slot_for_step(state.t));
    return step_density(state, composite, lifted);
}

inline PositionDistribution distribution(const WalkState& state,
                                         const Tolerances& tol = default_tolerances()) {
    const Index d = state.coin_dim;
    PositionDistribution dist;
    dist.t = state.t;
    dist.offset = state.offset;
    dist.probabilities.resize(static_cast<size_t>(state.position_count()));
    double sum = 0.0;
    for (Index i = 0; i < state.position_count(); ++i) {
        const double p = state.amplitudes.segment(i * d, d).squaredNorm();
        dist.probabilities[static_cast<size_t>(i)] = p;
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol.distribution_sum) {
        throw DomainError("walk state lost normalization");
    }
    return dist;
}

inline PositionDistribution distribution(const DensityState& state,
                                         const Tolerances& tol = default_tolerances()) {
    const Index d = state.coin_dim;
    PositionDistribution dist;
    dist.t = state.t;
    dist.offset = -state.t;
    dist.probabilities.resize(static_cast<size_t>(2 * state.t + 1));
    double sum = 0.0;
    for (long x = -state.t; x <= state.t; ++x) {
        const double p =
            state.rho.block(state.block_start(x), state.block_start(x), d, d).trace().real();
        if (p < -tol.negative_probability) {
            throw DomainError("density state produced a negative probability");
        }
        dist.probabilities[static_cast<size_t>(x + state.t)] = p;
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol.distribution_sum) {
        throw DomainError("density state lost its trace");
    }
    return dist;
}

/// Unbiased classical walk baseline: mean 0, variance exactly t.
inline MomentSeries classical_reference(long t_max) {
    if (t_max < 0) throw DomainError("horizon must be nonnegative");
    MomentSeries series;
    series.method = Method::closed_form;
    series.records.reserve(static_cast<size_t>(t_max) + 1);
    for (long t = 0; t <= t_max; ++t) {
        const double tt = static_cast<double>(t);
        series.records.push_back({t, 0.0, tt, tt});
    }
    return series;
}

/// Steps a pure multicoin walk to `steps`, collecting per-step moments.
inline MomentSeries pure_walk_moments(const MultiCoinSpec& spec, const Vector& initial,
                                      long steps,
                                      const Tolerances& tol = default_tolerances()) {
    if (initial.size() != spec.dim()) {
        throw DimensionMismatch("initial coin state does not match multicoin dimension");
    }
    WalkState state = initial_walk_state(initial, tol);
    MomentSeries series;
    series.method = Method::direct_pure;
    series.records.reserve(static_cast<size_t>(steps));
    for (long t = 1; t <= steps; ++t) {
        state = step_unitary(state, spec);
        const Moments m = moments(distribution(state, tol));
        series.records.push_back({t, m.mean, m.second_moment, m.variance});
    }
    return series;
}

inline MomentSeries pure_walk_moments(const CoinSpec& coin, const Vector& initial, long steps,
                                      const Tolerances& tol = default_tolerances()) {
    if (initial.size() != coin.dim) {
        throw DimensionMismatch("initial coin state does not match coin dimension");
    }
    WalkState state = initial_walk_state(initial, tol);
    MomentSeries series;
    series.method = Method::direct_pure;
    series.records.reserve(static_cast<size_t>(steps));
    for (long t = 1; t <= steps; ++t) {
        state = step_unitary(state, coin);
        const Moments m = moments(distribution(state, tol));
        series.records.push_back({t, m.mean, m.second_moment, m.variance});
    }
    return series;
}

/// Steps a decoherent walk to `steps` in a window of exactly that size.
inline MomentSeries density_walk_moments(const CoinSpec& coin, const KrausChannel& channel,
                                         const Vector& initial, long steps,
                                         const Tolerances& tol = default_tolerances()) {
    DensityState state = initial_density_state(initial, steps, tol);
    MomentSeries series;
    series.method = Method::direct_density;
    series.records.reserve(static_cast<size_t>(steps));
    for (long t = 1; t <= steps; ++t) {
        state = step_density(state, coin, channel);
        const Moments m = moments(distribution(state, tol));
        series.records.push_back({t, m.mean, m.second_moment, m.variance});
    }
    return series;
}

}  // namespace qwalk
