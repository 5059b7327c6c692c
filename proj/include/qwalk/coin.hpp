#pragma once

#include <cmath>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/linalg.hpp"

namespace qwalk {

/// A walk coin: flip unitary Û plus the Right/Left projector pair.
///
/// Valid coins are unbiased (Tr P̂_R = Tr P̂_L = D/2) and satisfy
/// P̂_R + P̂_L = I exactly; the left projector is derived from the right one
/// at construction to make the sum exact.
struct CoinSpec {
    Index dim = 0;
    Matrix flip;
    Matrix proj_right;
    Matrix proj_left;

    /// Ẑ = P̂_R − P̂_L. Hermitian, traceless for unbiased coins, Ẑ² = I.
    Matrix z() const { return proj_right - proj_left; }
};

inline CoinSpec make_coin(Matrix flip, Matrix proj_right,
                          const Tolerances& tol = default_tolerances()) {
    const Index dim = flip.rows();
    if (flip.cols() != dim || proj_right.rows() != dim || proj_right.cols() != dim) {
        throw DimensionMismatch("coin flip and projector must be square and equally sized");
    }
    if (dim < 2 || dim % 2 != 0) {
        throw DomainError("coin dimension must be even and at least 2");
    }
    if (!is_unitary(flip, tol.unitarity)) {
        throw NotUnitary("coin flip operator is not unitary");
    }
    if (max_abs(proj_right - proj_right.adjoint()) > tol.projector ||
        max_abs(proj_right * proj_right - proj_right) > tol.projector) {
        throw DomainError("P̂_R is not an orthogonal projector");
    }
    const double trace_right = proj_right.trace().real();
    if (std::abs(proj_right.trace().imag()) > tol.projector ||
        std::abs(trace_right - static_cast<double>(dim) / 2.0) > tol.projector) {
        throw DomainError("coin is biased: Tr P̂_R must equal D/2");
    }
    CoinSpec coin;
    coin.dim = dim;
    coin.proj_left = Matrix::Identity(dim, dim) - proj_right;
    coin.proj_right = std::move(proj_right);
    coin.flip = std::move(flip);
    if (max_abs(coin.proj_right * coin.proj_left) > tol.projector) {
        throw DomainError("P̂_R·P̂_L does not vanish");
    }
    return coin;
}

/// The usual two-level coin: H|R⟩ = (|R⟩+|L⟩)/√2, H|L⟩ = (|R⟩−|L⟩)/√2,
/// with basis index 0 = |R⟩ and index 1 = |L⟩.
inline CoinSpec hadamard_coin() {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix h(2, 2);
    h << s, s, s, -s;
    Matrix pr = Matrix::Zero(2, 2);
    pr(0, 0) = 1.0;
    return make_coin(std::move(h), std::move(pr));
}

/// Momentum-space step unitary (e^{−ik} P̂_R + e^{ik} P̂_L)·Û.
inline Matrix u_k(const CoinSpec& coin, double k) {
    const Complex phase_right = std::exp(Complex(0.0, -k));
    const Complex phase_left = std::exp(Complex(0.0, k));
    return (phase_right * coin.proj_right + phase_left * coin.proj_left) * coin.flip;
}

inline constexpr int kMaxCoins = 12;

/// M two-level coins used cyclically: step j flips slot j mod M and the
/// shift is conditioned on that slot. Slots are ordered left to right in the
/// 2^M tensor space; slot 0 is flipped first.
struct MultiCoinSpec {
    int m = 1;
    CoinSpec base;

    Index dim() const { return Index{1} << m; }
    int slot_for_step(long step_index) const { return static_cast<int>(step_index % m); }
};

inline MultiCoinSpec multicoin(int m, CoinSpec base = hadamard_coin()) {
    if (m < 1 || m > kMaxCoins) {
        throw DomainError("coin count must lie in [1, " + std::to_string(kMaxCoins) + "]");
    }
    if (base.dim != 2) {
        throw DimensionMismatch("multicoin base must be a two-level coin");
    }
    return {m, std::move(base)};
}

/// The composite coin driving step `step_index`: the base flip on the active
/// slot (identity elsewhere), with the active slot's projectors.
inline CoinSpec multicoin_composite(const MultiCoinSpec& spec, long step_index) {
    if (step_index < 0) throw DomainError("step index must be nonnegative");
    const int slot = spec.slot_for_step(step_index);
    const Index before = Index{1} << slot;
    const Index after = Index{1} << (spec.m - 1 - slot);
    const Matrix id_before = Matrix::Identity(before, before);
    const Matrix id_after = Matrix::Identity(after, after);
    Matrix flip = kron(kron(id_before, spec.base.flip), id_after);
    Matrix pr = kron(kron(id_before, spec.base.proj_right), id_after);
    return make_coin(std::move(flip), std::move(pr));
}

/// Loads a coin from plain text: the dimension D, then the D² entries of Û
/// in row-major order as "re im" pairs, then the D/2 basis indices spanning
/// P̂_R. Whitespace separated; '#' starts a comment through end of line.
inline CoinSpec load_coin(std::istream& in, const Tolerances& tol = default_tolerances()) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::string clean;
    clean.reserve(text.size());
    bool in_comment = false;
    for (char ch : text) {
        if (ch == '#') in_comment = true;
        if (ch == '\n') in_comment = false;
        if (!in_comment) clean.push_back(ch);
    }
    std::istringstream s(clean);

    Index dim = 0;
    if (!(s >> dim) || dim < 2 || dim % 2 != 0) {
        throw ConfigError("coin file: dimension must be a positive even integer");
    }
    Matrix flip(dim, dim);
    for (Index r = 0; r < dim; ++r) {
        for (Index c = 0; c < dim; ++c) {
            double re = 0.0, im = 0.0;
            if (!(s >> re >> im)) {
                throw ConfigError("coin file: expected D² row-major entries as 're im' pairs");
            }
            flip(r, c) = Complex(re, im);
        }
    }
    Matrix pr = Matrix::Zero(dim, dim);
    for (Index i = 0; i < dim / 2; ++i) {
        long idx = -1;
        if (!(s >> idx) || idx < 0 || idx >= dim) {
            throw ConfigError("coin file: expected D/2 valid basis indices for P̂_R");
        }
        if (pr(idx, idx).real() != 0.0) {
            throw ConfigError("coin file: duplicate P̂_R basis index");
        }
        pr(idx, idx) = 1.0;
    }
    return make_coin(std::move(flip), std::move(pr), tol);
}

}  // namespace qwalk
