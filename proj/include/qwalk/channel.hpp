#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "qwalk/coin.hpp"
#include "qwalk/linalg.hpp"

namespace qwalk {

/// A Kraus operator set {Â_n} that is completely positive, trace preserving
/// (Σ Â†Â = I) and unital (Σ ÂÂ† = I). Validation enforces both sums.
struct KrausChannel {
    Index dim = 0;
    std::vector<Matrix> ops;
};

inline KrausChannel make_channel(std::vector<Matrix> ops,
                                 const Tolerances& tol = default_tolerances()) {
    if (ops.empty()) throw DomainError("channel needs at least one Kraus operator");
    const Index dim = ops.front().rows();
    Matrix sum_tp = Matrix::Zero(dim, dim);
    Matrix sum_unital = Matrix::Zero(dim, dim);
    for (const Matrix& a : ops) {
        if (a.rows() != dim || a.cols() != dim) {
            throw DimensionMismatch("all Kraus operators must be square and equally sized");
        }
        sum_tp += a.adjoint() * a;
        sum_unital += a * a.adjoint();
    }
    const Matrix id = Matrix::Identity(dim, dim);
    if (max_abs(sum_tp - id) > tol.kraus_completeness) {
        throw DomainError("Kraus set is not trace preserving: Σ Â†Â ≠ I");
    }
    if (max_abs(sum_unital - id) > tol.kraus_completeness) {
        throw DomainError("Kraus set is not unital: Σ ÂÂ† ≠ I");
    }
    return {dim, std::move(ops)};
}

/// The zero-noise channel: a single identity Kraus operator.
inline KrausChannel identity_channel(Index dim) {
    std::vector<Matrix> ops;
    ops.push_back(Matrix::Identity(dim, dim));
    return {dim, std::move(ops)};
}

/// Pure dephasing of a two-level coin,
/// Â_{0,1} = (1/√2)(e^{±iθ}|R⟩⟨R| + e^{∓iθ}|L⟩⟨L|).
/// θ = 0 is the identity map; θ = π/4 erases coin coherences in one
/// application. Angles outside [0, π/4] alias smaller ones and are rejected.
inline KrausChannel dephasing_channel(double theta,
                                      const Tolerances& tol = default_tolerances()) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi / 4.0)) {
        throw DomainError("dephasing angle must lie in [0, pi/4]");
    }
    const double s = 1.0 / std::sqrt(2.0);
    Matrix a0 = Matrix::Zero(2, 2);
    Matrix a1 = Matrix::Zero(2, 2);
    a0(0, 0) = s * std::exp(Complex(0.0, theta));
    a0(1, 1) = s * std::exp(Complex(0.0, -theta));
    a1(0, 0) = s * std::exp(Complex(0.0, -theta));
    a1(1, 1) = s * std::exp(Complex(0.0, theta));
    std::vector<Matrix> ops;
    ops.push_back(std::move(a0));
    ops.push_back(std::move(a1));
    return make_channel(std::move(ops), tol);
}

/// χ ↦ Σ_n Â_n χ Â_n†.
inline Matrix apply_channel(const KrausChannel& channel, const Matrix& chi) {
    if (chi.rows() != channel.dim || chi.cols() != channel.dim) {
        throw DimensionMismatch("operator dimension does not match channel");
    }
    Matrix out = Matrix::Zero(channel.dim, channel.dim);
    for (const Matrix& a : channel.ops) out += a * chi * a.adjoint();
    return out;
}

/// Lifts a two-level channel onto one slot of an M-coin tensor space.
inline KrausChannel embed_on_slot(const KrausChannel& channel, int m, int slot,
                                  const Tolerances& tol = default_tolerances()) {
    if (channel.dim != 2) throw DimensionMismatch("slot embedding expects a two-level channel");
    if (slot < 0 || slot >= m) throw DomainError("slot index out of range");
    const Index before = Index{1} << slot;
    const Index after = Index{1} << (m - 1 - slot);
    const Matrix id_before = Matrix::Identity(before, before);
    const Matrix id_after = Matrix::Identity(after, after);
    std::vector<Matrix> ops;
    ops.reserve(channel.ops.size());
    for (const Matrix& a : channel.ops) {
        ops.push_back(kron(kron(id_before, a), id_after));
    }
    return make_channel(std::move(ops), tol);
}

/// Matrix of a coin-space evolution map on column-stacked operators.
struct SuperOperator {
    Index dim = 0;  // coin dimension D; `matrix` is D²×D²
    Matrix matrix;
};

/// Full off-diagonal evolution superoperator,
/// χ ↦ Σ_n U_k Â_n χ Â_n† U_{k′}†, as a D²×D² matrix. With column stacking
/// each term contributes conj(U_{k′}Â_n) ⊗ (U_k Â_n).
inline SuperOperator superop_offdiag(const CoinSpec& coin, const KrausChannel& channel,
                                     double k, double kprime) {
    if (coin.dim != channel.dim) {
        throw DimensionMismatch("channel dimension does not match coin dimension");
    }
    const Matrix uk = u_k(coin, k);
    const Matrix ukprime = u_k(coin, kprime);
    Matrix s = Matrix::Zero(coin.dim * coin.dim, coin.dim * coin.dim);
    for (const Matrix& a : channel.ops) {
        const Matrix left = uk * a;
        const Matrix right = ukprime * a;
        s += kron(right.conjugate(), left);
    }
    return {coin.dim, std::move(s)};
}

/// Diagonal evolution superoperator L_k ≡ L_kk. The channel acts before the
/// flip, so the map is U_k ∘ A, and the diagonal case is unital and trace
/// preserving.
inline SuperOperator superop_k(const CoinSpec& coin, const KrausChannel& channel, double k) {
    return superop_offdiag(coin, channel, k, k);
}

inline Matrix apply_superop(const SuperOperator& s, const Matrix& chi) {
    return devectorize(Vector(s.matrix * vectorize(chi).vec), s.dim);
}

}  // namespace qwalk
