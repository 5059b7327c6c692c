#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/tolerances.hpp"

namespace qwalk {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Kronecker product a ⊗ b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index r = 0; r < a.rows(); ++r) {
        for (Index c = 0; c < a.cols(); ++c) {
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        }
    }
    return out;
}

/// An operator flattened by column stacking: entry (r,c) sits at index c·D + r.
/// Under this convention the map X ↦ A·X·B has matrix Bᵀ ⊗ A.
struct VectorizedOperator {
    Index dim = 0;
    Vector vec;
};

inline VectorizedOperator vectorize(const Matrix& op) {
    if (op.rows() != op.cols()) {
        throw DimensionMismatch("vectorize expects a square operator");
    }
    // Eigen stores column-major, so the raw buffer already column-stacks.
    return {op.rows(), Eigen::Map<const Vector>(op.data(), op.size())};
}

inline Matrix devectorize(const VectorizedOperator& v) {
    if (v.vec.size() != v.dim * v.dim) {
        throw DimensionMismatch("vectorized operator length must equal dim²");
    }
    return Eigen::Map<const Matrix>(v.vec.data(), v.dim, v.dim);
}

inline Matrix devectorize(const Vector& vec, Index dim) {
    return devectorize(VectorizedOperator{dim, vec});
}

inline bool is_unitary(const Matrix& u, double tol) {
    if (u.rows() != u.cols() || u.size() == 0) return false;
    Matrix gram = u.adjoint() * u;
    gram -= Matrix::Identity(u.rows(), u.cols());
    return max_abs(gram) <= tol;
}

/// Eigendecomposition of a unitary matrix: columns of `vectors` are
/// orthonormal eigenvectors matching the unit-modulus `values`.
///
/// Uses the complex Schur form. For a normal matrix the triangular factor is
/// diagonal, so the Schur basis is an orthonormal eigenbasis even when
/// eigenvalues coincide (where a generic eigensolver may return a skewed
/// basis).
struct UnitaryEigensystem {
    Vector values;
    Matrix vectors;
};

inline UnitaryEigensystem eig_unitary(const Matrix& u,
                                      const Tolerances& tol = default_tolerances()) {
    if (u.rows() != u.cols()) {
        throw DimensionMismatch("eig_unitary expects a square matrix");
    }
    if (!is_unitary(u, tol.unitarity)) {
        throw NotUnitary("matrix fails the unitarity bound on max|U†U − I|");
    }
    Eigen::ComplexSchur<Matrix> schur(u, /*computeU=*/true);
    if (schur.info() != Eigen::Success) {
        throw NotUnitary("Schur decomposition failed to converge");
    }
    return {schur.matrixT().diagonal(), schur.matrixU()};
}

/// Clusters of eigenvalue indices whose angular distance on the unit circle
/// stays below `angle_tol`, including across the ±π wrap.
inline std::vector<std::vector<Index>> group_degenerate(const Vector& values,
                                                        double angle_tol) {
    const Index n = values.size();
    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::vector<double> angle(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) angle[static_cast<size_t>(i)] = std::arg(values[i]);
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return angle[static_cast<size_t>(a)] < angle[static_cast<size_t>(b)]; });

    std::vector<std::vector<Index>> groups;
    for (size_t pos = 0; pos < order.size(); ++pos) {
        const Index i = order[pos];
        if (pos > 0 &&
            angle[static_cast<size_t>(i)] - angle[static_cast<size_t>(order[pos - 1])] < angle_tol) {
            groups.back().push_back(i);
        } else {
            groups.push_back({i});
        }
    }
    if (groups.size() > 1) {
        // e^{iπ} and e^{−iπ} are the same point on the circle.
        const double wrap_gap = angle[static_cast<size_t>(order.front())] + 2.0 * std::numbers::pi -
                                angle[static_cast<size_t>(order.back())];
        if (wrap_gap < angle_tol) {
            auto& last = groups.back();
            last.insert(last.end(), groups.front().begin(), groups.front().end());
            groups.erase(groups.begin());
        }
    }
    return groups;
}

/// Projector, in column-stacked operator space, onto traceless operators:
/// X ↦ X − Tr(X)·I/D.
inline Matrix traceless_projector(Index dim) {
    const Index n = dim * dim;
    const Vector vec_id = vectorize(Matrix::Identity(dim, dim)).vec;
    Matrix p = Matrix::Identity(n, n);
    p -= vec_id * vec_id.adjoint() / static_cast<double>(dim);
    return p;
}

/// Solves m·x = rhs restricted to the range of an orthogonal projector.
///
/// `m` must map the subspace into itself and be nonsingular there. The
/// complement is padded with the identity so one LU factorization serves the
/// whole space. Near-singular restrictions are rejected via a 1-norm
/// condition estimate: they signal a (near-)degenerate unit eigenvalue, as
/// when a noise channel approaches the unitary limit.
inline Vector solve_on_subspace(const Matrix& m, const Vector& rhs, const Matrix& projector,
                                const Tolerances& tol = default_tolerances()) {
    const Index n = m.rows();
    if (m.cols() != n || projector.rows() != n || projector.cols() != n || rhs.size() != n) {
        throw DimensionMismatch("solve_on_subspace: incompatible shapes");
    }
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) return Vector::Zero(n);

    const Vector projected_rhs = projector * rhs;
    if ((projected_rhs - rhs).norm() > tol.subspace_membership * rhs_norm) {
        throw DomainError("solve_on_subspace: rhs is not in the range of the projector");
    }

    Matrix padded = projector * m * projector;
    padded += Matrix::Identity(n, n) - projector;
    Eigen::PartialPivLU<Matrix> lu(padded);
    const double rcond = lu.rcond();
    if (!(rcond > 0.0) || 1.0 / rcond > tol.condition_bound) {
        throw SingularOnSubspace(
            "restricted system is numerically singular (condition estimate above bound); "
            "for noise channels this indicates the unitary limit");
    }
    Vector x = projector * lu.solve(projected_rhs);
    if ((m * x - rhs).norm() > tol.solve_residual * rhs_norm) {
        throw SingularOnSubspace("restricted solve residual exceeds tolerance");
    }
    return x;
}

}  // namespace qwalk
