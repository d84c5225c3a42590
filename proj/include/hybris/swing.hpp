#pragma once

// Linearized swing-equation grid model and the average-mode elimination.
// The raw model is marginally stable (the susceptance matrix annihilates the
// all-ones phase shift); projecting the phase angles onto the orthogonal
// complement of span(1) yields a Hurwitz system of dimension 2 n1 - 1 whose
// output map is unchanged.

#include <cmath>
#include <vector>

#include "hybris/matrix.hpp"

namespace hybris {

struct SwingGridSpec {
    Mat y_susceptance;  // n1 x n1, symmetric, zero row sums
    Vec inertia;        // n1, entrywise positive
    Vec damping;        // n1, entrywise positive
    Mat b1;             // n1 x m generator selector
    Mat e1;             // n1 x q load selector

    std::size_t nodes() const { return y_susceptance.rows(); }

    void check() const {
        const std::size_t n1 = nodes();
        if (!y_susceptance.square()) throw DimensionError("swing: Y not square");
        if (inertia.size() != n1 || damping.size() != n1)
            throw DimensionError("swing: inertia/damping length");
        if (b1.rows() != n1 || e1.rows() != n1) throw DimensionError("swing: selector rows");
        for (std::size_t i = 0; i < n1; ++i) {
            if (!(inertia[i] != 0.0)) throw DimensionError("swing: zero inertia entry");
            if (!(damping[i] > 0.0)) throw DimensionError("swing: damping must be positive");
            double row = 0.0;
            for (std::size_t j = 0; j < n1; ++j) {
                row += y_susceptance(i, j);
                if (std::abs(y_susceptance(i, j) - y_susceptance(j, i)) > 1e-10)
                    throw DimensionError("swing: Y must be symmetric");
            }
            if (std::abs(row) > 1e-10)
                throw ZeroRowSumError("swing: Y row " + std::to_string(i) +
                                      " sums to " + std::to_string(row));
        }
    }
};

struct SwingModel {
    Mat a, b, e, c;                   // reduced (2 n1 - 1)-state system
    Mat a_bar, b_bar, e_bar, c_bar;   // raw 2 n1-state system
    Mat t_mat;                        // blkdiag(U, I)
    Mat u_basis;                      // n1 x (n1 - 1), orthonormal, orthogonal to 1
};

namespace detail {

/// Raw swing matrices for a given inertia vector (attacks may perturb it).
inline Mat swing_a_bar(const SwingGridSpec& spec, const Vec& inertia) {
    const std::size_t n1 = spec.nodes();
    Mat a(2 * n1, 2 * n1);
    for (std::size_t i = 0; i < n1; ++i) {
        a(i, n1 + i) = 1.0;
        for (std::size_t j = 0; j < n1; ++j)
            a(n1 + i, j) = -spec.y_susceptance(i, j) / inertia[i];
        a(n1 + i, n1 + i) = -spec.damping[i] / inertia[i];
    }
    return a;
}

}  // namespace detail

/// Assembles the reduced model: A = T^T A_bar T and friends, with U the
/// eigenvectors of Y at nonzero eigenvalues.
inline SwingModel build_swing_model(const SwingGridSpec& spec) {
    spec.check();
    const std::size_t n1 = spec.nodes();
    SwingModel m;

    SymEig ey = sym_eig(spec.y_susceptance);
    // the zero eigenvalue (all-ones direction) must be simple
    std::size_t zero_idx = 0;
    double zero_best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n1; ++k)
        if (std::abs(ey.values[k]) < zero_best) {
            zero_best = std::abs(ey.values[k]);
            zero_idx = k;
        }
    if (zero_best > 1e-8)
        throw AverageModeError("swing: Y has no zero eigenvalue to eliminate");
    for (std::size_t k = 0; k < n1; ++k)
        if (k != zero_idx && std::abs(ey.values[k]) < 1e-8)
            throw AverageModeError("swing: zero eigenvalue of Y is repeated");

    m.u_basis = Mat(n1, n1 - 1);
    std::size_t col = 0;
    for (std::size_t k = 0; k < n1; ++k) {
        if (k == zero_idx) continue;
        for (std::size_t i = 0; i < n1; ++i) m.u_basis(i, col) = ey.vectors(i, k);
        ++col;
    }

    m.t_mat = Mat(2 * n1, 2 * n1 - 1);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j + 1 < n1; ++j) m.t_mat(i, j) = m.u_basis(i, j);
    for (std::size_t i = 0; i < n1; ++i) m.t_mat(n1 + i, (n1 - 1) + i) = 1.0;

    m.a_bar = detail::swing_a_bar(spec, spec.inertia);
    m.b_bar = Mat(2 * n1, spec.b1.cols());
    m.e_bar = Mat(2 * n1, spec.e1.cols());
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < spec.b1.cols(); ++j) m.b_bar(n1 + i, j) = spec.b1(i, j);
        for (std::size_t j = 0; j < spec.e1.cols(); ++j) m.e_bar(n1 + i, j) = spec.e1(i, j);
    }
    // output: line flows Y theta and the average frequency
    m.c_bar = Mat(n1 + 1, 2 * n1);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n1; ++j) m.c_bar(i, j) = spec.y_susceptance(i, j);
    for (std::size_t j = 0; j < n1; ++j) m.c_bar(n1, n1 + j) = 1.0 / double(n1);

    m.a = m.t_mat.transpose() * m.a_bar * m.t_mat;
    m.b = m.t_mat.transpose() * m.b_bar;
    m.e = m.t_mat.transpose() * m.e_bar;
    m.c = m.c_bar * m.t_mat;

    auto hz = is_hurwitz(m.a);
    if (!hz.hurwitz)
        throw NotHurwitzError("swing: reduced A is not Hurwitz (max Re = " +
                              std::to_string(hz.max_real_part) + ")");
    return m;
}

/// Reduced A for an inertia-perturbed mode, reusing the nominal basis.
inline Mat swing_mode_a(const SwingGridSpec& spec, const Vec& inertia, const Mat& t_mat) {
    if (inertia.size() != spec.nodes()) throw DimensionError("swing_mode_a: inertia length");
    return t_mat.transpose() * detail::swing_a_bar(spec, inertia) * t_mat;
}

/// Repairs small row-sum defects by recomputing the diagonal from the
/// off-diagonal entries (published matrices are often rounded).
inline Mat repair_row_sums(Mat y) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < y.cols(); ++j)
            if (j != i) off += y(i, j);
        y(i, i) = -off;
    }
    return y;
}

}  // namespace hybris
