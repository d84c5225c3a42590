#pragma once

// Test-side oracles, deliberately independent of the library implementation
// paths they are used to check.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

// Dense linear solve (partial pivoting), independent of hybris::solve_linear.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> m,
                                       std::vector<double> b) {
    const std::size_t n = m.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (std::abs(m[piv][c]) < 1e-14) throw std::runtime_error("oracle gauss: singular");
        std::swap(m[piv], m[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r][c] / m[c][c];
            for (std::size_t j = c; j < n; ++j) m[r][j] -= f * m[c][j];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= m[i][j] * x[j];
        x[i] = acc / m[i][i];
    }
    return x;
}

// Kronecker product on nested-vector matrices.
inline std::vector<std::vector<double>> kron(const std::vector<std::vector<double>>& a,
                                             const std::vector<std::vector<double>>& b) {
    const std::size_t ar = a.size(), ac = a[0].size();
    const std::size_t br = b.size(), bc = b[0].size();
    std::vector<std::vector<double>> r(ar * br, std::vector<double>(ac * bc, 0.0));
    for (std::size_t i = 0; i < ar; ++i)
        for (std::size_t j = 0; j < ac; ++j)
            for (std::size_t k = 0; k < br; ++k)
                for (std::size_t l = 0; l < bc; ++l)
                    r[i * br + k][j * bc + l] = a[i][j] * b[k][l];
    return r;
}

// Roots of the characteristic polynomial of a symmetric 2x2 [[a,b],[b,c]].
struct Sym2Roots {
    double lo, hi;
};
inline Sym2Roots sym2_eigs(double a, double b, double c) {
    const double tr = a + c;
    const double det = a * c - b * b;
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
}

inline std::mt19937 rng(unsigned seed) { return std::mt19937(seed); }

inline double uniform(std::mt19937& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

}  // namespace oracle
