#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "casolv/matrix.hpp"
#include "casolv/series.hpp"

namespace casolv {

// H_j^(n): (p,q) entry a^(n+p+q) over a single sequence. H_0 := 1.
template <typename T>
T hankel_det(std::span<const T> series, int j, int n) {
    if (j < 0 || n < 0) throw std::out_of_range("hankel_det: negative index");
    if (j == 0) return T(1);
    if (n + 2 * j - 2 >= static_cast<int>(series.size()))
        throw std::out_of_range("hankel_det: series too short");
    SquareMatrix<T> m(j);
    for (int p = 0; p < j; ++p)
        for (int q = 0; q < j; ++q) m(p, q) = series[n + p + q];
    return determinant(m);
}

template <typename T>
T hankel_det(const std::vector<T>& series, int j, int n) {
    return hankel_det(std::span<const T>(series), j, n);
}

// C_{k,j}^(n): (p,q) entry a_{k+q}^(n+p). C_{k,0} := 1.
template <typename T>
T casorati_det(const CoefficientTable<T>& table, int k, int j, int n) {
    if (j < 0 || k < 0 || n < 0) throw std::out_of_range("casorati_det: negative index");
    if (j == 0) return T(1);
    SquareMatrix<T> m(j);
    for (int p = 0; p < j; ++p)
        for (int q = 0; q < j; ++q) m(p, q) = table.at(k + q, n + p);
    return determinant(m);
}

// G_{i,j}^(n): (p,q) entry a_{i+Mp+q}^(n) -- one time row, stride M down the
// columns. G_{i,0} := 1.
template <typename T>
T g_det(const CoefficientTable<T>& table, int i, int j, int n, int M) {
    if (j < 0 || i < 0 || n < 0) throw std::out_of_range("g_det: negative index");
    if (M < 1) throw std::invalid_argument("g_det: M must be >= 1");
    if (j == 0) return T(1);
    SquareMatrix<T> m(j);
    for (int p = 0; p < j; ++p)
        for (int q = 0; q < j; ++q) m(p, q) = table.at(i + M * p + q, n);
    return determinant(m);
}

// Assembles the tau block matrix for k = i + j(M+1), 0 <= i <= M.
//
// Row/column index set: {(p, s) : 0 <= p < j, 0 <= s <= M} followed by
// {(j, s) : 0 <= s < i}; entry ((p,s),(q,t)) = delta_{st} * a_{pM+q+s}^(n).
// Reading the indices blockwise reproduces the displayed form: block (p,q)
// for p,q < j is the diagonal (M+1)x(M+1) block diag(a_{pM+q},..,a_{pM+q+M}),
// the last block column holds the i-column-wide diagonal blocks starting at
// a_{pM+j}, the last block row those starting at a_{jM+q}, and the corner is
// the i x i block diag(a_{j(M+1)},..). Collecting rows and columns with equal
// s makes the matrix block-diagonal with blocks G_{s,j+1} (s < i) and G_{s,j}
// (s >= i), which is the factorization check below.
template <typename T>
SquareMatrix<T> tau_matrix(const CoefficientTable<T>& table, int k, int n, int M) {
    const int j = k / (M + 1);
    const int i = k % (M + 1);
    std::vector<std::pair<int, int>> index;  // (p, s)
    for (int p = 0; p < j; ++p)
        for (int s = 0; s <= M; ++s) index.emplace_back(p, s);
    for (int s = 0; s < i; ++s) index.emplace_back(j, s);
    const int order = static_cast<int>(index.size());
    SquareMatrix<T> m(order);
    for (int a = 0; a < order; ++a)
        for (int b = 0; b < order; ++b) {
            auto [p, s] = index[a];
            auto [q, t] = index[b];
            m(a, b) = (s == t) ? table.at(p * M + q + s, n) : T(0);
        }
    return m;
}

// tau_k^(n) as the block determinant. tau_0 := 1.
template <typename T>
T tau(const CoefficientTable<T>& table, int k, int n, int M) {
    if (k < 0 || n < 0) throw std::out_of_range("tau: negative index");
    if (M < 1) throw std::invalid_argument("tau: M must be >= 1");
    if (k == 0) return T(1);
    return determinant(tau_matrix(table, k, n, M));
}

struct IdentityCheck {
    bool pass;
    Rational lhs;
    Rational rhs;
};

// tau_{i+j(M+1)} = (prod_{l<i} G_{l,j+1}) * (prod_{l=i}^{M} G_{l,j}), exact.
inline IdentityCheck check_tau_factorization(const CoefficientTable<Rational>& table, int j, int i,
                                             int n, int M) {
    if (i < 0 || i > M) throw std::out_of_range("check_tau_factorization: i out of range");
    Rational lhs = tau(table, i + j * (M + 1), n, M);
    Rational rhs(1);
    for (int l = 0; l < i; ++l) rhs *= g_det(table, l, j + 1, n, M);
    for (int l = i; l <= M; ++l) rhs *= g_det(table, l, j, n, M);
    return {lhs == rhs, lhs, rhs};
}

// G_{i,j}^(n) = C_{i,j}^(n); the row reduction behind it uses the evolution
// relation, so only recurrence-provenance tables qualify.
inline IdentityCheck check_g_equals_casorati(const CoefficientTable<Rational>& table, int i, int j,
                                             int n, int M) {
    if (table.provenance() != Provenance::Recurrence)
        throw std::invalid_argument("check_g_equals_casorati: table must be recurrence-provenance");
    if (M != table.hungry_degree())
        throw std::invalid_argument("check_g_equals_casorati: M does not match table");
    Rational lhs = g_det(table, i, j, n, M);
    Rational rhs = casorati_det(table, i, j, n);
    return {lhs == rhs, lhs, rhs};
}

}  // namespace casolv
