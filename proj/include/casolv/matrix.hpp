#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <vector>

#include "casolv/scalar.hpp"

namespace casolv {

template <typename T>
class SquareMatrix {
public:
    explicit SquareMatrix(int order) : order_(order), entries_(static_cast<std::size_t>(order) * order) {
        if (order < 1) throw std::invalid_argument("SquareMatrix: order must be >= 1");
    }

    SquareMatrix(std::initializer_list<std::initializer_list<T>> rows)
        : SquareMatrix(static_cast<int>(rows.size())) {
        int r = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != order_)
                throw std::invalid_argument("SquareMatrix: ragged initializer");
            int c = 0;
            for (const auto& x : row) (*this)(r, c++) = x;
            ++r;
        }
    }

    int order() const { return order_; }

    T& operator()(int r, int c) { return entries_[static_cast<std::size_t>(r) * order_ + c]; }
    const T& operator()(int r, int c) const {
        return entries_[static_cast<std::size_t>(r) * order_ + c];
    }

private:
    int order_;
    std::vector<T> entries_;
};

// Leibniz expansion. Test oracle only; O(n!) so the order is capped.
template <typename T>
T det_bruteforce(const SquareMatrix<T>& m) {
    const int n = m.order();
    if (n > 5) throw std::invalid_argument("det_bruteforce: order > 5");
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    T total = T(0);
    do {
        // sign via inversion count
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (perm[i] > perm[j]) ++inv;
        T term = T(1);
        for (int i = 0; i < n; ++i) term *= m(i, perm[i]);
        if (inv % 2 == 0)
            total += term;
        else
            total -= term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

// Fraction-free (Bareiss) determinant. Rows are first scaled to integers so
// the elimination runs on mpz with exact divisions; the scale is divided out
// at the end. Singular input returns exactly 0.
inline Rational det_exact(const SquareMatrix<Rational>& m) {
    const int n = m.order();
    std::vector<std::vector<mpz_class>> a(n, std::vector<mpz_class>(n));
    mpz_class scale = 1;
    for (int r = 0; r < n; ++r) {
        mpz_class l = 1;
        for (int c = 0; c < n; ++c) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m(r, c).get_den_mpz_t());
        for (int c = 0; c < n; ++c) {
            mpz_class q = l / m(r, c).get_den();
            a[r][c] = m(r, c).get_num() * q;
        }
        scale *= l;
    }

    int sign = 1;
    mpz_class prev = 1;
    for (int k = 0; k + 1 < n; ++k) {
        int pivot = -1;
        for (int i = k; i < n; ++i)
            if (a[i][k] != 0) {
                pivot = i;
                break;
            }
        if (pivot < 0) return Rational(0);
        if (pivot != k) {
            std::swap(a[pivot], a[k]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                mpz_class t = a[k][k] * a[i][j] - a[i][k] * a[k][j];
                mpz_divexact(a[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    Rational det(sign > 0 ? a[n - 1][n - 1] : mpz_class(-a[n - 1][n - 1]), scale);
    det.canonicalize();
    return det;
}

struct FloatDetResult {
    double value = 0.0;
    // Cancellation magnitude: (product of row maxima) / |det|. Near 1 for
    // well-scaled diagonal-dominant input; huge when the determinant is the
    // residue of massive cancellation and the float value is untrustworthy.
    double growth = 1.0;
    bool singular = false;
};

// LU with partial pivoting.
inline FloatDetResult det_float(const SquareMatrix<double>& m) {
    const int n = m.order();
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    double hadamard = 1.0;
    for (int r = 0; r < n; ++r) {
        double rowmax = 0.0;
        for (int c = 0; c < n; ++c) {
            a[r][c] = m(r, c);
            rowmax = std::max(rowmax, std::abs(a[r][c]));
        }
        hadamard *= rowmax;
    }

    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int pivot = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[pivot][k])) pivot = i;
        if (a[pivot][k] == 0.0)
            return {0.0, std::numeric_limits<double>::infinity(), true};
        if (pivot != k) {
            std::swap(a[pivot], a[k]);
            det = -det;
        }
        det *= a[k][k];
        for (int i = k + 1; i < n; ++i) {
            double f = a[i][k] / a[k][k];
            for (int j = k + 1; j < n; ++j) a[i][j] -= f * a[k][j];
        }
    }

    FloatDetResult out;
    out.value = det;
    out.growth = det == 0.0 ? std::numeric_limits<double>::infinity()
                            : std::max(1.0, hadamard / std::abs(det));
    out.singular = det == 0.0;
    return out;
}

// Mode-dispatched determinant used by the determinant families.
inline Rational determinant(const SquareMatrix<Rational>& m) { return det_exact(m); }
inline double determinant(const SquareMatrix<double>& m) { return det_float(m).value; }

}  // namespace casolv
