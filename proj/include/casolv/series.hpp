#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "casolv/scalar.hpp"

namespace casolv {

struct PoleTerm {
    Rational r;  // pole location reciprocal: a term contributes c * r^(n+k+1)
    Rational c;
};

// Pole/coefficient data generating a_k^(n) = sum_l c_l,k r_l,k^(n+k+1) plus a
// remainder realized as strictly smaller tail poles. The generative ground
// truth for all rate experiments.
class PoleModel {
public:
    static PoleModel shared(std::vector<PoleTerm> dominant, std::vector<PoleTerm> tail = {}) {
        PoleModel m;
        m.shared_ = true;
        m.dominant_ = {std::move(dominant)};
        m.tail_ = {std::move(tail)};
        m.validate();
        return m;
    }

    static PoleModel per_column(std::vector<std::vector<PoleTerm>> dominant,
                                std::vector<std::vector<PoleTerm>> tail = {}) {
        PoleModel m;
        m.shared_ = false;
        m.dominant_ = std::move(dominant);
        if (tail.empty()) tail.resize(m.dominant_.size());
        if (tail.size() != m.dominant_.size())
            throw std::invalid_argument("PoleModel: tail/dominant column count mismatch");
        m.tail_ = std::move(tail);
        m.validate();
        return m;
    }

    bool is_shared() const { return shared_; }

    // Shared models are defined for every column.
    bool in_range(int k) const {
        return k >= 0 && (shared_ || static_cast<std::size_t>(k) < dominant_.size());
    }

    const std::vector<PoleTerm>& dominant_at(int k) const { return column(dominant_, k); }
    const std::vector<PoleTerm>& tail_at(int k) const { return column(tail_, k); }

    int dominant_count(int k) const { return static_cast<int>(dominant_at(k).size()); }

    // Dominant then tail; strict modulus ordering is a class invariant.
    std::vector<PoleTerm> merged_poles(int k) const {
        std::vector<PoleTerm> out = dominant_at(k);
        const auto& t = tail_at(k);
        out.insert(out.end(), t.begin(), t.end());
        return out;
    }

    // Lemma-1 coefficient: sum over dominant AND tail poles; the tail sum is
    // the realized remainder b_k^(n).
    Rational coeff(int k, int n) const {
        check_range(k);
        if (n < 0) throw std::out_of_range("PoleModel::coeff: n < 0");
        Rational total(0);
        auto add = [&](const std::vector<PoleTerm>& terms) {
            for (const auto& t : terms)
                total += t.c * pow(t.r, static_cast<unsigned long>(n + k + 1));
        };
        add(dominant_at(k));
        add(tail_at(k));
        return total;
    }

    // Realized remainder b_k^(n) alone (tail poles only).
    Rational remainder(int k, int n) const {
        check_range(k);
        Rational total(0);
        for (const auto& t : tail_at(k))
            total += t.c * pow(t.r, static_cast<unsigned long>(n + k + 1));
        return total;
    }

    // rho for column k when the first j merged poles are treated as dominant:
    // halfway between |r_j| and the next modulus, or |r_j|/2 when r_j is last.
    // Satisfies |r_{j+1}| < rho < |r_j| by the strict ordering invariant.
    double rho(int k, int j) const {
        auto merged = merged_poles(k);
        if (j < 1 || static_cast<std::size_t>(j) > merged.size())
            throw std::out_of_range("PoleModel::rho: j out of range");
        double rj = std::abs(to_double(merged[j - 1].r));
        if (static_cast<std::size_t>(j) == merged.size()) return rj / 2.0;
        return (rj + std::abs(to_double(merged[j].r))) / 2.0;
    }

private:
    void check_range(int k) const {
        if (!in_range(k)) throw std::out_of_range("PoleModel: column index out of range");
    }

    const std::vector<PoleTerm>& column(const std::vector<std::vector<PoleTerm>>& v, int k) const {
        check_range(k);
        return v[shared_ ? 0 : static_cast<std::size_t>(k)];
    }

    void validate() const {
        for (std::size_t col = 0; col < dominant_.size(); ++col) {
            std::vector<PoleTerm> merged = dominant_[col];
            merged.insert(merged.end(), tail_[col].begin(), tail_[col].end());
            if (merged.empty()) throw std::invalid_argument("PoleModel: empty column");
            for (std::size_t i = 0; i < merged.size(); ++i) {
                if (merged[i].r == 0) throw std::invalid_argument("PoleModel: zero pole");
                if (merged[i].c == 0) throw std::invalid_argument("PoleModel: zero coefficient");
                if (i > 0 && !(abs(merged[i].r) < abs(merged[i - 1].r)))
                    throw std::invalid_argument("PoleModel: pole moduli not strictly decreasing");
            }
        }
    }

    bool shared_ = true;
    std::vector<std::vector<PoleTerm>> dominant_;
    std::vector<std::vector<PoleTerm>> tail_;
};

// Discretization parameter schedule. Sequence mode past the stored prefix
// falls back to the declared limit; Theorem-4 experiments require one.
class DeltaSchedule {
public:
    static DeltaSchedule constant(Rational value) {
        if (value == 0) throw std::invalid_argument("DeltaSchedule: delta must be nonzero");
        DeltaSchedule s;
        s.constant_ = value;
        return s;
    }

    static DeltaSchedule sequence(std::vector<Rational> values,
                                  std::optional<Rational> limit = std::nullopt) {
        for (const auto& v : values)
            if (v == 0) throw std::invalid_argument("DeltaSchedule: delta must be nonzero");
        if (limit && *limit == 0)
            throw std::invalid_argument("DeltaSchedule: zero limit");
        DeltaSchedule s;
        s.values_ = std::move(values);
        s.limit_ = limit;
        return s;
    }

    Rational at(int n) const {
        if (n < 0) throw std::out_of_range("DeltaSchedule::at: n < 0");
        if (constant_) return *constant_;
        if (static_cast<std::size_t>(n) < values_.size()) return values_[n];
        if (limit_) return *limit_;
        throw std::out_of_range("DeltaSchedule::at: past end of sequence without a limit");
    }

    bool has_limit() const { return constant_.has_value() || limit_.has_value(); }

    Rational limit() const {
        if (constant_) return *constant_;
        if (limit_) return *limit_;
        throw std::logic_error("DeltaSchedule::limit: no declared limit");
    }

    bool is_constant() const { return constant_.has_value(); }

private:
    std::optional<Rational> constant_;
    std::vector<Rational> values_;
    std::optional<Rational> limit_;
};

enum class Provenance { Poles, Recurrence };

// One dhLV evolution step on a coefficient row:
//   a_k^(n+1) = a_{k+M}^(n) + (delta^(n))^{M+1} a_k^(n).
// The output row is M entries shorter.
template <typename T>
std::vector<T> evolve_row(const std::vector<T>& row, const T& delta, int M) {
    if (M < 1) throw std::invalid_argument("evolve_row: M must be >= 1");
    if (static_cast<int>(row.size()) < M + 1)
        throw std::invalid_argument("evolve_row: row shorter than M+1");
    T factor = T(1);
    for (int i = 0; i < M + 1; ++i) factor *= delta;
    std::vector<T> next(row.size() - M);
    for (std::size_t k = 0; k < next.size(); ++k) next[k] = row[k + M] + factor * row[k];
    return next;
}

// The grid a_k^(n). Recurrence provenance loses M columns per time step;
// requests outside the stored range throw, never silently return zero.
template <typename T>
class CoefficientTable {
public:
    CoefficientTable(std::vector<std::vector<T>> rows, Provenance prov, int M)
        : rows_(std::move(rows)), provenance_(prov), M_(M) {
        if (rows_.empty()) throw std::invalid_argument("CoefficientTable: no rows");
    }

    Provenance provenance() const { return provenance_; }
    int hungry_degree() const { return M_; }
    int row_count() const { return static_cast<int>(rows_.size()); }
    int width(int n) const {
        check_row(n);
        return static_cast<int>(rows_[n].size());
    }

    const T& at(int k, int n) const {
        check_row(n);
        if (k < 0 || k >= static_cast<int>(rows_[n].size()))
            throw std::out_of_range("CoefficientTable::at: column out of range");
        return rows_[n][k];
    }

    const std::vector<T>& row(int n) const {
        check_row(n);
        return rows_[n];
    }

private:
    void check_row(int n) const {
        if (n < 0 || n >= static_cast<int>(rows_.size()))
            throw std::out_of_range("CoefficientTable: row out of range");
    }

    std::vector<std::vector<T>> rows_;
    Provenance provenance_;
    int M_;
};

// Rows n = 0..N, all of width K, straight from the pole sums.
inline CoefficientTable<Rational> build_table_from_poles(const PoleModel& model, int K, int N) {
    if (K < 1 || N < 0) throw std::invalid_argument("build_table_from_poles: bad dimensions");
    std::vector<std::vector<Rational>> rows(N + 1);
    for (int n = 0; n <= N; ++n) {
        rows[n].reserve(K);
        for (int k = 0; k < K; ++k) rows[n].push_back(model.coeff(k, n));
    }
    return CoefficientTable<Rational>(std::move(rows), Provenance::Poles, 0);
}

template <typename T>
CoefficientTable<T> build_table_from_recurrence(std::vector<T> seed, const DeltaSchedule& schedule,
                                                int M, int N) {
    if (N < 0) throw std::invalid_argument("build_table_from_recurrence: N < 0");
    if (static_cast<int>(seed.size()) <= N * M)
        throw std::invalid_argument("build_table_from_recurrence: seed row too short for N steps");
    std::vector<std::vector<T>> rows;
    rows.reserve(N + 1);
    rows.push_back(std::move(seed));
    for (int n = 0; n < N; ++n) {
        T delta;
        if constexpr (std::is_same_v<T, Rational>)
            delta = schedule.at(n);
        else
            delta = static_cast<T>(to_double(schedule.at(n)));
        rows.push_back(evolve_row(rows.back(), delta, M));
    }
    return CoefficientTable<T>(std::move(rows), Provenance::Recurrence, M);
}

inline CoefficientTable<double> to_float(const CoefficientTable<Rational>& t) {
    std::vector<std::vector<double>> rows(t.row_count());
    for (int n = 0; n < t.row_count(); ++n) {
        rows[n].reserve(t.row(n).size());
        for (const auto& q : t.row(n)) rows[n].push_back(to_double(q));
    }
    return CoefficientTable<double>(std::move(rows), t.provenance(), t.hungry_degree());
}

}  // namespace casolv
