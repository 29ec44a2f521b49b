#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casolv/determinants.hpp"
#include "casolv/series.hpp"

namespace casolv {

struct ZeroDenominatorError : std::runtime_error {
    explicit ZeroDenominatorError(int k_)
        : std::runtime_error("zero denominator at k=" + std::to_string(k_)), k(k_) {}
    int k;
};

struct ZeroCasoratiError : std::runtime_error {
    ZeroCasoratiError(int i_, int j_)
        : std::runtime_error("vanishing Casorati determinant C_{" + std::to_string(i_) + "," +
                             std::to_string(j_) + "}"),
          i(i_),
          j(j_) {}
    int i, j;
};

// dhLV variables u_k^(n), k = 0..(M+1)m-M-1. The M boundary zeros on each
// side are implicit in at(); they are never stored.
template <typename T>
struct DhlvState {
    int M;
    int m;
    std::vector<T> u;

    DhlvState(int M_, int m_) : M(M_), m(m_), u(interior_size(M_, m_), T(0)) {
        if (M_ < 1 || m_ < 1) throw std::invalid_argument("DhlvState: M, m must be >= 1");
    }

    static int interior_size(int M, int m) { return (M + 1) * m - M; }
    int size() const { return static_cast<int>(u.size()); }

    T at(int k) const {
        if (k < -M || k >= (M + 1) * m) throw std::out_of_range("DhlvState::at");
        if (k < 0 || k >= size()) return T(0);
        return u[k];
    }
};

// v_k^(n), k = M..(M+1)m-1.
template <typename T>
struct AuxiliaryRow {
    int M;
    int m;
    std::vector<T> v;

    AuxiliaryRow(int M_, int m_) : M(M_), m(m_), v((M_ + 1) * m_ - M_, T(0)) {}

    int first_index() const { return M; }
    int last_index() const { return (M + 1) * m - 1; }

    T at(int k) const {
        if (k < first_index() || k > last_index()) throw std::out_of_range("AuxiliaryRow::at");
        return v[k - M];
    }
    T& ref(int k) { return v[k - M]; }
};

namespace detail {
template <typename T>
bool is_zero(const T& x) {
    return x == T(0);
}
}  // namespace detail

// v_k^(n) = u_{k-M}^(n) * prod_{j=1}^{M} (delta_n + u_{k-M-j}^(n)).
template <typename T>
AuxiliaryRow<T> v_from_u(const DhlvState<T>& state, const T& delta_n) {
    AuxiliaryRow<T> out(state.M, state.m);
    for (int k = out.first_index(); k <= out.last_index(); ++k) {
        T val = state.at(k - state.M);
        for (int j = 1; j <= state.M; ++j) val *= delta_n + state.at(k - state.M - j);
        out.ref(k) = val;
    }
    return out;
}

// Inverts v_from_u in increasing k; the boundary zeros close the recursion.
template <typename T>
DhlvState<T> u_from_v(const AuxiliaryRow<T>& v, const T& delta_n) {
    DhlvState<T> out(v.M, v.m);
    for (int k = 0; k < out.size(); ++k) {
        T den = T(1);
        for (int l = 1; l <= v.M; ++l) den *= delta_n + out.at(k - l);
        if (detail::is_zero(den)) throw ZeroDenominatorError(k);
        out.u[k] = v.at(k + v.M) / den;
    }
    return out;
}

// One dhLV time step,
//   u_k^(n+1) = u_k^(n) prod_j (delta_n + u_{k+j}^(n))
//                      / prod_j (delta_{n+1} + u_{k-j}^(n+1)),
// evaluated in increasing k: the denominator only needs already-computed
// time-(n+1) values at smaller k, with boundary zeros closing it at k=0.
template <typename T>
DhlvState<T> dhlv_step(const DhlvState<T>& state, const T& delta_n, const T& delta_n1) {
    DhlvState<T> next(state.M, state.m);
    for (int k = 0; k < state.size(); ++k) {
        T num = state.u[k];
        for (int j = 1; j <= state.M; ++j) num *= delta_n + state.at(k + j);
        T den = T(1);
        for (int j = 1; j <= state.M; ++j) den *= delta_n1 + next.at(k - j);
        if (detail::is_zero(den)) throw ZeroDenominatorError(k);
        next.u[k] = num / den;
    }
    return next;
}

// Lemma-2 representation of the auxiliary row:
//   v_{i+j(M+1)} = C_{i,j+1} C_{i+1,j-1} / (C_{i,j} C_{i+1,j}),  i<M, 1<=j<m
//   v_{M+j(M+1)} = C_{M,j+1} C_{0,j}   / (C_{M,j} C_{0,j+1}),    0<=j<m.
template <typename T>
AuxiliaryRow<T> v_from_determinants(const CoefficientTable<T>& table, int M, int m, int n) {
    if (table.provenance() != Provenance::Recurrence)
        throw std::invalid_argument("v_from_determinants: table must be recurrence-provenance");
    if (M != table.hungry_degree())
        throw std::invalid_argument("v_from_determinants: M does not match table");
    AuxiliaryRow<T> out(M, m);
    auto C = [&](int i, int j) { return casorati_det(table, i, j, n); };
    auto nonzero = [&](T d, int i, int j) {
        if (detail::is_zero(d)) throw ZeroCasoratiError(i, j);
        return d;
    };
    for (int j = 1; j < m; ++j)
        for (int i = 0; i < M; ++i)
            out.ref(i + j * (M + 1)) = C(i, j + 1) * C(i + 1, j - 1) /
                                       (nonzero(C(i, j), i, j) * nonzero(C(i + 1, j), i + 1, j));
    for (int j = 0; j < m; ++j)
        out.ref(M + j * (M + 1)) = C(M, j + 1) * C(0, j) /
                                   (nonzero(C(M, j), M, j) * nonzero(C(0, j + 1), 0, j + 1));
    return out;
}

// Independent route: v_k^(n) = tau_{k+1} tau_{k-M} / (tau_k tau_{k-M+1}).
template <typename T>
AuxiliaryRow<T> v_from_tau_ratio(const CoefficientTable<T>& table, int M, int m, int n) {
    AuxiliaryRow<T> out(M, m);
    for (int k = out.first_index(); k <= out.last_index(); ++k) {
        T den = tau(table, k, n, M) * tau(table, k - M + 1, n, M);
        if (detail::is_zero(den)) throw ZeroCasoratiError(k % (M + 1), k / (M + 1));
        out.ref(k) = tau(table, k + 1, n, M) * tau(table, k - M, n, M) / den;
    }
    return out;
}

enum class LimitClass { ToZero, ToConstant, Inconclusive };

enum class ConvergenceStatus { Pass, Fail, Inconclusive, OutsideTheoremScope };

struct IndexClassification {
    int index;
    LimitClass cls;
    double estimate;  // meaningful for ToConstant
    double residual;  // final |value| (ToZero) or final relative step (ToConstant)
};

struct ConvergenceReport {
    std::vector<IndexClassification> u_classes;
    std::vector<IndexClassification> v_classes;
    std::vector<double> c_bar;          // u_{j(M+1)} limit estimates, j = 0..m-1
    std::vector<double> c_hat;          // v_{M+j(M+1)} limit estimates
    std::vector<double> cross_residual; // |c_bar - c_hat/delta^M| / |c_bar|
    bool pattern_ok = false;
    bool cross_ok = false;
    bool cross_skipped = false;
    bool vacuous = false;  // identically-zero trajectory: the fixed point
    ConvergenceStatus status = ConvergenceStatus::Inconclusive;
};

struct ConvergenceOptions {
    double zero_threshold = 1e-8;
    double constant_rel_tol = 1e-8;
    double cross_rel_tol = 1e-6;
    double cross_min_delta = 1e-3;
    int monotone_samples = 5;
};

namespace detail {

inline IndexClassification classify_sequence(int index, const std::vector<double>& samples,
                                             const ConvergenceOptions& opt) {
    IndexClassification out{index, LimitClass::Inconclusive, 0.0, 0.0};
    const int n = static_cast<int>(samples.size());
    if (n < opt.monotone_samples + 1) return out;
    double last = samples.back();
    if (std::abs(last) < opt.zero_threshold) {
        bool monotone = true;
        for (int t = n - opt.monotone_samples; t < n; ++t)
            if (std::abs(samples[t]) > std::abs(samples[t - 1]) * (1 + 1e-12)) monotone = false;
        if (monotone) {
            out.cls = LimitClass::ToZero;
            out.residual = std::abs(last);
            return out;
        }
        return out;
    }
    double worst = 0.0;
    for (int t = n - opt.monotone_samples; t < n; ++t)
        worst = std::max(worst, std::abs(samples[t] - samples[t - 1]) / std::abs(samples[t]));
    if (worst < opt.constant_rel_tol) {
        out.cls = LimitClass::ToConstant;
        out.estimate = last;
        out.residual = worst;
    }
    return out;
}

}  // namespace detail

// Classifies every u and v index against the Theorem 3/4 survive/vanish
// pattern and cross-checks c_bar_j against c_hat_j / delta^M.
inline ConvergenceReport convergence_check(const std::vector<DhlvState<double>>& u_traj,
                                           const std::vector<AuxiliaryRow<double>>& v_traj,
                                           const DeltaSchedule& schedule,
                                           const ConvergenceOptions& opt = {}) {
    if (u_traj.size() < 10 || u_traj.size() != v_traj.size())
        throw std::invalid_argument("convergence_check: trajectory too short or mismatched");
    const int M = u_traj.front().M;
    const int m = u_traj.front().m;

    ConvergenceReport report;
    bool any_inconclusive = false;

    bool all_zero = true;
    for (const auto& st : u_traj)
        for (double x : st.u)
            if (x != 0.0) all_zero = false;

    auto collect_u = [&](int k) {
        std::vector<double> s;
        s.reserve(u_traj.size());
        for (const auto& st : u_traj) s.push_back(st.u[k]);
        return s;
    };
    auto collect_v = [&](int k) {
        std::vector<double> s;
        s.reserve(v_traj.size());
        for (const auto& row : v_traj) s.push_back(row.at(k));
        return s;
    };

    bool pattern_ok = true;
    for (int k = 0; k < u_traj.front().size(); ++k) {
        auto cls = detail::classify_sequence(k, collect_u(k), opt);
        if (cls.cls == LimitClass::Inconclusive) any_inconclusive = true;
        LimitClass expected = (k % (M + 1) == 0) ? LimitClass::ToConstant : LimitClass::ToZero;
        if (cls.cls != expected) pattern_ok = false;
        if (k % (M + 1) == 0) report.c_bar.push_back(cls.estimate);
        report.u_classes.push_back(cls);
    }
    for (int k = M; k <= (M + 1) * m - 1; ++k) {
        auto cls = detail::classify_sequence(k, collect_v(k), opt);
        if (cls.cls == LimitClass::Inconclusive) any_inconclusive = true;
        LimitClass expected = (k % (M + 1) == M) ? LimitClass::ToConstant : LimitClass::ToZero;
        if (cls.cls != expected) pattern_ok = false;
        if (k % (M + 1) == M) report.c_hat.push_back(cls.estimate);
        report.v_classes.push_back(cls);
    }
    report.pattern_ok = pattern_ok;

    if (all_zero) {
        report.vacuous = true;
        report.cross_ok = true;
        report.cross_skipped = true;
        report.status = ConvergenceStatus::Pass;
        return report;
    }

    if (!schedule.has_limit()) {
        report.status = ConvergenceStatus::OutsideTheoremScope;
        return report;
    }

    const double delta = to_double(schedule.limit());
    if (std::abs(delta) < opt.cross_min_delta) {
        report.cross_skipped = true;
        report.cross_ok = true;
    } else {
        report.cross_ok = true;
        const double dM = std::pow(delta, M);
        for (std::size_t j = 0; j < report.c_bar.size(); ++j) {
            double expected = report.c_hat[j] / dM;
            double denom = std::abs(report.c_bar[j]);
            double res = denom == 0.0 ? std::abs(expected)
                                      : std::abs(report.c_bar[j] - expected) / denom;
            report.cross_residual.push_back(res);
            if (res > opt.cross_rel_tol) report.cross_ok = false;
        }
    }

    if (any_inconclusive)
        report.status = ConvergenceStatus::Inconclusive;
    else
        report.status = (report.pattern_ok && report.cross_ok) ? ConvergenceStatus::Pass
                                                               : ConvergenceStatus::Fail;
    return report;
}

}  // namespace casolv
