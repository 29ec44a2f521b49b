#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casolv/determinants.hpp"
#include "casolv/matrix.hpp"
#include "casolv/series.hpp"

namespace casolv {

struct FitTolerances {
    double tol_rate = 1e-3;        // relative rate mismatch
    double tol_slope_frac = 0.15;  // slack on the error-decay slope
    double tol_tie = 0.05;         // near-tie rejection threshold
    double stabilization = 1e-4;   // constant must settle to 4 significant digits
    double noise_floor = 1e3 * std::numeric_limits<double>::epsilon();
    int window = 10;               // trailing ratio window
};

enum class FitStatus { Pass, Fail, Degenerate, NearTie };

struct AsymptoticFit {
    double observed_rate = 0.0;
    double theoretical_rate = 0.0;
    std::optional<double> error_slope;  // empty when the error is exactly zero
    double theoretical_slope = 0.0;
    double constant_estimate = 0.0;
    bool error_free = false;  // tail-free exact expansion: no error term at all
    FitStatus status = FitStatus::Fail;
    std::string detail;
};

// Signed geometric-mean rate over the trailing window.
inline double ratio_estimate(const std::vector<double>& seq, int window) {
    if (window < 1 || static_cast<int>(seq.size()) < window + 1)
        throw std::invalid_argument("ratio_estimate: sequence shorter than window+1");
    const int n = static_cast<int>(seq.size());
    double log_sum = 0.0;
    bool uniform = true;
    const double last_ratio = seq[n - 2] == 0.0 ? 0.0 : seq[n - 1] / seq[n - 2];
    for (int t = n - window; t < n; ++t) {
        if (seq[t - 1] == 0.0 || seq[t] == 0.0)
            throw std::invalid_argument("ratio_estimate: zero entry inside window");
        double ratio = seq[t] / seq[t - 1];
        if (ratio != last_ratio) uniform = false;
        log_sum += std::log(std::abs(ratio));
    }
    if (uniform) return last_ratio;  // exact geometric sequence: skip the log round trip
    double mag = std::exp(log_sum / window);
    return last_ratio < 0 ? -mag : mag;
}

namespace detail {

inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

// Exact Casorati sequence C_{k,j}^(0..n_max) for a pole model.
inline std::vector<Rational> casorati_sequence(const PoleModel& model, int k, int j, int n_max) {
    auto table = build_table_from_poles(model, k + j, n_max + j - 1 > 0 ? n_max + j - 1 : 0);
    std::vector<Rational> seq;
    seq.reserve(n_max + 1);
    for (int n = 0; n <= n_max; ++n) seq.push_back(casorati_det(table, k, j, n));
    return seq;
}

namespace detail {

// Shared fitting core. `samples` are C^(n) for n = 0..n_max; entries flagged
// unusable (float cancellation) are excluded from the slope fit.
inline AsymptoticFit fit_rate(const std::vector<double>& samples, const std::vector<bool>& usable,
                              bool has_exact_zero, double theoretical_rate,
                              double theoretical_slope, const FitTolerances& tol) {
    AsymptoticFit fit;
    fit.theoretical_rate = theoretical_rate;
    fit.theoretical_slope = theoretical_slope;
    const int n_max = static_cast<int>(samples.size()) - 1;

    if (has_exact_zero) {
        fit.status = FitStatus::Degenerate;
        fit.detail = "determinant vanishes at a sampled n";
        return fit;
    }

    const int window = std::min(tol.window, n_max);
    fit.observed_rate = ratio_estimate(samples, window);

    auto constant_at = [&](int n) { return samples[n] / std::pow(theoretical_rate, n); };
    fit.constant_estimate = constant_at(n_max);
    const int stab_back = std::min(5, n_max);
    double c_prev = constant_at(n_max - stab_back);
    bool stable = fit.constant_estimate != 0.0 &&
                  std::abs(c_prev - fit.constant_estimate) <=
                      tol.stabilization * std::abs(fit.constant_estimate);

    // relative error against c * rate^n over the trailing half
    std::vector<double> xs, ys;
    const int first = n_max - (n_max + 1) / 2 + 1;
    for (int n = std::max(0, first); n <= n_max; ++n) {
        if (!usable[n]) continue;
        double e = samples[n] / (fit.constant_estimate * std::pow(theoretical_rate, n)) - 1.0;
        if (std::abs(e) < tol.noise_floor) continue;
        xs.push_back(n);
        ys.push_back(std::log(std::abs(e)));
    }

    bool slope_ok;
    if (xs.size() < 3) {
        fit.error_free = true;  // error at/below the noise floor everywhere
        slope_ok = true;
    } else {
        fit.error_slope = least_squares_slope(xs, ys);
        slope_ok = *fit.error_slope <=
                   theoretical_slope + tol.tol_slope_frac * std::abs(theoretical_slope);
    }

    bool rate_ok = std::abs(fit.observed_rate / theoretical_rate - 1.0) < tol.tol_rate;
    fit.status = (rate_ok && slope_ok && stable) ? FitStatus::Pass : FitStatus::Fail;
    if (!rate_ok) fit.detail = "observed rate outside tolerance";
    else if (!slope_ok) fit.detail = "error decays slower than predicted";
    else if (!stable) fit.detail = "constant estimate not stabilized";
    return fit;
}

inline Rational tuple_constant(const PoleModel& model, int k, int j,
                               const std::vector<int>& kappa) {
    SquareMatrix<Rational> m(j);
    for (int q = 0; q < j; ++q) {
        const auto& term = model.dominant_at(k + q)[kappa[q] - 1];
        for (int p = 0; p < j; ++p)
            m(p, q) = term.c * pow(term.r, static_cast<unsigned long>(k + q + 1 + p));
    }
    return det_exact(m);
}

inline bool next_tuple(std::vector<int>& kappa, const std::vector<int>& limits) {
    for (int q = static_cast<int>(kappa.size()) - 1; q >= 0; --q) {
        if (kappa[q] < limits[q]) {
            ++kappa[q];
            for (std::size_t t = q + 1; t < kappa.size(); ++t) kappa[t] = 1;
            return true;
        }
    }
    return false;
}

}  // namespace detail

// Restricted (shared-pole) expansion: C_{k,j}^(n) ~ c_{k,j} (r_1...r_j)^n
// with error decaying like (rho/|r_j|)^n.
inline AsymptoticFit verify_theorem2(const PoleModel& model, int k, int j, int n_max,
                                     const FitTolerances& tol = {}) {
    if (!model.is_shared())
        throw std::invalid_argument("verify_theorem2: model must have shared poles");
    if (j < 1 || j > model.dominant_count(k))
        throw std::invalid_argument("verify_theorem2: need 1 <= j <= dominant pole count");
    auto exact = casorati_sequence(model, k, j, n_max);
    std::vector<double> samples;
    bool has_zero = false;
    for (const auto& q : exact) {
        if (q == 0) has_zero = true;
        samples.push_back(to_double(q));
    }
    const auto& poles = model.dominant_at(k);
    double rate = 1.0;
    for (int l = 0; l < j; ++l) rate *= to_double(poles[l].r);
    double rho = model.rho(k, j);
    double slope = std::log(rho / std::abs(to_double(poles[j - 1].r)));
    return detail::fit_rate(samples, std::vector<bool>(samples.size(), true), has_zero, rate,
                            slope, tol);
}

// General (per-column-pole) expansion: the dominant kappa-tuple sets the
// rate; subdominant tuples and the per-column remainders set the error model.
inline AsymptoticFit verify_theorem1(const PoleModel& model, int k, int j, int n_max,
                                     const FitTolerances& tol = {}) {
    if (j < 1) throw std::invalid_argument("verify_theorem1: j must be >= 1");
    std::vector<int> limits(j);
    double rate = 1.0;
    double column_slope = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < j; ++q) {
        const auto& dom = model.dominant_at(k + q);
        if (dom.empty()) throw std::invalid_argument("verify_theorem1: empty column");
        limits[q] = static_cast<int>(dom.size());
        rate *= to_double(dom[0].r);
        int jq = std::min<int>(j, limits[q]);
        column_slope = std::max(
            column_slope, std::log(model.rho(k + q, jq) / std::abs(to_double(dom[0].r))));
    }

    // enumerate tuple rates, skipping tuples whose constant vanishes exactly
    double top = std::abs(rate), second = 0.0;
    bool tie_checked = false;
    long tuple_count = 1;
    for (int q = 0; q < j; ++q) tuple_count *= limits[q];
    if (j <= 4 && tuple_count <= 4096) {
        tie_checked = true;
        std::vector<int> kappa(j, 1);
        do {
            if (detail::tuple_constant(model, k, j, kappa) == 0) continue;
            double mod = 1.0;
            for (int q = 0; q < j; ++q)
                mod *= std::abs(to_double(model.dominant_at(k + q)[kappa[q] - 1].r));
            if (mod > top * (1 + 1e-12)) {
                second = top;
                top = mod;
            } else if (mod < top * (1 - 1e-12) && mod > second) {
                second = mod;
            }
        } while (detail::next_tuple(kappa, limits));
    }

    double slope = column_slope;
    if (second > 0.0) slope = std::max(slope, std::log(second / top));

    auto exact = casorati_sequence(model, k, j, n_max);
    std::vector<double> samples;
    bool has_zero = false;
    for (const auto& q : exact) {
        if (q == 0) has_zero = true;
        samples.push_back(to_double(q));
    }
    auto fit = detail::fit_rate(samples, std::vector<bool>(samples.size(), true), has_zero, rate,
                                slope, tol);
    if (tie_checked && second > 0.0 && top / second < 1.0 + tol.tol_tie) {
        fit.status = FitStatus::NearTie;
        fit.detail = "two kappa-tuples within the tie threshold; fit unreliable";
    }
    return fit;
}

struct CasoratiTerm {
    std::vector<int> kappa;  // 1-based pole choice per column
    Rational value;          // D_{k,kappa}^(n)
    Rational constant;       // the n-independent constant determinant
    bool value_matches;      // value == constant * (prod r)^n
};

struct TermExpansion {
    std::vector<CasoratiTerm> terms;
    Rational total;
    Rational casoratian;
    bool matches;  // sum of D-terms == C_{k,j}^(n), exact
};

// Explicit D-term decomposition of the Casoratian for tail-free models; the
// b-column terms vanish, so the tuple sum is exact.
inline TermExpansion expand_casorati_terms(const PoleModel& model, int k, int j, int n) {
    if (j < 1 || j > 4) throw std::invalid_argument("expand_casorati_terms: need 1 <= j <= 4");
    std::vector<int> limits(j);
    for (int q = 0; q < j; ++q) {
        if (!model.tail_at(k + q).empty())
            throw std::invalid_argument("expand_casorati_terms: model must be tail-free");
        limits[q] = model.dominant_count(k + q);
    }

    TermExpansion out;
    out.total = Rational(0);
    std::vector<int> kappa(j, 1);
    do {
        CasoratiTerm term;
        term.kappa = kappa;
        SquareMatrix<Rational> m(j);
        Rational rate_pow(1);
        for (int q = 0; q < j; ++q) {
            const auto& pt = model.dominant_at(k + q)[kappa[q] - 1];
            for (int p = 0; p < j; ++p)
                m(p, q) = pt.c * pow(pt.r, static_cast<unsigned long>(n + k + q + 1 + p));
            rate_pow *= pow(pt.r, static_cast<unsigned long>(n));
        }
        term.value = det_exact(m);
        term.constant = detail::tuple_constant(model, k, j, kappa);
        term.value_matches = (term.value == term.constant * rate_pow);
        out.total += term.value;
        out.terms.push_back(std::move(term));
    } while (detail::next_tuple(kappa, limits));

    auto table = build_table_from_poles(model, k + j, n + j);
    out.casoratian = casorati_det(table, k, j, n);
    out.matches = (out.total == out.casoratian);
    return out;
}

}  // namespace casolv
