#include "casolv/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <type_traits>

namespace casolv {

namespace {

using nlohmann::json;

Rational jrat(const json& v, const char* where) {
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<long>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(where) + ": " + e.what());
    }
    throw ConfigError(std::string(where) + ": expected a \"p/q\" string or integer");
}

std::vector<PoleTerm> parse_terms(const json& arr, const char* where) {
    if (!arr.is_array()) throw ConfigError(std::string(where) + ": expected an array");
    std::vector<PoleTerm> out;
    for (const auto& t : arr) {
        if (!t.is_object() || !t.contains("r"))
            throw ConfigError(std::string(where) + ": each term needs an \"r\" field");
        PoleTerm term;
        term.r = jrat(t.at("r"), where);
        term.c = t.contains("c") ? jrat(t.at("c"), where) : Rational(1);
        out.push_back(term);
    }
    return out;
}

PoleModel parse_poles(const json& p) {
    if (p.contains("shared")) {
        const auto& s = p.at("shared");
        std::vector<PoleTerm> tail;
        if (s.contains("tail")) tail = parse_terms(s.at("tail"), "poles.shared.tail");
        return PoleModel::shared(parse_terms(s.at("dominant"), "poles.shared.dominant"),
                                 std::move(tail));
    }
    if (p.contains("per_column")) {
        const auto& s = p.at("per_column");
        std::vector<std::vector<PoleTerm>> dom, tail;
        for (const auto& col : s.at("dominant"))
            dom.push_back(parse_terms(col, "poles.per_column.dominant"));
        if (s.contains("tail"))
            for (const auto& col : s.at("tail"))
                tail.push_back(parse_terms(col, "poles.per_column.tail"));
        return PoleModel::per_column(std::move(dom), std::move(tail));
    }
    throw ConfigError("poles: expected a \"shared\" or \"per_column\" object");
}

DeltaSchedule parse_delta(const json& d) {
    if (d.contains("constant")) return DeltaSchedule::constant(jrat(d.at("constant"), "delta"));
    if (d.contains("sequence")) {
        std::vector<Rational> vals;
        for (const auto& v : d.at("sequence")) vals.push_back(jrat(v, "delta.sequence"));
        std::optional<Rational> limit;
        if (d.contains("limit")) limit = jrat(d.at("limit"), "delta.limit");
        return DeltaSchedule::sequence(std::move(vals), limit);
    }
    throw ConfigError("delta: expected \"constant\" or \"sequence\"");
}

std::vector<int> parse_int_list(const json& v, const char* where) {
    std::vector<int> out;
    if (v.is_number_integer()) {
        out.push_back(v.get<int>());
    } else if (v.is_array()) {
        for (const auto& x : v) out.push_back(x.get<int>());
    } else {
        throw ConfigError(std::string(where) + ": expected an integer or array of integers");
    }
    return out;
}

std::vector<Rational> parse_rat_list(const json& v, const char* where) {
    if (!v.is_array()) throw ConfigError(std::string(where) + ": expected an array");
    std::vector<Rational> out;
    for (const auto& x : v) out.push_back(jrat(x, where));
    return out;
}

std::string fmt_val(const Rational& q) { return to_string(q); }
std::string fmt_val(double x) { return format_double(x); }

template <typename T>
bool values_equal(const T& a, const T& b, double tol) {
    if constexpr (std::is_same_v<T, Rational>) {
        (void)tol;
        return a == b;
    } else {
        double m = std::max(std::abs(a), std::abs(b));
        return m == 0.0 || std::abs(a - b) <= tol * m;
    }
}

template <typename T>
T delta_as(const DeltaSchedule& s, int n) {
    if constexpr (std::is_same_v<T, Rational>)
        return s.at(n);
    else
        return to_double(s.at(n));
}

// Aggregates many instances of one named identity into a single check row;
// keeps the first failing (lhs, rhs) pair, or the last one seen when clean.
struct Aggregate {
    CheckResult out;
    int total = 0;
    int failed = 0;

    void add(bool ok, std::string lhs, std::string rhs) {
        ++total;
        if (!ok) {
            ++failed;
            if (failed == 1) {
                out.lhs = std::move(lhs);
                out.rhs = std::move(rhs);
            }
        } else if (failed == 0) {
            out.lhs = std::move(lhs);
            out.rhs = std::move(rhs);
        }
    }

    CheckResult finish(std::string name, std::string tolerance) {
        out.name = std::move(name);
        out.tolerance = std::move(tolerance);
        out.pass = failed == 0;
        out.detail = std::to_string(total) + " instances";
        if (failed > 0) out.detail += ", " + std::to_string(failed) + " failed";
        return out;
    }
};

// The five-identity suite over one recurrence table: tau factorization, G=C,
// the two v routes, v<->u round trip, and step consistency.
template <typename T>
void identity_suite(const CoefficientTable<T>& table, const DeltaSchedule& schedule, int M, int m,
                    int n_max, double tol, std::vector<CheckResult>& checks, CsvTable* csv) {
    const std::string tol_str = std::is_same_v<T, Rational> ? "exact" : format_double(tol);
    Aggregate tau_fact, g_cas, lemma2, round_trip, step;
    std::vector<DhlvState<T>> u_rows;

    if (csv) {
        for (int k = M; k <= (M + 1) * m - 1; ++k) csv->header.push_back("v_" + std::to_string(k));
    }

    for (int n = 0; n <= n_max + 1; ++n) {
        if (n <= n_max) {
            for (int j = 0; j <= m; ++j)
                for (int i = 0; i <= M; ++i) {
                    T lhs = tau(table, i + j * (M + 1), n, M);
                    T rhs = T(1);
                    for (int l = 0; l < i; ++l) rhs = rhs * g_det(table, l, j + 1, n, M);
                    for (int l = i; l <= M; ++l) rhs = rhs * g_det(table, l, j, n, M);
                    tau_fact.add(values_equal(lhs, rhs, tol), fmt_val(lhs), fmt_val(rhs));
                }
            for (int i = 0; i <= M; ++i)
                for (int j = 1; j <= m; ++j) {
                    T lhs = g_det(table, i, j, n, M);
                    T rhs = casorati_det(table, i, j, n);
                    g_cas.add(values_equal(lhs, rhs, tol), fmt_val(lhs), fmt_val(rhs));
                }
        }

        auto v_det = v_from_determinants(table, M, m, n);
        T dn = delta_as<T>(schedule, n);
        auto u = u_from_v(v_det, dn);

        if (n <= n_max) {
            auto v_tau = v_from_tau_ratio(table, M, m, n);
            auto v_back = v_from_u(u, dn);
            std::vector<std::string> row;
            for (int k = v_det.first_index(); k <= v_det.last_index(); ++k) {
                lemma2.add(values_equal(v_det.at(k), v_tau.at(k), tol), fmt_val(v_det.at(k)),
                           fmt_val(v_tau.at(k)));
                round_trip.add(values_equal(v_back.at(k), v_det.at(k), tol), fmt_val(v_back.at(k)),
                               fmt_val(v_det.at(k)));
                if (csv) row.push_back(fmt_val(v_det.at(k)));
            }
            if (csv) csv->rows.push_back(std::move(row));
        }
        u_rows.push_back(std::move(u));
    }

    for (int n = 0; n <= n_max; ++n) {
        auto stepped =
            dhlv_step(u_rows[n], delta_as<T>(schedule, n), delta_as<T>(schedule, n + 1));
        for (int k = 0; k < stepped.size(); ++k)
            step.add(values_equal(stepped.u[k], u_rows[n + 1].u[k], tol), fmt_val(stepped.u[k]),
                     fmt_val(u_rows[n + 1].u[k]));
    }

    checks.push_back(tau_fact.finish("tau-factorization", tol_str));
    checks.push_back(g_cas.finish("g-equals-casorati", tol_str));
    checks.push_back(lemma2.finish("lemma2-dual-path", tol_str));
    checks.push_back(round_trip.finish("round-trip", tol_str));
    checks.push_back(step.finish("step-consistency", tol_str));
}

std::vector<Rational> identity_seed(const ExperimentConfig& c, int K) {
    if (!c.seed_row.empty()) {
        if (static_cast<int>(c.seed_row.size()) < K)
            throw ConfigError("seed_row: need at least " + std::to_string(K) + " entries");
        return {c.seed_row.begin(), c.seed_row.begin() + K};
    }
    if (!c.poles) throw ConfigError("verify-identities: need \"poles\" or \"seed_row\"");
    std::vector<Rational> seed;
    seed.reserve(K);
    for (int k = 0; k < K; ++k) seed.push_back(c.poles->coeff(k, 0));
    return seed;
}

void run_identities(const ExperimentConfig& c, RunResult& out, int n_max, bool want_csv) {
    // widest column index touched: tau/G reach M(m+1)+m; add the M columns
    // consumed per evolution step through row n_max + m + 1.
    const int K = c.M * (c.m + 1) + c.m + 1 + (n_max + c.m) * c.M;
    auto seed = identity_seed(c, K);
    if (c.mode == ArithmeticMode::Exact) {
        auto table = build_table_from_recurrence(seed, c.delta, c.M, n_max + c.m + 1);
        identity_suite<Rational>(table, c.delta, c.M, c.m, n_max, 0.0, out.checks,
                                 want_csv ? &out.csv : nullptr);
    } else {
        std::vector<double> fseed;
        fseed.reserve(seed.size());
        for (const auto& q : seed) fseed.push_back(to_double(q));
        auto table = build_table_from_recurrence(fseed, c.delta, c.M, n_max + c.m + 1);
        identity_suite<double>(table, c.delta, c.M, c.m, n_max, c.identity_float_tol, out.checks,
                               want_csv ? &out.csv : nullptr);
    }
}

std::string fit_status_name(FitStatus s) {
    switch (s) {
        case FitStatus::Pass: return "PASS";
        case FitStatus::Fail: return "FAIL";
        case FitStatus::Degenerate: return "DEGENERATE";
        case FitStatus::NearTie: return "NEAR-TIE";
    }
    return "?";
}

void run_asymptotics(const ExperimentConfig& c, RunResult& out, bool want_csv) {
    if (!c.poles) throw ConfigError("asymptotics: \"poles\" is required");
    const PoleModel& model = *c.poles;
    std::vector<std::vector<double>> csv_cols;

    for (int k : c.k_list)
        for (int j : c.j_list) {
            std::string indices = "k=" + std::to_string(k) + ",j=" + std::to_string(j);
            AsymptoticFit fit = model.is_shared()
                                    ? verify_theorem2(model, k, j, c.n_max, c.fit_tol)
                                    : verify_theorem1(model, k, j, c.n_max, c.fit_tol);
            out.fits.push_back({indices, fit});

            CheckResult check;
            check.name = "rate " + indices;
            check.pass = fit.status == FitStatus::Pass;
            check.lhs = format_double(fit.observed_rate);
            check.rhs = format_double(fit.theoretical_rate);
            check.tolerance = format_double(c.fit_tol.tol_rate);
            check.detail = fit_status_name(fit.status);
            if (!fit.detail.empty()) check.detail += ": " + fit.detail;
            out.checks.push_back(check);

            bool tail_free = true;
            for (int q = 0; q < j; ++q)
                if (!model.in_range(k + q) || !model.tail_at(k + q).empty()) tail_free = false;
            if (tail_free && j <= 4) {
                Aggregate terms;
                for (int n = 0; n <= 2; ++n) {
                    auto exp = expand_casorati_terms(model, k, j, n);
                    terms.add(exp.matches, to_string(exp.total), to_string(exp.casoratian));
                }
                out.checks.push_back(terms.finish("term-decomposition " + indices, "exact"));
            }

            if (want_csv) {
                out.csv.header.push_back("C_" + std::to_string(k) + "_" + std::to_string(j));
                auto seq = casorati_sequence(model, k, j, c.n_max);
                std::vector<double> col;
                for (const auto& q : seq) col.push_back(to_double(q));
                csv_cols.push_back(std::move(col));
            }
        }

    if (want_csv) {
        for (int n = 0; n <= c.n_max; ++n) {
            std::vector<std::string> row;
            for (const auto& col : csv_cols) row.push_back(format_double(col[n]));
            out.csv.rows.push_back(std::move(row));
        }
    }
}

DhlvState<double> simulation_seed(const ExperimentConfig& c) {
    DhlvState<double> state(c.M, c.m);
    if (!c.u0.empty()) {
        if (static_cast<int>(c.u0.size()) != state.size())
            throw ConfigError("u0: expected " + std::to_string(state.size()) + " entries");
        for (int k = 0; k < state.size(); ++k) state.u[k] = to_double(c.u0[k]);
        return state;
    }
    if (c.poles) {
        const int K = c.M + c.m + 1 + c.m * c.M;
        std::vector<Rational> seed;
        for (int k = 0; k < K; ++k) seed.push_back(c.poles->coeff(k, 0));
        auto table = build_table_from_recurrence(seed, c.delta, c.M, c.m);
        auto u0 = u_from_v(v_from_determinants(table, c.M, c.m, 0), c.delta.at(0));
        for (int k = 0; k < state.size(); ++k) state.u[k] = to_double(u0.u[k]);
        return state;
    }
    return state;  // zero seed: the fixed point
}

void run_simulate(const ExperimentConfig& c, RunResult& out, bool want_csv) {
    if (!c.delta.has_limit()) {
        // sequence-mode delta with no declared limit: the run must not walk
        // off the end of the prefix
        int have = 0;
        while (true) {
            try {
                c.delta.at(have);
                ++have;
            } catch (const std::out_of_range&) {
                break;
            }
        }
        if (have < c.n_max + 2)
            throw ConfigError("delta.sequence: need " + std::to_string(c.n_max + 2) +
                              " values (or a declared limit)");
    }

    DhlvState<double> state = simulation_seed(c);
    std::vector<DhlvState<double>> us;
    std::vector<AuxiliaryRow<double>> vs;
    us.reserve(c.n_max + 1);
    vs.reserve(c.n_max + 1);
    for (int n = 0; n <= c.n_max; ++n) {
        double dn = to_double(c.delta.at(n));
        us.push_back(state);
        vs.push_back(v_from_u(state, dn));
        if (n < c.n_max) state = dhlv_step(state, dn, to_double(c.delta.at(n + 1)));
    }

    auto report = convergence_check(us, vs, c.delta, c.conv_opt);
    bool outside = report.status == ConvergenceStatus::OutsideTheoremScope;
    bool inconclusive = report.status == ConvergenceStatus::Inconclusive;

    auto const_indices = [](const std::vector<IndexClassification>& v) {
        std::string s;
        for (const auto& c2 : v)
            if (c2.cls == LimitClass::ToConstant)
                s += (s.empty() ? "" : " ") + std::to_string(c2.index);
        return s;
    };
    auto expected_indices = [&](int start, int residue) {
        std::string s;
        for (int k = start; k <= (c.M + 1) * c.m - 1; ++k)
            if (k % (c.M + 1) == residue) s += (s.empty() ? "" : " ") + std::to_string(k);
        return s;
    };

    CheckResult pattern;
    pattern.name = "convergence-pattern";
    pattern.lhs = "u:[" + const_indices(report.u_classes) + "] v:[" +
                  const_indices(report.v_classes) + "]";
    pattern.rhs =
        "u:[" + expected_indices(0, 0) + "] v:[" + expected_indices(c.M, c.M) + "]";
    pattern.tolerance = format_double(c.conv_opt.zero_threshold);
    if (outside) {
        pattern.pass = true;
        pattern.detail = "outside theorem scope (no declared delta limit); not asserted";
    } else if (report.vacuous) {
        pattern.pass = true;
        pattern.detail = "vacuous: identically zero trajectory";
    } else {
        pattern.pass = report.pattern_ok && !inconclusive;
        pattern.detail = inconclusive ? "inconclusive classification" : "";
    }
    out.checks.push_back(pattern);

    CheckResult cross;
    cross.name = "limit-cross-check";
    cross.tolerance = format_double(c.conv_opt.cross_rel_tol);
    for (std::size_t j = 0; j < report.c_bar.size(); ++j) {
        cross.lhs += (j ? " " : "") + format_double(report.c_bar[j]);
        cross.rhs += (j ? " " : "") + format_double(report.c_hat[j]);
    }
    if (outside) {
        cross.pass = true;
        cross.detail = "outside theorem scope; not asserted";
    } else if (report.cross_skipped) {
        cross.pass = true;
        cross.detail = report.vacuous ? "vacuous: identically zero trajectory"
                                      : "skipped: |delta| below cross_min_delta";
    } else {
        cross.pass = report.cross_ok;
        double worst = 0.0;
        for (double r : report.cross_residual) worst = std::max(worst, r);
        cross.detail = "worst residual " + format_double(worst);
    }
    out.checks.push_back(cross);

    if (want_csv) {
        for (int k = 0; k < us.front().size(); ++k)
            out.csv.header.push_back("u_" + std::to_string(k));
        for (int k = vs.front().first_index(); k <= vs.front().last_index(); ++k)
            out.csv.header.push_back("v_" + std::to_string(k));
        for (int n = 0; n <= c.n_max; ++n) {
            std::vector<std::string> row;
            for (int k = 0; k < us[n].size(); ++k) row.push_back(format_double(us[n].u[k]));
            for (int k = vs[n].first_index(); k <= vs[n].last_index(); ++k)
                row.push_back(format_double(vs[n].at(k)));
            out.csv.rows.push_back(std::move(row));
        }
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig c;
    c.echo = j;

    if (!j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("config: \"kind\" string is required");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "verify-identities") c.kind = ExperimentKind::VerifyIdentities;
    else if (kind == "asymptotics") c.kind = ExperimentKind::Asymptotics;
    else if (kind == "simulate") c.kind = ExperimentKind::Simulate;
    else if (kind == "full-pipeline") c.kind = ExperimentKind::FullPipeline;
    else throw ConfigError("config: unknown kind '" + kind + "'");

    if (j.contains("mode")) {
        const std::string mode = j.at("mode").get<std::string>();
        if (mode == "exact") c.mode = ArithmeticMode::Exact;
        else if (mode == "float") c.mode = ArithmeticMode::Float;
        else throw ConfigError("config: mode must be \"exact\" or \"float\"");
    }

    if (j.contains("M")) c.M = j.at("M").get<int>();
    if (j.contains("m")) c.m = j.at("m").get<int>();
    if (j.contains("n_max")) c.n_max = j.at("n_max").get<int>();
    if (c.M < 1 || c.m < 1 || c.n_max < 0)
        throw ConfigError("config: need M >= 1, m >= 1, n_max >= 0");

    if (j.contains("delta")) c.delta = parse_delta(j.at("delta"));
    if (j.contains("poles")) c.poles = parse_poles(j.at("poles"));
    if (j.contains("seed_row")) c.seed_row = parse_rat_list(j.at("seed_row"), "seed_row");
    if (j.contains("u0")) c.u0 = parse_rat_list(j.at("u0"), "u0");
    if (j.contains("k")) c.k_list = parse_int_list(j.at("k"), "k");
    if (j.contains("j")) c.j_list = parse_int_list(j.at("j"), "j");

    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        if (t.contains("tol_rate")) c.fit_tol.tol_rate = t.at("tol_rate").get<double>();
        if (t.contains("tol_slope_frac"))
            c.fit_tol.tol_slope_frac = t.at("tol_slope_frac").get<double>();
        if (t.contains("tol_tie")) c.fit_tol.tol_tie = t.at("tol_tie").get<double>();
        if (t.contains("window")) c.fit_tol.window = t.at("window").get<int>();
        if (t.contains("zero_threshold"))
            c.conv_opt.zero_threshold = t.at("zero_threshold").get<double>();
        if (t.contains("constant_rel_tol"))
            c.conv_opt.constant_rel_tol = t.at("constant_rel_tol").get<double>();
        if (t.contains("cross_rel_tol"))
            c.conv_opt.cross_rel_tol = t.at("cross_rel_tol").get<double>();
        if (t.contains("identity_float_tol"))
            c.identity_float_tol = t.at("identity_float_tol").get<double>();
    }

    // referential completeness per kind
    switch (c.kind) {
        case ExperimentKind::VerifyIdentities:
            if (!c.poles && c.seed_row.empty())
                throw ConfigError("verify-identities: need \"poles\" or \"seed_row\"");
            break;
        case ExperimentKind::Asymptotics:
            if (!c.poles) throw ConfigError("asymptotics: \"poles\" is required");
            for (int k : c.k_list)
                if (k < 0 || !c.poles->in_range(k))
                    throw ConfigError("asymptotics: k index out of model range");
            for (int jj : c.j_list)
                if (jj < 1) throw ConfigError("asymptotics: j must be >= 1");
            break;
        case ExperimentKind::Simulate:
            break;  // zero seed is a valid (vacuous) run
        case ExperimentKind::FullPipeline:
            if (!c.poles) throw ConfigError("full-pipeline: \"poles\" is required");
            break;
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error in '" + path + "': " + e.what());
    }
    return from_json(j);
}

RunResult run_experiment(const ExperimentConfig& config) {
    RunResult out;
    out.config_echo = config.echo;
    switch (config.kind) {
        case ExperimentKind::VerifyIdentities:
            run_identities(config, out, config.n_max, true);
            break;
        case ExperimentKind::Asymptotics:
            run_asymptotics(config, out, true);
            break;
        case ExperimentKind::Simulate:
            run_simulate(config, out, true);
            break;
        case ExperimentKind::FullPipeline:
            run_identities(config, out, std::min(config.n_max, 5), false);
            run_asymptotics(config, out, false);
            run_simulate(config, out, true);
            break;
    }
    out.all_pass = true;
    for (const auto& check : out.checks)
        if (!check.pass) out.all_pass = false;
    return out;
}

std::string report_json(const RunResult& result) {
    json out;
    out["config_echo"] = result.config_echo;
    out["all_pass"] = result.all_pass;

    json checks = json::array();
    for (const auto& c : result.checks) {
        json entry;
        entry["name"] = c.name;
        entry["status"] = c.pass ? "PASS" : "FAIL";
        entry["lhs"] = c.lhs;
        entry["rhs"] = c.rhs;
        entry["tolerance"] = c.tolerance;
        entry["detail"] = c.detail;
        checks.push_back(entry);
    }
    out["checks"] = checks;

    json fits = json::array();
    for (const auto& f : result.fits) {
        json entry;
        entry["indices"] = f.indices;
        entry["observed_rate"] = format_double(f.fit.observed_rate);
        entry["theoretical_rate"] = format_double(f.fit.theoretical_rate);
        entry["error_slope"] =
            f.fit.error_slope ? json(format_double(*f.fit.error_slope)) : json(nullptr);
        entry["theoretical_slope"] = format_double(f.fit.theoretical_slope);
        entry["constant_estimate"] = format_double(f.fit.constant_estimate);
        entry["error_free"] = f.fit.error_free;
        entry["status"] = fit_status_name(f.fit.status);
        fits.push_back(entry);
    }
    out["fits"] = fits;

    return out.dump(2) + "\n";
}

std::string report_csv(const RunResult& result) {
    std::ostringstream out;
    out << "n";
    for (const auto& h : result.csv.header) out << "," << h;
    out << "\n";
    for (std::size_t n = 0; n < result.csv.rows.size(); ++n) {
        out << n;
        for (const auto& v : result.csv.rows[n]) out << "," << v;
        out << "\n";
    }
    return out.str();
}

void write_report(const RunResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream f(out_dir + "/report.json", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out_dir + "/report.json");
        f << report_json(result);
    }
    {
        std::ofstream f(out_dir + "/trajectory.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out_dir + "/trajectory.csv");
        f << report_csv(result);
    }
}

}  // namespace casolv
