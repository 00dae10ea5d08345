#include "nessqfi/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "CLI11.hpp"

#include "nessqfi/errors.hpp"
#include "nessqfi/fisher.hpp"
#include "nessqfi/mpo.hpp"

#ifndef NESSQFI_VERSION
#define NESSQFI_VERSION "0.1.0-unknown"
#endif

namespace nessqfi::cli {

namespace {

constexpr std::pair<ScanKind, std::string_view> kKindNames[] = {
    {ScanKind::chi_vs_delta, "chi-vs-delta"},
    {ScanKind::xi_vs_eta_rational, "xi-vs-eta-rational"},
    {ScanKind::xi_n_vs_n, "xi-n-vs-n"},
    {ScanKind::f_lambda_nonpert, "f-lambda-nonpert"},
    {ScanKind::validity_report, "validity-report"},
    {ScanKind::isotropic_check, "isotropic-check"},
};

std::string kind_help(ScanKind k) {
    switch (k) {
    case ScanKind::chi_vs_delta: return "linear coefficients chi, chi1 of <L|T^n|R> on rational and irrational Delta";
    case ScanKind::xi_vs_eta_rational: return "anisotropy coefficient xi on the rational grid eta/pi = q/p";
    case ScanKind::xi_n_vs_n: return "xi(n) * n against chain length";
    case ScanKind::f_lambda_nonpert: return "dense F_lambda of the mu = 1 state beside its leading order";
    case ScanKind::validity_report: return "perturbative threshold and best relative errors per n";
    case ScanKind::isotropic_check: return "small-eta series against exact brackets near Delta = 1";
    }
    return {};
}

std::string_view log_mode_name(LogMode m) {
    switch (m) {
    case LogMode::automatic: return "auto";
    case LogMode::on: return "on";
    case LogMode::off: return "off";
    }
    return "auto";
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
    return buf;
}

// One output record keyed by column name; missing columns serialize as empty.
using Record = std::map<std::string, Cell>;

void put_log(Record& r, const std::string& name, const LogReal& v) {
    if (v.representable()) r[name] = v.to_double();
    r[name + "_sign"] = static_cast<long long>(v.sign);
    if (v.sign != 0) r[name + "_log10"] = v.log10_abs();
}

std::vector<std::string> log_columns(const std::string& name) { return {name, name + "_sign", name + "_log10"}; }

struct Job {
    Record inputs;                                // echoed on failure
    std::function<std::vector<Record>()> run;
};

struct Plan {
    std::vector<std::string> columns;             // without the trailing status column
    std::vector<Job> jobs;
};

std::vector<int> n_values(const ScanSpec& s) {
    std::vector<int> ns;
    for (int n = s.n_range->first; n <= s.n_range->last; n += s.n_range->step) ns.push_back(n);
    return ns;
}

// Log-spaced integers, four per decade, deduplicated.
std::vector<int> log_spaced(int lo, int hi) {
    std::vector<int> out;
    const double a = std::log10(lo), b = std::log10(hi);
    const int steps = std::max(1, static_cast<int>(std::lround(4.0 * (b - a))));
    for (int i = 0; i <= steps; ++i) {
        const int n = static_cast<int>(std::lround(std::pow(10.0, a + (b - a) * i / steps)));
        if (out.empty() || out.back() != n) out.push_back(n);
    }
    return out;
}

// η/π offsets by an irrational shift so no default point lands on a small denominator.
std::vector<double> default_irrational_deltas(int count) {
    std::vector<double> out;
    const double shift = std::sqrt(2.0) / 2.0;
    for (int k = 0; k < count; ++k) out.push_back(std::cos(M_PI * (k + shift) / count));
    return out;
}

Plan plan_chi(const ScanSpec& s) {
    Plan p;
    p.columns = {"pathway", "p", "q", "eta_over_pi", "delta", "d", "chi", "chi1"};
    for (const auto& g : rational_grid(s.p_max, s.q_max)) {
        Record in{{"pathway", std::string("rational")}, {"p", (long long)g.p}, {"q", (long long)g.q},
                  {"eta_over_pi", double(g.q) / g.p}, {"delta", g.delta}};
        p.jobs.push_back({in, [in, g] {
                              Record r = in;
                              const auto c = chi_coefficient(g.delta, RationalEta{g.p, g.q});
                              r["d"] = (long long)c.d;
                              r["chi"] = c.chi;
                              r["chi1"] = c.chi1;
                              return std::vector<Record>{r};
                          }});
    }
    const int d_max = full_truncation(s.n_range->last);
    for (double delta : s.deltas) {
        Record in{{"pathway", std::string("irrational")}, {"eta_over_pi", std::acos(delta) / M_PI},
                  {"delta", delta}};
        p.jobs.push_back({in, [in, delta, d_max] {
                              Record r = in;
                              const auto c = chi_coefficient(delta, std::nullopt, d_max);
                              r["d"] = (long long)c.d;
                              r["chi"] = c.chi;
                              r["chi1"] = c.chi1;
                              return std::vector<Record>{r};
                          }});
    }
    return p;
}

Plan plan_xi_rational(const ScanSpec& s) {
    Plan p;
    p.columns = {"p", "q", "eta_over_pi", "delta", "d", "method", "chi", "xi", "xi1", "chi_dd", "fit_r2"};
    const XiMethod method = s.xi_method;
    for (const auto& g : rational_grid(s.p_max, s.q_max)) {
        Record in{{"p", (long long)g.p}, {"q", (long long)g.q}, {"eta_over_pi", double(g.q) / g.p},
                  {"delta", g.delta}, {"method", std::string(method == XiMethod::jordan ? "jordan" : "slope")}};
        p.jobs.push_back({in, [in, g, method] {
                              Record r = in;
                              const auto x = xi_rational(RationalEta{g.p, g.q}, method);
                              r["d"] = (long long)x.d;
                              r["chi"] = x.chi;
                              r["xi"] = x.xi;
                              r["xi1"] = x.xi1;
                              r["chi_dd"] = x.chi_dd;
                              r["fit_r2"] = x.fit_r2;
                              return std::vector<Record>{r};
                          }});
    }
    return p;
}

Plan plan_xi_n(const ScanSpec& s) {
    Plan p;
    p.columns = {"pathway", "p", "q", "delta", "n", "d", "xi", "xi_n", "xi1", "chi", "fit_r2"};
    const std::vector<int> ns = s.n_range ? n_values(s) : log_spaced(10, 10000);
    if (s.eta_rational) {
        const RationalEta r = *s.eta_rational;
        for (int n : ns) {
            Record in{{"pathway", std::string("rational")}, {"p", (long long)r.p}, {"q", (long long)r.q},
                      {"delta", r.delta()}, {"n", (long long)n}};
            p.jobs.push_back({in, [in, r, n] {
                                  Record out = in;
                                  const auto x = xi_rational(r, XiMethod::slope, n);
                                  out["d"] = (long long)x.d;
                                  out["xi"] = x.xi;
                                  out["xi_n"] = x.xi * n;
                                  out["xi1"] = x.xi1;
                                  out["chi"] = x.chi;
                                  out["fit_r2"] = x.fit_r2;
                                  return std::vector<Record>{out};
                              }});
        }
    }
    for (double delta : s.deltas) {
        Record in{{"pathway", std::string("irrational")}, {"delta", delta}};
        // One exact sweep serves every n of this Δ.
        p.jobs.push_back({in, [in, delta, ns] {
                              const auto xs = xi_irrational_scan(delta, ns);
                              std::vector<Record> rows;
                              for (std::size_t i = 0; i < ns.size(); ++i) {
                                  Record out = in;
                                  out["n"] = (long long)ns[i];
                                  out["d"] = (long long)xs[i].d;
                                  out["xi"] = xs[i].xi;
                                  out["xi_n"] = xs[i].xi * ns[i];
                                  out["xi1"] = xs[i].xi1;
                                  out["chi"] = xs[i].chi;
                                  out["fit_r2"] = xs[i].fit_r2;
                                  rows.push_back(out);
                              }
                              return rows;
                          }});
    }
    return p;
}

Plan plan_f_lambda(const ScanSpec& s) {
    Plan p;
    p.columns = {"delta", "lambda_over_j", "mu", "n", "method"};
    for (auto& c : log_columns("f_lambda")) p.columns.push_back(c);
    p.columns.push_back("j2_f_lambda");
    const double mu = s.mu;
    const LogMode mode = s.log_mode;
    for (double delta : s.deltas)
        for (double r : s.lambda_over_j)
            for (int n : n_values(s)) {
                const bool leading = r == 0.0;
                Record in{{"delta", delta}, {"lambda_over_j", r}, {"mu", mu}, {"n", (long long)n},
                          {"method", std::string(leading ? "leading-order" : "exact-dense")}};
                p.jobs.push_back({in, [in, delta, r, mu, n, leading, mode] {
                                      Record out = in;
                                      ChainParams cp;
                                      cp.n = n;
                                      cp.j_coupling = 1.0;
                                      cp.delta = delta;
                                      cp.lambda = r;
                                      cp.mu = mu;
                                      // At λ = 0 the state is trivial; the column holds the leading order.
                                      const FisherEstimate f = leading
                                                                   ? f0_x(cp, Parameter::lambda, mode)
                                                                   : qfi_parametric(cp, Parameter::lambda,
                                                                                    StateBuilder::mu1);
                                      put_log(out, "f_lambda", f.value);
                                      if (f.value.representable()) out["j2_f_lambda"] = f.value.to_double();
                                      return std::vector<Record>{out};
                                  }});
            }
    return p;
}

Plan plan_validity(const ScanSpec& s) {
    Plan p;
    p.columns = {"delta", "mu", "n"};
    for (auto& c : log_columns("bracket")) p.columns.push_back(c);
    for (auto& c : log_columns("threshold")) p.columns.push_back(c);
    for (auto c : {"rel_err_lambda", "rel_err_mu", "rel_err_delta", "n2_over_delta_f_delta"}) p.columns.push_back(c);
    const double mu = s.mu;
    const LogMode mode = s.log_mode;
    for (double delta : s.deltas)
        for (int n : n_values(s)) {
            Record in{{"delta", delta}, {"mu", mu}, {"n", (long long)n}};
            p.jobs.push_back({in, [in, delta, mu, n, mode] {
                                  Record out = in;
                                  const LogReal bracket = bracket_LTnR(n, eta_from_delta(delta), full_truncation(n), mode);
                                  put_log(out, "bracket", bracket);
                                  // λ_max/J = sqrt(2/⟨L|T^n|R⟩)/|μ| leaves the double range in the easy-axis phase.
                                  LogReal thr;
                                  thr.sign = 1;
                                  thr.log_abs = 0.5 * (std::log(2.0) - bracket.log_abs) - std::log(std::fabs(mu));
                                  put_log(out, "threshold", thr);
                                  const double log_lambda = std::log(0.99) + thr.log_abs;
                                  // Evaluate at λ = J = 1; F_λ is λ-independent, F_μ and F_Δ scale as λ².
                                  ChainParams unit;
                                  unit.n = n;
                                  unit.delta = delta;
                                  unit.mu = mu;
                                  unit.lambda = 1.0;
                                  auto rel_err = [](double log_x, double log_f) { return std::exp(-log_x - 0.5 * log_f); };
                                  out["rel_err_lambda"] = rel_err(log_lambda, f0_x(unit, Parameter::lambda, mode).value.log_abs);
                                  out["rel_err_mu"] = rel_err(std::log(std::fabs(mu)),
                                                              f0_x(unit, Parameter::mu, mode).value.log_abs + 2.0 * log_lambda);
                                  if (delta != 0.0) {
                                      const LogReal fd = std::fabs(delta) == 1.0
                                                             ? LogReal::from_double(isotropic_f_delta(unit))
                                                             : f0_delta(unit, mode).value;
                                      if (fd.sign > 0) {
                                          const double log_f = fd.log_abs + 2.0 * log_lambda;
                                          out["rel_err_delta"] = rel_err(std::log(std::fabs(delta)), log_f);
                                          out["n2_over_delta_f_delta"] =
                                              std::exp(2.0 * std::log(double(n)) - std::log(std::fabs(delta)) - log_f);
                                      }
                                  }
                                  return std::vector<Record>{out};
                              }});
        }
    return p;
}

Plan plan_isotropic(const ScanSpec& s) {
    Plan p;
    p.columns = {"n", "eta", "bracket_eta0", "bracket_exact_eta0", "bracket_series", "bracket_exact",
                 "bracket_rel_diff", "f_delta_unit_eta0", "f_delta_unit_series", "f_delta_unit_exact",
                 "f_delta_rel_diff"};
    const LogMode mode = s.log_mode;
    const double eta = 1e-4;
    for (int n : n_values(s)) {
        Record in{{"n", (long long)n}, {"eta", eta}};
        p.jobs.push_back({in, [in, n, eta, mode] {
                              Record out = in;
                              const int d = full_truncation(n);
                              const double nn = n;
                              out["bracket_eta0"] = nn * (nn - 1.0) / 8.0;
                              out["bracket_exact_eta0"] = bracket_LTnR(n, Complex{0.0, 0.0}, d, mode).to_double();
                              const double series = isotropic_bracket_series(n, eta);
                              const double exact = bracket_LTnR(n, Complex{eta, 0.0}, d, mode).to_double();
                              out["bracket_series"] = series;
                              out["bracket_exact"] = exact;
                              out["bracket_rel_diff"] = std::fabs(series - exact) / std::fabs(exact);
                              ChainParams cp;
                              cp.n = n;
                              cp.lambda = 1.0;
                              cp.mu = 1.0;
                              cp.delta = 1.0;
                              out["f_delta_unit_eta0"] = isotropic_f_delta(cp);
                              cp.delta = std::cos(eta);
                              const double fs = isotropic_f_delta(cp);
                              out["f_delta_unit_series"] = fs;
                              if (n >= 3) {
                                  const double fe = f0_delta_unit(n, cp.delta, mode).to_double();
                                  out["f_delta_unit_exact"] = fe;
                                  out["f_delta_rel_diff"] = std::fabs(fs - fe) / std::fabs(fe);
                              }
                              return std::vector<Record>{out};
                          }});
    }
    return p;
}

Plan make_plan(const ScanSpec& s) {
    switch (s.kind) {
    case ScanKind::chi_vs_delta: return plan_chi(s);
    case ScanKind::xi_vs_eta_rational: return plan_xi_rational(s);
    case ScanKind::xi_n_vs_n: return plan_xi_n(s);
    case ScanKind::f_lambda_nonpert: return plan_f_lambda(s);
    case ScanKind::validity_report: return plan_validity(s);
    case ScanKind::isotropic_check: return plan_isotropic(s);
    }
    throw PreconditionError("unknown scan kind");
}

std::string context_of(const Record& in) {
    std::string out;
    for (const auto& [k, v] : in) {
        if (!out.empty()) out += ' ';
        out += k + '=';
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, double>) out += format_double(x);
                else if constexpr (std::is_same_v<T, long long>) out += std::to_string(x);
                else if constexpr (std::is_same_v<T, std::string>) out += x;
            },
            v);
    }
    return out;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

void validate(const ScanSpec& s) {
    if (s.threads < 1) throw PreconditionError("--threads must be >= 1");
    if (s.n_range) {
        if (s.n_range->step < 1) throw PreconditionError("--n-range step must be >= 1");
        if (s.n_range->first < 2 || s.n_range->last < s.n_range->first)
            throw PreconditionError("--n-range needs 2 <= a <= b");
    }
    if (!(s.mu >= -1.0 && s.mu <= 1.0)) throw PreconditionError("--mu must lie in [-1, 1]");
    for (double r : s.lambda_over_j)
        if (!(r >= 0.0)) throw PreconditionError("--lambda-over-j must be >= 0");
    if (s.eta_rational) {
        const auto& r = *s.eta_rational;
        if (r.p < 2 || r.q < 1 || r.q >= r.p || std::gcd(r.p, r.q) != 1)
            throw PreconditionError("--eta-rational needs coprime 0 < q < p");
    }
    switch (s.kind) {
    case ScanKind::chi_vs_delta:
    case ScanKind::xi_vs_eta_rational:
        if (s.p_max < 2) throw PreconditionError("--p-max must be >= 2");
        [[fallthrough]];
    case ScanKind::xi_n_vs_n:
        for (double d : s.deltas)
            if (!(std::fabs(d) < 1.0)) throw PreconditionError("this scan needs |delta| < 1");
        break;
    case ScanKind::f_lambda_nonpert:
        if (s.n_range->last > kMaxDenseSites) throw PreconditionError("f-lambda-nonpert is dense: n <= 12");
        for (double r : s.lambda_over_j)
            if (r > 0.0 && s.mu != 1.0) throw PreconditionError("f-lambda-nonpert with lambda > 0 needs --mu 1");
        break;
    case ScanKind::validity_report:
        if (s.mu == 0.0) throw PreconditionError("validity-report needs mu != 0");
        break;
    case ScanKind::isotropic_check:
        if (1e-4 * s.n_range->last >= 0.2) throw PreconditionError("isotropic-check needs n < 2000");
        break;
    }
}

} // namespace

ScanKind parse_scan_kind(std::string_view label) {
    for (const auto& [k, name] : kKindNames)
        if (name == label) return k;
    throw PreconditionError("unknown scan kind '" + std::string(label) + "'");
}

std::string_view to_string(ScanKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "unknown";
}

std::vector<RationalPoint> rational_grid(int p_max, int q_max) {
    if (p_max < 2) throw PreconditionError("rational grid needs p_max >= 2");
    if (q_max <= 0) q_max = p_max;
    std::vector<RationalPoint> out;
    for (int p = 2; p <= p_max; ++p)
        for (int q = 1; q < p && q <= q_max; ++q)
            if (std::gcd(p, q) == 1) out.push_back({p, q, std::cos(M_PI * q / p)});
    return out;
}

ScanSpec resolve_defaults(const ScanSpec& in) {
    ScanSpec s = in;
    switch (s.kind) {
    case ScanKind::chi_vs_delta:
        if (s.p_max == 0) s.p_max = 50;
        if (!s.n_range) s.n_range = NRange{2, 200, 1};
        if (s.deltas.empty()) s.deltas = default_irrational_deltas(200);
        break;
    case ScanKind::xi_vs_eta_rational:
        if (s.p_max == 0) s.p_max = 300;
        break;
    case ScanKind::xi_n_vs_n:
        if (s.deltas.empty() && !s.eta_rational) s.deltas = {0.1};
        break;
    case ScanKind::f_lambda_nonpert:
        if (!s.n_range) s.n_range = NRange{2, 10, 1};
        if (s.deltas.empty()) s.deltas = {2.0, 10.0, 100.0};
        if (s.lambda_over_j.empty()) s.lambda_over_j = {0.0, 1e-3, 1e-2};
        break;
    case ScanKind::validity_report:
        if (!s.n_range) s.n_range = NRange{2, 50, 1};
        if (s.deltas.empty()) s.deltas = {0.5, 1.0, 2.0};
        break;
    case ScanKind::isotropic_check:
        if (!s.n_range) s.n_range = NRange{2, 200, 1};
        break;
    }
    if (s.q_max == 0 && s.p_max > 0) s.q_max = s.p_max;
    if (s.eta_rational && s.kind != ScanKind::xi_n_vs_n) s.deltas.push_back(s.eta_rational->delta());
    return s;
}

nlohmann::json spec_to_json(const ScanSpec& s) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(s.kind));
    if (s.n_range) j["n_range"] = {s.n_range->first, s.n_range->last, s.n_range->step};
    else j["n_range"] = nullptr;
    j["delta"] = s.deltas;
    if (s.eta_rational) j["eta_rational"] = {s.eta_rational->p, s.eta_rational->q};
    else j["eta_rational"] = nullptr;
    j["lambda_over_j"] = s.lambda_over_j;
    j["mu"] = s.mu;
    j["p_max"] = s.p_max;
    j["q_max"] = s.q_max;
    j["xi_method"] = s.xi_method == XiMethod::jordan ? "jordan" : "slope";
    j["format"] = s.format == OutputFormat::csv ? "csv" : "json";
    j["log_domain"] = std::string(log_mode_name(s.log_mode));
    j["threads"] = s.threads;
    return j;
}

Table run_scan(const ScanSpec& spec) {
    const ScanSpec s = resolve_defaults(spec);
    validate(s);
    Plan plan = make_plan(s);

    std::vector<std::vector<Record>> results(plan.jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < plan.jobs.size(); i = next++) {
            try {
                results[i] = plan.jobs[i].run();
                for (auto& r : results[i]) r["status"] = std::string("ok");
            } catch (const std::exception& e) {
                Record r = plan.jobs[i].inputs;
                r["status"] = "error: " + std::string(e.what()) + " [" + context_of(plan.jobs[i].inputs) + "]";
                results[i] = {r};
            }
        }
    };
    const int nthreads = std::min<int>(s.threads, std::max<std::size_t>(plan.jobs.size(), 1));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    Table table;
    table.columns = plan.columns;
    table.columns.push_back("status");
    for (const auto& group : results)
        for (const auto& rec : group) {
            std::vector<Cell> row;
            for (const auto& c : table.columns) {
                auto it = rec.find(c);
                row.push_back(it == rec.end() ? Cell{} : it->second);
            }
            if (std::get<std::string>(rec.at("status")) != "ok") ++table.failures;
            table.rows.push_back(std::move(row));
        }
    return table;
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += csv_escape(table.columns[c]);
    }
    out += "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, double>) {
                        if (std::isfinite(x)) out += format_double(x);
                    } else if constexpr (std::is_same_v<T, long long>) {
                        out += std::to_string(x);
                    } else if constexpr (std::is_same_v<T, std::string>) {
                        out += csv_escape(x);
                    }
                },
                row[c]);
        }
        out += "\r\n";
    }
    return out;
}

std::string render_json(const Table& table, const nlohmann::json& manifest) {
    nlohmann::ordered_json doc;
    doc["manifest"] = manifest;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, std::monostate>) obj[table.columns[c]] = nullptr;
                    else if constexpr (std::is_same_v<T, double>) {
                        if (std::isfinite(x)) obj[table.columns[c]] = x;
                        else obj[table.columns[c]] = nullptr;
                    } else obj[table.columns[c]] = x;
                },
                row[c]);
        }
        rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(1) + "\n";
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

std::string_view tool_version() { return NESSQFI_VERSION; }

nlohmann::json data_manifest(const ScanSpec& spec, const Table& table) {
    nlohmann::json m;
    m["tool"] = "ness_qfi";
    m["version"] = std::string(tool_version());
    m["spec"] = spec_to_json(spec);
    m["resolved"] = spec_to_json(resolve_defaults(spec));
    m["columns"] = table.columns;
    m["rows"] = table.rows.size();
    m["failures"] = table.failures;
    return m;
}

nlohmann::json emit_manifest(const ScanSpec& spec, const Table& table, const std::string& output_bytes,
                             double wall_seconds) {
    nlohmann::json m = data_manifest(spec, table);
    m["output"] = {{"path", spec.out_path}, {"bytes", output_bytes.size()}, {"sha256", sha256_hex(output_bytes)}};
    m["wall_seconds"] = wall_seconds;
    return m;
}

namespace {

// Binds the scan options of one kind onto `spec`; shared by every kind subcommand.
void add_scan_options(CLI::App* sub, ScanSpec& spec, std::vector<int>& n_range, std::vector<int>& eta_pq,
                      std::string& log_domain, std::string& xi_method, std::string& format) {
    sub->add_option("--n-range", n_range, "chain lengths a..b in steps")->expected(3)->type_name("A B STEP");
    sub->add_option("--delta", spec.deltas, "anisotropy (repeatable)")->take_all();
    sub->add_option("--eta-rational", eta_pq, "rational eta/pi = q/p")->expected(2)->type_name("P Q");
    sub->add_option("--lambda-over-j", spec.lambda_over_j, "dissipation rates lambda/J")->take_all();
    sub->add_option("--mu", spec.mu, "driving bias")->capture_default_str();
    sub->add_option("--p-max", spec.p_max, "largest rational denominator");
    sub->add_option("--q-max", spec.q_max, "largest rational numerator");
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_option("--out", spec.out_path, "output file (stdout when absent)");
    sub->add_option("--log-domain", log_domain, "rescaling of banded products")
        ->check(CLI::IsMember({"auto", "on", "off"}))
        ->capture_default_str();
    sub->add_option("--xi-method", xi_method, "xi for rational eta/pi")
        ->check(CLI::IsMember({"jordan", "slope"}))
        ->capture_default_str();
    sub->add_option("--threads", spec.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Fisher information of the boundary-driven XXZ steady state"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.set_config("--config", "", "INI/TOML file; [scan.<kind>] sections, flags override");
    app.require_subcommand(1);
    CLI::App* scan = app.add_subcommand("scan", "run a parameter scan");
    scan->require_subcommand(1);

    ScanSpec spec;
    std::vector<int> n_range, eta_pq;
    std::string log_domain = "auto", xi_method = "jordan", format = "csv";
    for (const auto& [kind, name] : kKindNames) {
        CLI::App* sub = scan->add_subcommand(std::string(name), kind_help(kind));
        add_scan_options(sub, spec, n_range, eta_pq, log_domain, xi_method, format);
        sub->callback([&spec, kind = kind] { spec.kind = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (!n_range.empty()) spec.n_range = NRange{n_range[0], n_range[1], n_range[2]};
    if (!eta_pq.empty()) spec.eta_rational = RationalEta{eta_pq[0], eta_pq[1]};
    spec.log_mode = log_domain == "on" ? LogMode::on : log_domain == "off" ? LogMode::off : LogMode::automatic;
    spec.xi_method = xi_method == "slope" ? XiMethod::slope : XiMethod::jordan;
    spec.format = format == "json" ? OutputFormat::json : OutputFormat::csv;

    const auto t0 = std::chrono::steady_clock::now();
    Table table;
    try {
        table = run_scan(spec);
    } catch (const PreconditionError& e) {
        std::cerr << "ness_qfi: " << e.what() << "\n";
        return kExitUsage;
    }
    const std::string bytes =
        spec.format == OutputFormat::csv ? to_csv(table) : render_json(table, data_manifest(spec, table));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (spec.out_path.empty()) {
        std::cout << bytes;
    } else {
        std::ofstream(spec.out_path, std::ios::binary) << bytes;
        std::ofstream(spec.out_path + ".manifest.json", std::ios::binary)
            << emit_manifest(spec, table, bytes, wall).dump(2) << "\n";
    }
    if (table.failures > 0) {
        std::cerr << "ness_qfi: " << table.failures << " of " << table.rows.size() << " rows failed\n";
        return kExitPartial;
    }
    return kExitOk;
}

} // namespace nessqfi::cli
