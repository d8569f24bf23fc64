#include "dsuc/cli.hpp"

#include "dsuc/experiments.hpp"
#include "dsuc/weight.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dsuc::cli {

namespace {

// Bad flag values found after CLI11 parsing; reported like a parse error.
struct UsageError : std::invalid_argument {
    UsageError(const std::string& field, const std::string& msg)
        : std::invalid_argument("field '" + field + "': " + msg)
    {
    }
};

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

double parse_number(const std::string& tok)
{
    auto one = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("not a number: '" + tok + "'");
        }
        if (used != s.size()) throw std::invalid_argument("not a number: '" + tok + "'");
        return v;
    };
    const auto slash = tok.find('/');
    const double v = slash == std::string::npos ? one(trim(tok))
                                                : one(trim(tok.substr(0, slash))) / one(trim(tok.substr(slash + 1)));
    if (!std::isfinite(v)) throw std::invalid_argument("not a finite number: '" + tok + "'");
    return v;
}

template <class T>
T field(const std::string& name, const std::function<T()>& f)
{
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw UsageError(name, e.what());
    }
}

std::vector<double> positive_list(const std::string& name, const std::string& text)
{
    return field<std::vector<double>>(name, [&] {
        auto v = parse_number_list(text);
        if (v.empty()) throw std::invalid_argument("empty list");
        for (double x : v)
            if (!(x > 0.0)) throw std::invalid_argument("values must be positive");
        return v;
    });
}

double positive_number(const std::string& name, const std::string& text)
{
    const auto v = positive_list(name, text);
    if (v.size() != 1) throw UsageError(name, "expected a single value");
    return v.front();
}

struct Common {
    int d = 2;
    std::string h;
    double c_ps = kDefaultConvexification;
    std::uint64_t seed = 7;
    std::string out = "results";
    int jobs = 1;
    bool strict = false;
};

void add_common(CLI::App* sub, Common& c, const std::string& h_default, bool with_d = true)
{
    c.h = h_default;
    if (with_d) sub->add_option("--d", c.d, "lattice dimension")->check(CLI::Range(1, 8));
    sub->add_option("--h", c.h, "lattice spacings, comma separated, rationals like 1/64 allowed");
    sub->add_option("--c-ps", c.c_ps, "weight convexification constant")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", c.seed, "base RNG seed");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", c.strict, "treat warnings as failures");
    sub->add_option("--config", "key=value file; command-line flags override it");
}

// Resolved flag values, echoed into the report config. Output location and
// thread count are excluded so they do not change the data files.
nlohmann::json manifest(const CLI::App* sub)
{
    nlohmann::json m = nlohmann::json::object();
    for (const CLI::Option* o : sub->get_options()) {
        const std::string name = o->get_single_name();
        if (name.empty() || name == "help" || name == "out" || name == "jobs" || name == "config") continue;
        if (o->get_expected_min() == 0) {
            m[name] = o->count() > 0;
            continue;
        }
        m[name] = o->count() > 0 ? o->as<std::string>() : o->get_default_str();
    }
    return m;
}

std::vector<std::string> default_inputs(int d)
{
    if (d == 1) return {"linear"};
    return {"mixed", "diff_squares", "deg3"};
}

// Tokens: polynomial kinds, "solved" (uses the seed) or "solved:<seed>".
std::vector<HarmonicInput> build_inputs(const std::string& spec, int d, std::span<const double> hs,
                                        std::uint64_t seed, const std::vector<double>& center, double radius)
{
    std::vector<std::string> names = spec.empty() ? default_inputs(d) : split(spec);
    if (names.empty()) throw UsageError("inputs", "empty list");
    double shift = 0.0;
    for (double c : center) shift += c * c;
    shift = std::sqrt(shift);
    std::vector<HarmonicInput> out;
    for (const auto& name : names) {
        std::optional<std::uint64_t> solved;
        if (name == "solved") solved = seed;
        else if (name.rfind("solved:", 0) == 0)
            solved = field<std::uint64_t>("inputs", [&] { return std::stoull(name.substr(7)); });
        HarmonicKind kind{};
        if (!solved) kind = field<HarmonicKind>("inputs", [&] { return parse_harmonic_kind(name); });
        for (double h : hs) {
            if (solved) {
                HarmonicInput in = solved_input(d, h, *solved, radius);
                in.radius = radius - shift;
                out.push_back(std::move(in));
            } else {
                out.push_back(polynomial_input(d, h, kind, center, radius));
            }
        }
    }
    return out;
}

Window window_from(double delta0, double tau0)
{
    if (!(delta0 > 0.0)) throw UsageError("delta0", "must be positive");
    if (!(tau0 >= 0.0)) throw UsageError("tau0", "must be >= 0");
    return Window{delta0, tau0};
}

int finish(ExperimentReport rep, const CLI::App* sub, const Common& c, std::ostream& out)
{
    const auto adm = admissibility_check(WeightParams(2.0, c.c_ps), 0.5, 2.0);
    if (!adm.admissible)
        rep.warnings.push_back("c_ps=" + format_double(c.c_ps) +
                               " gives a non-admissible weight on 1/2 <= |x| <= 2 (min margin " +
                               format_double(adm.min_margin) + ")");
    rep.config["cli"] = manifest(sub);
    const WrittenFiles files = write_report(rep, c.out);
    out << "report " << files.json.string() << '\n';
    for (const auto& p : files.csv) out << "table " << p.string() << '\n';
    for (const auto& k : rep.constants) out << "constant " << k.name << " = " << format_double(k.value) << '\n';
    for (const auto& ch : rep.checks) out << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
    for (const auto& w : rep.warnings) out << "warning: " << w << '\n';
    if (!rep.checks_passed()) return failed;
    if (c.strict && !rep.warnings.empty()) return failed;
    return ok;
}

// Splices `--config FILE` entries into the argument list, ahead of the flags so
// explicit flags win. Keys are long flag names without the dashes.
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args)
{
    if (args.empty()) return args;
    CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(args.front());
    } catch (const CLI::OptionNotFound&) {
        return args;
    }
    std::vector<std::string> rest;
    std::vector<std::string> files;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) files.push_back(args[++i]);
        else if (args[i].rfind("--config=", 0) == 0) files.push_back(args[i].substr(9));
        else rest.push_back(args[i]);
    }
    auto given = [&](const std::string& flag) {
        return std::any_of(rest.begin(), rest.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> out{args.front()};
    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw UsageError("config", "cannot read '" + path + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            line = trim(line.substr(0, line.find('#')));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw UsageError("config", path + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
            const std::string flag = "--" + key;
            const CLI::Option* opt = sub->get_option_no_throw(flag);
            if (key == "config" || key == "help" || !opt) throw UsageError(key, "unknown config key in " + path);
            if (given(flag)) continue;
            if (opt->get_expected_min() == 0) {
                if (value == "true") out.push_back(flag);
                else if (value != "false") throw UsageError(key, "expected true or false");
            } else {
                out.push_back(flag);
                out.push_back(value);
            }
        }
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

} // namespace

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    for (const auto& tok : split(text)) out.push_back(parse_number(tok));
    return out;
}

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    for (const auto& tok : split(text)) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("not an integer: '" + tok + "'");
        }
        if (used != tok.size()) throw std::invalid_argument("not an integer: '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Discrete unique continuation experiments", "dsuc"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    std::function<int()> action;

    // carleman-sweep
    Common cs;
    SweepConfig sw;
    std::string sw_tau, sw_rule = "auto", sw_input = "bump", sw_diff = "symmetric";
    {
        auto* s = app.add_subcommand("carleman-sweep", "max Carleman ratio over seeded inputs per (h, tau)");
        add_common(s, cs, "1/32,1/64,1/128");
        s->add_option("--tau", sw_tau, "tau values; one value implies the fixed rule, several the grid rule");
        s->add_option("--tau-rule", sw_rule, "auto, fixed, fraction or grid")
            ->check(CLI::IsMember({"auto", "fixed", "fraction", "grid"}));
        s->add_option("--delta", sw.delta, "fraction rule: tau = delta * delta0 / h");
        s->add_option("--delta0", sw.window.delta0, "window upper constant");
        s->add_option("--tau0", sw.window.tau0, "window lower bound");
        s->add_option("--samples", sw.samples, "inputs per cell")->check(CLI::NonNegativeNumber);
        s->add_option("--growth-cap", sw.growth_cap, "allowed max-ratio growth per h step");
        s->add_option("--input", sw_input, "bump or spike")->check(CLI::IsMember({"bump", "spike"}));
        s->add_option("--difference", sw_diff, "first-order term: symmetric, forward or backward")
            ->check(CLI::IsMember({"symmetric", "forward", "backward"}));
        s->callback([&, s] {
            action = [&, s] {
                sw.d = cs.d;
                sw.h_grid = positive_list("h", cs.h);
                sw.c_ps = cs.c_ps;
                sw.seed = cs.seed;
                sw.jobs = cs.jobs;
                window_from(sw.window.delta0, sw.window.tau0);
                sw.taus = sw_tau.empty() ? std::vector<double>{} : positive_list("tau", sw_tau);
                std::string rule = sw_rule;
                if (rule == "auto") rule = sw.taus.empty() ? "fraction" : sw.taus.size() == 1 ? "fixed" : "grid";
                sw.tau_rule = rule == "fixed" ? TauRule::fixed : rule == "grid" ? TauRule::grid : TauRule::fraction;
                sw.input = sw_input == "spike" ? SweepInput::spike : SweepInput::bump;
                sw.difference = sw_diff == "forward"    ? DifferenceKind::forward
                                : sw_diff == "backward" ? DifferenceKind::backward
                                                        : DifferenceKind::symmetric;
                field<int>("tau-rule", [&] {
                    sw.validate();
                    return 0;
                });
                return finish(carleman_sweep(sw), s, cs, out);
            };
        });
    }

    // log-convexity
    Common lc;
    LogConvexityConfig lcc;
    std::string lc_inputs, lc_tau;
    double lc_radius = 4.0;
    {
        auto* s = app.add_subcommand("log-convexity", "empirical constant of the two-term tau bound");
        add_common(s, lc, "1/32,1/64");
        s->add_option("--inputs", lc_inputs, "harmonic inputs: const, linear, mixed, diff_squares, deg3, solved[:seed]");
        s->add_option("--tau", lc_tau, "tau values; default samples the window");
        s->add_option("--tau-samples", lcc.tau_samples, "window samples when --tau is absent")
            ->check(CLI::PositiveNumber);
        s->add_option("--delta0", lcc.window.delta0, "window upper constant");
        s->add_option("--tau0", lcc.window.tau0, "window lower bound");
        s->add_option("--growth-cap", lcc.growth_cap, "allowed growth of the constant per h step");
        s->add_option("--radius", lc_radius, "radius on which inputs are harmonic");
        s->callback([&, s] {
            action = [&, s] {
                lcc.c_ps = lc.c_ps;
                window_from(lcc.window.delta0, lcc.window.tau0);
                if (!lc_tau.empty()) lcc.taus = positive_list("tau", lc_tau);
                const auto hs = positive_list("h", lc.h);
                const auto inputs = build_inputs(lc_inputs, lc.d, hs, lc.seed, {}, lc_radius);
                return finish(log_convexity_scan(inputs, lcc), s, lc, out);
            };
        });
    }

    // three-balls
    Common tb;
    ThreeBallsConfig tbc;
    std::string tb_inputs, tb_center;
    double tb_radius = 4.0;
    int tb_m = 1;
    {
        auto* s = app.add_subcommand("three-balls", "three-balls ratio R(h) and the excess decay fit");
        add_common(s, tb, "1/32,1/64,1/128");
        s->add_option("--inputs", tb_inputs, "harmonic inputs: const, linear, mixed, diff_squares, deg3, solved[:seed]");
        s->add_option("--C", tbc.C, "threshold for the correction branch");
        s->add_option("--center", tb_center, "ball center, comma separated");
        s->add_option("--min-r2", tbc.min_r_squared, "required R^2 of the excess fit");
        s->add_option("--radius", tb_radius, "radius on which inputs are harmonic");
        s->add_option("--m", tb_m, "run on the m-fold rescaled lattice")->check(CLI::PositiveNumber);
        s->callback([&, s] {
            action = [&, s] {
                tbc.c_ps = tb.c_ps;
                if (!tb_center.empty())
                    tbc.center = field<std::vector<double>>("center", [&] { return parse_number_list(tb_center); });
                if (!tbc.center.empty() && static_cast<int>(tbc.center.size()) != tb.d)
                    throw UsageError("center", "needs d entries");
                const auto hs = positive_list("h", tb.h);
                const auto inputs = build_inputs(tb_inputs, tb.d, hs, tb.seed, tbc.center, tb_radius);
                if (tb_m > 1) return finish(rescaled_three_balls(inputs, tb_m, tbc), s, tb, out);
                return finish(three_balls_experiment(inputs, tbc), s, tb, out);
            };
        });
    }

    // symbol-scan
    Common ss;
    SymbolScanConfig ssc;
    std::string ss_xbar = "1,0";
    bool ss_no_grid = false;
    {
        auto* s = app.add_subcommand("symbol-scan", "frozen-coefficient symbol margin scan");
        add_common(s, ss, "1/128");
        s->add_option("--x-bar", ss_xbar, "frozen point, comma separated");
        s->add_option("--tau", ssc.tau, "weight parameter");
        s->add_option("--c0", ssc.c0, "margin constant");
        s->add_option("--resolution", ssc.resolution, "coarse grid points per axis")->check(CLI::Range(4, 1 << 14));
        s->add_option("--refinement-tol", ssc.refinement_tol, "allowed relative change under refinement");
        s->add_option("--gamma0", ssc.scan.gamma0, "near-region width in units of tau");
        s->add_flag("--no-grid", ss_no_grid, "skip the full symbol grid table");
        s->callback([&, s] {
            action = [&, s] {
                ssc.d = ss.d;
                ssc.h = positive_number("h", ss.h);
                ssc.c_ps = ss.c_ps;
                ssc.emit_grid = !ss_no_grid;
                ssc.x_bar = field<std::vector<double>>("x-bar", [&] { return parse_number_list(ss_xbar); });
                if (static_cast<int>(ssc.x_bar.size()) != ssc.d) throw UsageError("x-bar", "needs d entries");
                return finish(symbol_scan(ssc), s, ss, out);
            };
        });
    }

    // commutator-check
    Common cc;
    CommutatorCheckConfig ccc;
    {
        auto* s = app.add_subcommand("commutator-check", "operator identities and coefficient simplification");
        add_common(s, cc, "1/32");
        s->add_option("--delta", ccc.delta, "tau = delta * delta0 / h");
        s->add_option("--delta0", ccc.window.delta0, "window upper constant");
        s->add_option("--tau0", ccc.window.tau0, "window lower bound");
        s->add_option("--samples", ccc.samples, "seeded test functions")->check(CLI::NonNegativeNumber);
        s->add_option("--coefficient-sites", ccc.coefficient_sites, "random sites for the coefficient check")
            ->check(CLI::NonNegativeNumber);
        s->callback([&, s] {
            action = [&, s] {
                ccc.d = cc.d;
                ccc.h = positive_number("h", cc.h);
                ccc.c_ps = cc.c_ps;
                ccc.seed = cc.seed;
                window_from(ccc.window.delta0, ccc.window.tau0);
                return finish(commutator_check(ccc), s, cc, out);
            };
        });
    }

    // caccioppoli
    Common ca;
    CaccioppoliConfig cac;
    std::string ca_inputs;
    bool ca_no_gap = false;
    {
        auto* s = app.add_subcommand("caccioppoli", "gradient-to-norm ratio across h");
        add_common(s, ca, "1/32,1/64,1/128");
        s->add_option("--inputs", ca_inputs, "harmonic inputs: const, linear, mixed, diff_squares, deg3, solved[:seed]");
        s->add_option("--r1", cac.r1, "inner radius");
        s->add_option("--r2", cac.r2, "outer radius");
        s->add_option("--growth-tol", cac.growth_tol, "allowed relative growth per h step");
        s->add_flag("--no-gap-check", ca_no_gap, "report instead of rejecting radii with r1 + 100h >= r2");
        s->callback([&, s] {
            action = [&, s] {
                cac.enforce_gap = !ca_no_gap;
                const auto hs = positive_list("h", ca.h);
                const auto inputs = build_inputs(ca_inputs, ca.d, hs, ca.seed, {}, 4.0);
                return finish(caccioppoli_experiment(inputs, cac), s, ca, out);
            };
        });
    }

    // coarsen-check
    Common co;
    std::string co_inputs, co_m = "2,3,4";
    double co_tol = 1e-12;
    {
        auto* s = app.add_subcommand("coarsen-check", "discrete harmonicity after restriction to (mh)Z^d");
        add_common(s, co, "1/32,1/64");
        s->add_option("--inputs", co_inputs, "harmonic inputs: const, linear, mixed, diff_squares, deg3, solved[:seed]");
        s->add_option("--m", co_m, "coarsening factors, comma separated");
        s->add_option("--tol", co_tol, "allowed relative residual");
        s->callback([&, s] {
            action = [&, s] {
                const auto ms = field<std::vector<int>>("m", [&] {
                    auto v = parse_int_list(co_m);
                    if (v.empty()) throw std::invalid_argument("empty list");
                    for (int m : v)
                        if (m < 1) throw std::invalid_argument("factors must be >= 1");
                    return v;
                });
                const auto hs = positive_list("h", co.h);
                const auto inputs = build_inputs(co_inputs, co.d, hs, co.seed, {}, 4.0);
                return finish(coarsen_experiment(inputs, ms, co_tol), s, co, out);
            };
        });
    }

    // localize
    Common lo;
    LocalizationConfig loc;
    std::string lo_tau = "2,3,4,5,6";
    {
        auto* s = app.add_subcommand("localize", "partition-of-unity localization constants");
        add_common(s, lo, "1/64");
        s->add_option("--tau", lo_tau, "tau values");
        s->add_option("--eps0", loc.eps0, "partition parameter in (0, 1)");
        s->add_option("--samples", loc.samples, "seeded inputs per tau")->check(CLI::NonNegativeNumber);
        s->callback([&, s] {
            action = [&, s] {
                loc.d = lo.d;
                loc.h = positive_number("h", lo.h);
                loc.taus = positive_list("tau", lo_tau);
                loc.c_ps = lo.c_ps;
                loc.seed = lo.seed;
                if (!(loc.eps0 > 0.0 && loc.eps0 < 1.0)) throw UsageError("eps0", "must lie in (0, 1)");
                return finish(localization_sweep(loc), s, lo, out);
            };
        });
    }

    // singular-potential
    Common sp;
    SingularPotentialConfig spc;
    double mu0 = 0.1;
    {
        auto* s = app.add_subcommand("singular-potential", "log-convexity with saturated V and B");
        add_common(s, sp, "1/32,1/64");
        s->add_option("--mu0", mu0, "field scale: |V| = mu0 h^-3/2, |B| = mu0 h^-1/2")
            ->check(CLI::NonNegativeNumber);
        s->add_option("--seeds", spc.seeds, "runs per h")->check(CLI::PositiveNumber);
        s->add_option("--delta0", spc.delta0, "upper end of the kappa scan");
        s->add_option("--kappa-samples", spc.kappa_samples, "kappa grid size")->check(CLI::PositiveNumber);
        s->add_option("--C", spc.C, "target constant");
        s->add_option("--radius", spc.radius, "Dirichlet ball radius");
        s->add_option("--tol", spc.tol, "solver residual tolerance");
        s->callback([&, s] {
            action = [&, s] {
                spc.d = sp.d;
                spc.h_grid = positive_list("h", sp.h);
                spc.seed = sp.seed;
                spc.c_ps = sp.c_ps;
                if (!(spc.delta0 > 0.0)) throw UsageError("delta0", "must be positive");
                return finish(singular_potential_experiment(mu0, spc), s, sp, out);
            };
        });
    }

    std::vector<std::string> argv_store{"dsuc"};
    try {
        const auto expanded = expand_config(app, args);
        argv_store.insert(argv_store.end(), expanded.begin(), expanded.end());
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const CLI::App* s : app.get_subcommands()) target = s;
        out << target->help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* target = &app;
        for (const CLI::App* s : app.get_subcommands()) target = s;
        err << target->help();
        return usage;
    }

    try {
        return action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return failed;
    }
}

} // namespace dsuc::cli
