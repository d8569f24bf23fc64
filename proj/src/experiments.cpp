#include "dsuc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dsuc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> origin_or(const std::vector<double>& c, int d)
{
    if (c.empty()) return std::vector<double>(d, 0.0);
    if (static_cast<int>(c.size()) != d) throw std::invalid_argument("center dimension mismatch");
    return c;
}

struct BallNorms {
    double half, one, two;
};

BallNorms ball_norms(const LatticeFunction& u, const std::vector<double>& c)
{
    return {l2_norm(u, BallRegion(c, 0.5)), l2_norm(u, BallRegion(c, 1.0)), l2_norm(u, BallRegion(c, 2.0))};
}

// Inputs grouped by name in order of first appearance, each group sorted by h descending.
std::vector<std::vector<const HarmonicInput*>> group_inputs(std::span<const HarmonicInput> inputs)
{
    std::vector<std::vector<const HarmonicInput*>> groups;
    std::map<std::string, std::size_t> where;
    for (const auto& in : inputs) {
        auto it = where.find(in.name);
        if (it == where.end()) {
            where[in.name] = groups.size();
            groups.push_back({&in});
        } else {
            groups[it->second].push_back(&in);
        }
    }
    for (auto& g : groups)
        std::stable_sort(g.begin(), g.end(), [](const HarmonicInput* a, const HarmonicInput* b) {
            return a->u.spec().spacing() > b->u.spec().spacing();
        });
    return groups;
}

nlohmann::json window_json(const Window& w) { return {{"delta0", w.delta0}, {"tau0", w.tau0}}; }

// Runs fn(i) for i in [0, n) on `jobs` threads; results must go to slot i.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn)
{
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

LatticeFunction spike_input(const LatticeSpec& spec, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int d = spec.dim();
    const double h = spec.spacing();
    LatticeFunction u(spec);
    for (;;) {
        std::vector<double> dir(d);
        double nrm = 0.0;
        for (auto& v : dir) {
            v = normal(rng);
            nrm += v * v;
        }
        if (nrm == 0.0) continue;
        const double rho = 0.6 + 1.3 * unit(rng);
        MultiIndex n(d);
        for (int j = 0; j < d; ++j) n[j] = static_cast<int>(std::lround(rho * dir[j] / std::sqrt(nrm) / h));
        const double r = spec.radius(n);
        if (r >= 0.5 + 2 * h && r < 2.0 - 2 * h && spec.contains(n)) {
            u[spec.flat(n)] = 1.0;
            return u;
        }
    }
}

} // namespace

LatticeFunction random_field(const LatticeSpec& spec, double r_in, double r_out, std::uint64_t seed)
{
    const double h = spec.spacing();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    LatticeFunction f(spec);
    for_each_site(spec, [&](std::size_t k, std::span<const int> n) {
        const double r = spec.radius(n);
        if (r > r_in + 2 * h && r < r_out - 2 * h) f[k] = normal(rng);
    });
    return f;
}

double harmonic_defect(const LatticeFunction& u, const FieldData* fields, const BallRegion& region)
{
    const LatticeSpec& s = u.spec();
    const double h = s.spacing();
    const LatticeFunction r = fields ? schrodinger_apply(u, *fields) : (1.0 / (h * h)) * laplacian(u);
    double defect = 0.0, scale = 0.0;
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        if (!region.contains(s, n)) return;
        scale = std::max(scale, std::abs(u[k]));
        for (int j = 0; j < s.dim(); ++j)
            if (n[j] == s.lo()[j] || n[j] == s.hi()[j]) return;
        defect = std::max(defect, h * h * std::abs(r[k]));
    });
    if (scale == 0.0) return defect == 0.0 ? 0.0 : kInf;
    return defect / scale;
}

void certify_harmonic(const HarmonicInput& in, const std::vector<double>& center, double tol)
{
    const LatticeSpec& s = in.u.spec();
    const double h = s.spacing();
    for (int j = 0; j < s.dim(); ++j)
        if (s.lo()[j] * h > center[j] - 2.0 || s.hi()[j] * h < center[j] + 2.0)
            throw std::invalid_argument("uncertified input '" + in.name + "': box does not cover B_2");
    const double defect = harmonic_defect(in.u, in.fields ? &*in.fields : nullptr, BallRegion(center, in.radius));
    if (!(defect <= tol))
        throw std::invalid_argument("uncertified input '" + in.name + "': harmonic defect " + num(defect) +
                                    " exceeds " + num(tol));
}

HarmonicInput polynomial_input(int d, double h, HarmonicKind kind, std::vector<double> center, double radius)
{
    center = origin_or(center, d);
    const HarmonicPolynomial p = harmonic_polynomial(d, kind);
    MultiIndex lo(d), hi(d);
    for (int j = 0; j < d; ++j) {
        lo[j] = static_cast<int>(std::floor((center[j] - radius) / h)) - 1;
        hi[j] = static_cast<int>(std::ceil((center[j] + radius) / h)) + 1;
    }
    const LatticeSpec spec(d, h, lo, hi);
    std::vector<double> y(d);
    LatticeFunction u = LatticeFunction::sample(spec, [&](std::span<const double> x) {
        for (int j = 0; j < d; ++j) y[j] = x[j] - center[j];
        return p(y);
    });
    return {harmonic_kind_name(kind), std::move(u), std::nullopt, radius};
}

HarmonicInput solved_input(int d, double h, std::uint64_t seed, double radius, double tol)
{
    const LatticeSpec spec = LatticeSpec::covering_ball(d, h, radius, 1);
    auto sol = dirichlet_solve(DirichletProblem::on_ball(random_smooth_data(spec, seed), radius), tol);
    return {"solved-" + std::to_string(seed), std::move(sol.u), std::nullopt, radius};
}

LatticeFunction translate(const LatticeFunction& u, const MultiIndex& shift)
{
    const LatticeSpec& s = u.spec();
    if (static_cast<int>(shift.size()) != s.dim()) throw std::invalid_argument("shift dimension mismatch");
    MultiIndex lo = s.lo(), hi = s.hi();
    for (int j = 0; j < s.dim(); ++j) {
        lo[j] += shift[j];
        hi[j] += shift[j];
    }
    return LatticeFunction(LatticeSpec(s.dim(), s.spacing(), lo, hi),
                           std::vector<double>(u.values().begin(), u.values().end()));
}

ExperimentReport log_convexity_scan(std::span<const HarmonicInput> inputs, const LogConvexityConfig& cfg)
{
    const auto k = three_ball_constants(cfg.c_ps);
    ExperimentReport rep;
    rep.experiment = "log-convexity";
    rep.config = {{"c_ps", cfg.c_ps}, {"window", window_json(cfg.window)}, {"taus", cfg.taus},
                  {"tau_samples", cfg.tau_samples}, {"growth_cap", cfg.growth_cap}, {"certify_tol", cfg.certify_tol}};
    rep.summary = {{"c1", k.c1}, {"c2", k.c2}};
    rep.constants.push_back({"c1", k.c1, std::nullopt, 0.0, 1});
    rep.constants.push_back({"c2", k.c2, std::nullopt, 0.0, 1});
    Table& t = rep.table("scan", {"input", "h", "tau", "in_window", "norm_half", "norm_1", "norm_2", "c_emp"});

    double overall = -kInf;
    std::size_t overall_n = 0;
    for (const auto& group : group_inputs(inputs)) {
        std::vector<std::pair<double, double>> per_h; // (h, max C_emp)
        std::size_t group_n = 0;
        double group_max = -kInf;
        for (const HarmonicInput* in : group) {
            const int d = in->u.spec().dim();
            const std::vector<double> c(d, 0.0);
            certify_harmonic(*in, c, cfg.certify_tol);
            const double h = in->u.spec().spacing();
            const BallNorms nb = ball_norms(in->u, c);
            if (nb.two == 0.0) throw std::invalid_argument("degenerate input '" + in->name + "': u vanishes on B_2");
            std::vector<double> taus = cfg.taus;
            if (taus.empty()) {
                const double hi = cfg.window.delta0 / h;
                if (hi > cfg.window.tau0)
                    for (int i = 0; i < cfg.tau_samples; ++i)
                        taus.push_back(cfg.window.tau0 + (i + 1) * (hi - cfg.window.tau0) / (cfg.tau_samples + 1));
            }
            double best = -kInf;
            for (double tau : taus) {
                const bool in_window = cfg.window.admits(tau, h);
                const double ce = nb.one / (std::exp(k.c1 * tau) * nb.half + std::exp(-k.c2 * tau) * nb.two);
                t.add({in->name, h, tau, std::int64_t(in_window), nb.half, nb.one, nb.two, ce});
                if (in_window) {
                    best = std::max(best, ce);
                    ++group_n;
                }
            }
            if (best == -kInf) {
                rep.warnings.push_back("input '" + in->name + "' at h=" + num(h) + ": no tau inside the window (" +
                                       num(cfg.window.tau0) + ", " + num(cfg.window.delta0 / h) + ")");
                continue;
            }
            per_h.emplace_back(h, best);
            group_max = std::max(group_max, best);
        }
        if (group_n > 0) {
            rep.constants.push_back({"C_emp[" + group.front()->name + "]", group_max, std::nullopt, 0.0, group_n});
            overall = std::max(overall, group_max);
            overall_n += group_n;
        }
        for (std::size_t i = 1; i < per_h.size(); ++i) {
            const double g = per_h[i].second / per_h[i - 1].second;
            rep.checks.push_back({"h_stability[" + group.front()->name + "] h=" + num(per_h[i - 1].first) + "->" +
                                      num(per_h[i].first),
                                  g <= cfg.growth_cap, "max C_emp growth " + num(g)});
        }
    }
    if (overall_n > 0) rep.constants.push_back({"C_emp", overall, std::nullopt, 0.0, overall_n});
    return rep;
}

ExperimentReport log_convexity_scan(const LatticeFunction& u, const LogConvexityConfig& cfg)
{
    const HarmonicInput in{"u", u, std::nullopt, 4.0};
    return log_convexity_scan(std::span<const HarmonicInput>(&in, 1), cfg);
}

ExperimentReport three_balls_experiment(std::span<const HarmonicInput> inputs, const ThreeBallsConfig& cfg)
{
    const auto k = three_ball_constants(cfg.c_ps);
    ExperimentReport rep;
    rep.experiment = "three-balls";
    rep.config = {{"c_ps", cfg.c_ps}, {"C", cfg.C}, {"center", cfg.center}, {"floor", cfg.floor},
                  {"min_r_squared", cfg.min_r_squared}, {"certify_tol", cfg.certify_tol}};
    rep.summary = {{"c1", k.c1}, {"c2", k.c2}, {"alpha", k.alpha}};
    rep.constants.push_back({"alpha", k.alpha, std::nullopt, 0.0, 1});
    Table& t = rep.table("ratios", {"input", "h", "norm_half", "norm_1", "norm_2", "geometric", "R", "active",
                                    "log_excess"});
    double r_max = -kInf;
    std::size_t rows = 0;
    for (const auto& group : group_inputs(inputs)) {
        std::vector<double> xs, ys;
        for (const HarmonicInput* in : group) {
            const int d = in->u.spec().dim();
            const auto c = origin_or(cfg.center, d);
            certify_harmonic(*in, c, cfg.certify_tol);
            const double h = in->u.spec().spacing();
            const BallNorms nb = ball_norms(in->u, c);
            if (nb.two == 0.0) throw std::invalid_argument("degenerate input '" + in->name + "': u vanishes on B_2");
            const double geom = std::pow(nb.half, k.alpha) * std::pow(nb.two, 1.0 - k.alpha);
            const double R = geom > 0.0 ? nb.one / geom : kInf;
            const bool active = R > cfg.C;
            const double excess = std::max(nb.one - cfg.C * geom, cfg.floor);
            const double le = std::log(excess / nb.two);
            t.add({in->name, h, nb.half, nb.one, nb.two, geom, R, std::int64_t(active), le});
            r_max = std::max(r_max, R);
            ++rows;
            if (active) {
                xs.push_back(1.0 / h);
                ys.push_back(le);
            }
        }
        const std::string& name = group.front()->name;
        if (xs.empty()) {
            rep.checks.push_back({"three_balls[" + name + "]", true, "R(h) <= C at every h"});
            continue;
        }
        if (xs.size() < 3)
            throw std::invalid_argument("insufficient sweep: correction branch active at " +
                                        std::to_string(xs.size()) + " h values for input '" + name +
                                        "', need at least 3");
        const LineFit f = fit_line(xs, ys);
        const double c0 = -f.slope;
        rep.constants.push_back({"c0_emp[" + name + "]", c0, f.r_squared, f.rms_residual, f.n});
        rep.checks.push_back({"three_balls[" + name + "]", c0 > 0.0 && f.r_squared >= cfg.min_r_squared,
                              "excess decay c0_emp=" + num(c0) + " R^2=" + num(f.r_squared)});
    }
    if (rows > 0) rep.constants.push_back({"R_max", r_max, std::nullopt, 0.0, rows});
    return rep;
}

void SweepConfig::validate() const
{
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        if (!(h_grid[i] > 0.0)) throw std::invalid_argument("h values must be positive");
        if (i > 0 && !(h_grid[i] < h_grid[i - 1])) throw std::invalid_argument("h grid must be strictly descending");
    }
    if (tau_rule == TauRule::fixed && taus.size() != 1) throw std::invalid_argument("fixed tau rule needs one tau");
    if (tau_rule == TauRule::grid && taus.empty()) throw std::invalid_argument("grid tau rule needs tau values");
    if (tau_rule == TauRule::fraction && !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("tau fraction delta must lie in (0, 1)");
    if (samples < 0) throw std::invalid_argument("samples must be >= 0");
    if (!(growth_cap > 0.0)) throw std::invalid_argument("growth_cap must be positive");
    if (!(c_ps >= 0.0)) throw std::invalid_argument("c_ps must be >= 0");
}

ExperimentReport carleman_sweep(const SweepConfig& cfg)
{
    cfg.validate();
    ExperimentReport rep;
    rep.experiment = "carleman-sweep";
    const char* rule = cfg.tau_rule == TauRule::fixed ? "fixed" : cfg.tau_rule == TauRule::grid ? "grid" : "fraction";
    const char* diffk = cfg.difference == DifferenceKind::symmetric ? "symmetric"
                        : cfg.difference == DifferenceKind::forward ? "forward"
                                                                    : "backward";
    rep.config = {{"d", cfg.d}, {"h_grid", cfg.h_grid}, {"tau_rule", rule}, {"taus", cfg.taus},
                  {"delta", cfg.delta}, {"c_ps", cfg.c_ps}, {"window", window_json(cfg.window)},
                  {"seed", cfg.seed}, {"samples", cfg.samples}, {"growth_cap", cfg.growth_cap},
                  {"input", cfg.input == SweepInput::bump ? "bump" : "spike"}, {"difference", diffk}};
    if (cfg.samples == 0) return rep;

    struct Cell {
        double h, tau;
        bool ok;
        std::optional<ConjugationContext> ctx;
        std::vector<double> ratios;
    };
    std::vector<Cell> cells;
    for (double h : cfg.h_grid) {
        std::vector<double> taus;
        if (cfg.tau_rule == TauRule::fraction) taus.push_back(cfg.delta * cfg.window.delta0 / h);
        else taus = cfg.taus;
        for (double tau : taus) {
            Cell c{h, tau, tau > 1.0 && cfg.window.admits(tau, h), std::nullopt, {}};
            if (!c.ok)
                rep.warnings.push_back("skipped h=" + num(h) + " tau=" + num(tau) + ": outside the window (" +
                                       num(cfg.window.tau0) + ", " + num(cfg.window.delta0 / h) + ")");
            cells.push_back(std::move(c));
        }
    }
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].ok) continue;
        const LatticeSpec spec = LatticeSpec::covering_ball(cfg.d, cells[i].h, 2.0, 3);
        cells[i].ctx.emplace(spec, WeightParams(cells[i].tau, cfg.c_ps));
        cells[i].ratios.assign(cfg.samples, 0.0);
        active.push_back(i);
    }
    const std::size_t per = static_cast<std::size_t>(cfg.samples);
    parallel_for(active.size() * per, cfg.jobs, [&](std::size_t job) {
        Cell& c = cells[active[job / per]];
        const std::size_t s = job % per;
        const LatticeSpec& spec = c.ctx->spec();
        const LatticeFunction u = cfg.input == SweepInput::bump ? random_bump(spec, 0.5, 2.0, cfg.seed + s)
                                                                : spike_input(spec, cfg.seed + s);
        c.ratios[s] = carleman_ratio(u, *c.ctx, nullptr, cfg.difference).ratio;
    });

    Table& t = rep.table("cells", {"h", "tau", "status", "samples", "max_ratio", "median_ratio", "min_ratio"});
    double cmax = -kInf;
    std::size_t total = 0;
    for (const auto& c : cells) {
        if (!c.ok) {
            t.add({c.h, c.tau, std::string("skipped"), std::int64_t(0), std::nan(""), std::nan(""), std::nan("")});
            continue;
        }
        const double mx = *std::max_element(c.ratios.begin(), c.ratios.end());
        const double mn = *std::min_element(c.ratios.begin(), c.ratios.end());
        t.add({c.h, c.tau, std::string("ok"), std::int64_t(c.ratios.size()), mx, median(c.ratios), mn});
        cmax = std::max(cmax, mx);
        total += c.ratios.size();
    }
    if (total > 0) rep.constants.push_back({"C_emp", cmax, std::nullopt, 0.0, total});

    if (cfg.tau_rule == TauRule::fraction) {
        Table& g = rep.table("growth", {"h_coarse", "h_fine", "max_coarse", "max_fine", "growth"});
        const Cell* prev = nullptr;
        for (const auto& c : cells) {
            if (!c.ok) {
                prev = nullptr;
                continue;
            }
            if (prev) {
                const double a = *std::max_element(prev->ratios.begin(), prev->ratios.end());
                const double b = *std::max_element(c.ratios.begin(), c.ratios.end());
                const double growth = b / a;
                g.add({prev->h, c.h, a, b, growth});
                rep.checks.push_back({"growth h=" + num(prev->h) + "->" + num(c.h), growth <= cfg.growth_cap,
                                      "max ratio growth " + num(growth) + " (cap " + num(cfg.growth_cap) + ")"});
            }
            prev = &c;
        }
    }
    return rep;
}

CaccioppoliRecord caccioppoli_ratio(const LatticeFunction& u, const FieldData* fields, double r1, double r2,
                                    bool enforce_gap)
{
    const LatticeSpec& s = u.spec();
    const double h = s.spacing();
    if (!(r1 > 0.0) || !(r2 > r1)) throw std::invalid_argument("need 0 < r1 < r2");
    CaccioppoliRecord rec;
    rec.gap_condition_met = 10.0 * h < r1 && r1 + 100.0 * h < r2;
    if (enforce_gap && !rec.gap_condition_met) throw std::invalid_argument("radii too close for h");
    const std::vector<double> c(s.dim(), 0.0);
    if (fields) {
        const double defect = harmonic_defect(u, fields, BallRegion(c, r2));
        if (!(defect <= 1e-9)) throw std::invalid_argument("caccioppoli input is not a certified solution");
    }
    const BallRegion b1(c, r1);
    for (int j = 0; j < s.dim(); ++j) {
        const double nrm = l2_norm(diff(u, j, Difference::forward), b1) / h;
        rec.lhs += nrm * nrm;
    }
    const double n2 = l2_norm(u, BallRegion(c, r2));
    rec.rhs = n2 * n2;
    rec.ratio = rec.rhs > 0.0 ? rec.lhs / rec.rhs : (rec.lhs > 0.0 ? kInf : 0.0);
    return rec;
}

ExperimentReport caccioppoli_experiment(std::span<const HarmonicInput> inputs, const CaccioppoliConfig& cfg)
{
    ExperimentReport rep;
    rep.experiment = "caccioppoli";
    rep.config = {{"r1", cfg.r1}, {"r2", cfg.r2}, {"enforce_gap", cfg.enforce_gap}, {"growth_tol", cfg.growth_tol},
                  {"certify_tol", cfg.certify_tol}};
    Table& t = rep.table("ratios", {"input", "h", "lhs", "rhs", "ratio", "gap_condition_met"});
    double cmax = -kInf;
    std::size_t n = 0;
    for (const auto& group : group_inputs(inputs)) {
        std::vector<std::pair<double, double>> per_h;
        for (const HarmonicInput* in : group) {
            const std::vector<double> c(in->u.spec().dim(), 0.0);
            certify_harmonic(*in, c, cfg.certify_tol);
            const auto rec = caccioppoli_ratio(in->u, nullptr, cfg.r1, cfg.r2, cfg.enforce_gap);
            if (!rec.gap_condition_met)
                rep.warnings.push_back("input '" + in->name + "' at h=" + num(in->u.spec().spacing()) +
                                       ": gap condition 10h < r1, r1 + 100h < r2 not met");
            t.add({in->name, in->u.spec().spacing(), rec.lhs, rec.rhs, rec.ratio,
                   std::int64_t(rec.gap_condition_met)});
            per_h.emplace_back(in->u.spec().spacing(), rec.ratio);
            cmax = std::max(cmax, rec.ratio);
            ++n;
        }
        for (std::size_t i = 1; i < per_h.size(); ++i) {
            const double a = per_h[i - 1].second, b = per_h[i].second;
            const bool ok = (a == 0.0 && b == 0.0) || b <= (1.0 + cfg.growth_tol) * a;
            rep.checks.push_back({"no_growth[" + group.front()->name + "] h=" + num(per_h[i - 1].first) + "->" +
                                      num(per_h[i].first),
                                  ok, "ratio " + num(a) + " -> " + num(b)});
        }
    }
    if (n > 0) rep.constants.push_back({"C_emp", cmax, std::nullopt, 0.0, n});
    return rep;
}

double smoothstep(double t)
{
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double partition_factor(double t, double scale, int i)
{
    const double s = t / scale;
    return smoothstep(s - i + 1) - smoothstep(s - i);
}

namespace {

struct LocalizationAccumulator {
    const LatticeFunction& f;
    const ConjugationContext& ctx;
    LocalizationRecord rec;

    void add_piece(const LatticeFunction& fk)
    {
        rec.sum_S += l2_norm(sym_apply(fk, ctx));
        rec.sum_A += l2_norm(antisym_apply(fk, ctx));
        rec.sum_L += l2_norm(conjugate_apply(fk, ctx));
        ++rec.pieces;
    }

    void finish(double eps0)
    {
        const LatticeSpec& s = f.spec();
        const double h = s.spacing(), tau = ctx.tau();
        rec.norm_S = l2_norm(sym_apply(f, ctx));
        rec.norm_A = l2_norm(antisym_apply(f, ctx));
        rec.norm_L = l2_norm(conjugate_apply(f, ctx));
        double ds = 0.0;
        for (int j = 0; j < s.dim(); ++j) ds += l2_norm(diff(f, j, Difference::symmetric)) / h;
        const double nf = l2_norm(f);
        const double st = std::sqrt(tau);
        rec.rhs_S = rec.norm_S + st * eps0 * ds + (tau * eps0 + tau * tau * st * h * eps0) * nf;
        rec.rhs_A = rec.norm_A + tau * st * eps0 * nf;
        rec.rhs_L = rec.norm_L + st * eps0 * ds + (tau * eps0 + tau * st * eps0 + tau * tau * st * h * eps0) * nf;
    }
};

} // namespace

LocalizationRecord localization_sums(const LatticeFunction& f, const ConjugationContext& ctx, double eps0,
                                     std::span<const LatticeFunction> cutoffs)
{
    LocalizationAccumulator acc{f, ctx, {}};
    for (const auto& theta : cutoffs) {
        LatticeFunction fk = f;
        if (!(theta.spec() == f.spec())) throw std::invalid_argument("cutoff box differs from function box");
        for (std::size_t k = 0; k < fk.spec().size(); ++k) fk[k] *= theta[k];
        acc.add_piece(fk);
    }
    acc.finish(eps0);
    return acc.rec;
}

ExperimentReport localization_diagnostic(const LatticeFunction& f, const ConjugationContext& ctx, double eps0)
{
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw std::invalid_argument("eps0 must lie in (0, 1)");
    const LatticeSpec& s = f.spec();
    const int d = s.dim();
    const double h = s.spacing();
    const double scale = 1.0 / (eps0 * std::sqrt(ctx.tau()));
    if (scale > 1.5) throw std::invalid_argument("partition scale exceeds annulus width");
    if (f.is_zero()) throw std::invalid_argument("degenerate input: f vanishes");

    MultiIndex cmin(d, std::numeric_limits<int>::max()), cmax(d, std::numeric_limits<int>::min());
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        if (f[k] == 0.0) return;
        for (int j = 0; j < d; ++j) {
            const int i = static_cast<int>(std::floor(h * n[j] / scale));
            cmin[j] = std::min(cmin[j], i);
            cmax[j] = std::max(cmax[j], i + 1);
        }
    });
    // Per-axis factor tables for every cell index in range.
    std::vector<std::vector<std::vector<double>>> factor(d);
    for (int j = 0; j < d; ++j)
        for (int i = cmin[j]; i <= cmax[j]; ++i) {
            std::vector<double> col(s.extent(j));
            for (int q = 0; q < s.extent(j); ++q) col[q] = partition_factor(h * (s.lo()[j] + q), scale, i);
            factor[j].push_back(std::move(col));
        }
    LocalizationAccumulator acc{f, ctx, {}};
    acc.rec.scale = scale;
    MultiIndex cell = cmin;
    for (;;) {
        LatticeFunction fk(s);
        bool nonzero = false;
        for_each_site(s, [&](std::size_t k, std::span<const int> n) {
            if (f[k] == 0.0) return;
            double th = 1.0;
            for (int j = 0; j < d; ++j) th *= factor[j][cell[j] - cmin[j]][n[j] - s.lo()[j]];
            fk[k] = th * f[k];
            nonzero = nonzero || fk[k] != 0.0;
        });
        if (nonzero) acc.add_piece(fk);
        int j = d - 1;
        for (; j >= 0; --j) {
            if (++cell[j] <= cmax[j]) break;
            cell[j] = cmin[j];
        }
        if (j < 0) break;
    }
    acc.finish(eps0);
    const auto& r = acc.rec;

    ExperimentReport rep;
    rep.experiment = "localize";
    rep.config = {{"tau", ctx.tau()}, {"eps0", eps0}, {"h", h}, {"d", d}};
    Table& t = rep.table("localization", {"tau", "scale", "pieces", "norm_S", "sum_S", "C_S", "norm_A", "sum_A",
                                          "C_A", "norm_L", "sum_L", "C_L"});
    t.add({ctx.tau(), scale, std::int64_t(r.pieces), r.norm_S, r.sum_S, r.sum_S / r.rhs_S, r.norm_A, r.sum_A,
           r.sum_A / r.rhs_A, r.norm_L, r.sum_L, r.sum_L / r.rhs_L});
    const double slack = 1e-12;
    rep.checks.push_back({"minkowski_S", r.norm_S <= r.sum_S * (1 + slack), num(r.norm_S) + " <= " + num(r.sum_S)});
    rep.checks.push_back({"minkowski_A", r.norm_A <= r.sum_A * (1 + slack), num(r.norm_A) + " <= " + num(r.sum_A)});
    rep.checks.push_back({"minkowski_L", r.norm_L <= r.sum_L * (1 + slack), num(r.norm_L) + " <= " + num(r.sum_L)});
    rep.constants.push_back({"C_S", r.sum_S / r.rhs_S, std::nullopt, 0.0, 1});
    rep.constants.push_back({"C_A", r.sum_A / r.rhs_A, std::nullopt, 0.0, 1});
    rep.constants.push_back({"C_L", r.sum_L / r.rhs_L, std::nullopt, 0.0, 1});
    return rep;
}

ExperimentReport localization_sweep(const LocalizationConfig& cfg)
{
    ExperimentReport rep;
    rep.experiment = "localize";
    rep.config = {{"d", cfg.d}, {"h", cfg.h}, {"taus", cfg.taus}, {"eps0", cfg.eps0}, {"c_ps", cfg.c_ps},
                  {"seed", cfg.seed}, {"samples", cfg.samples}};
    const LatticeSpec spec = LatticeSpec::covering_ball(cfg.d, cfg.h, 2.0, 3);
    Table& t = rep.table("localization", {"tau", "sample", "scale", "pieces", "norm_S", "sum_S", "C_S", "norm_A",
                                          "sum_A", "C_A", "norm_L", "sum_L", "C_L"});
    double cs = -kInf, ca = -kInf, cl = -kInf;
    std::size_t n = 0;
    for (double tau : cfg.taus) {
        const ConjugationContext ctx(spec, WeightParams(tau, cfg.c_ps));
        for (int s = 0; s < cfg.samples; ++s) {
            const LatticeFunction f = random_bump(spec, 0.5, 2.0, cfg.seed + s);
            const ExperimentReport one = localization_diagnostic(f, ctx, cfg.eps0);
            auto row = one.tables.front().rows.front();
            row.insert(row.begin() + 1, Cell(std::int64_t(s)));
            t.add(row);
            for (const auto& c : one.checks)
                rep.checks.push_back({c.name + " tau=" + num(tau) + " sample=" + std::to_string(s), c.passed, c.detail});
            cs = std::max(cs, one.find_constant("C_S")->value);
            ca = std::max(ca, one.find_constant("C_A")->value);
            cl = std::max(cl, one.find_constant("C_L")->value);
            ++n;
        }
    }
    if (n > 0) {
        rep.constants.push_back({"C_S", cs, std::nullopt, 0.0, n});
        rep.constants.push_back({"C_A", ca, std::nullopt, 0.0, n});
        rep.constants.push_back({"C_L", cl, std::nullopt, 0.0, n});
    }
    return rep;
}

ExperimentReport singular_potential_experiment(double mu0, const SingularPotentialConfig& cfg)
{
    if (!(mu0 >= 0.0)) throw std::invalid_argument("mu0 must be >= 0");
    if (cfg.kappa_samples < 1) throw std::invalid_argument("kappa_samples must be >= 1");
    const auto k = three_ball_constants(cfg.c_ps);
    ExperimentReport rep;
    rep.experiment = "singular-potential";
    rep.config = {{"mu0", mu0}, {"d", cfg.d}, {"h_grid", cfg.h_grid}, {"seeds", cfg.seeds}, {"seed", cfg.seed},
                  {"c_ps", cfg.c_ps}, {"delta0", cfg.delta0}, {"kappa_samples", cfg.kappa_samples},
                  {"C", cfg.C}, {"radius", cfg.radius}, {"tol", cfg.tol}};
    Table& rows = rep.table("runs", {"h", "seed", "v_bound", "b_bound", "residual", "norm_half", "norm_1", "norm_2",
                                     "kappa_star", "c1_hat", "c2_hat"});
    Table& scan = rep.table("kappa_scan", {"h", "seed", "kappa", "C"});
    double c1_hat = -kInf, c2_hat = kInf;
    std::size_t n = 0;
    bool all_found = true;
    for (std::size_t hi = 0; hi < cfg.h_grid.size(); ++hi) {
        const double h = cfg.h_grid[hi];
        const LatticeSpec spec = LatticeSpec::covering_ball(cfg.d, h, cfg.radius, 1);
        for (int s = 0; s < cfg.seeds; ++s) {
            std::seed_seq sq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                             static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(hi)};
            std::mt19937_64 rng(sq);
            std::uniform_real_distribution<double> sym(-1.0, 1.0);
            auto saturated = [&](double bound) {
                LatticeFunction f(spec);
                if (bound == 0.0) return f;
                for (auto& v : f.values()) v = sym(rng);
                f *= bound / f.sup_norm();
                return f;
            };
            LatticeFunction V = saturated(mu0 * std::pow(h, -1.5));
            std::vector<LatticeFunction> B;
            for (int j = 0; j < cfg.d; ++j) B.push_back(saturated(mu0 * std::pow(h, -0.5)));
            FieldData fields(std::move(V), std::move(B));
            DirichletSolution sol{LatticeFunction(spec), 0.0, 0.0, 0};
            try {
                sol = dirichlet_solve(
                    DirichletProblem::on_ball(random_smooth_data(spec, cfg.seed + s), cfg.radius, fields), cfg.tol);
            } catch (const SolverError& e) {
                throw SolverError("singular potential solve failed at h=" + num(h) + " seed=" +
                                      std::to_string(cfg.seed + s) + ": " + e.what(),
                                  e.residual());
            }
            const std::vector<double> c(cfg.d, 0.0);
            const BallNorms nb = ball_norms(sol.u, c);
            if (nb.two == 0.0) throw std::invalid_argument("degenerate solution: u vanishes on B_2");
            double kstar = std::nan("");
            for (int i = 0; i < cfg.kappa_samples; ++i) {
                const double kappa = cfg.delta0 * (i + 1) / cfg.kappa_samples;
                const double C =
                    nb.one / (std::exp(k.c1 * kappa / h) * nb.half + std::exp(-k.c2 * kappa / h) * nb.two);
                scan.add({h, std::int64_t(cfg.seed + s), kappa, C});
                if (std::isnan(kstar) && C <= cfg.C) kstar = kappa;
            }
            const double a = k.c1 * kstar, b = k.c2 * kstar;
            rows.add({h, std::int64_t(cfg.seed + s), fields.potential_bound(), fields.magnetic_bound(), sol.residual,
                      nb.half, nb.one, nb.two, kstar, a, b});
            if (std::isnan(kstar)) {
                all_found = false;
                rep.warnings.push_back("h=" + num(h) + " seed=" + std::to_string(cfg.seed + s) +
                                       ": no kappa in (0, delta0] closes the estimate");
                continue;
            }
            c1_hat = std::max(c1_hat, a);
            c2_hat = std::min(c2_hat, b);
            ++n;
        }
    }
    if (n > 0) {
        rep.constants.push_back({"c1_hat", c1_hat, std::nullopt, 0.0, n});
        rep.constants.push_back({"c2_hat", c2_hat, std::nullopt, 0.0, n});
    }
    rep.checks.push_back({"c2_hat_positive", all_found && n > 0 && c2_hat > 0.0,
                          n > 0 ? "min c2_hat " + num(c2_hat) : "no runs"});
    return rep;
}

CoarsenRecord coarsen_check(const LatticeFunction& u, int m, const BallRegion& region)
{
    const LatticeFunction cu = coarsen(u, m);
    const LatticeSpec& cs = cu.spec();
    const LatticeSpec& fs = u.spec();
    CoarsenRecord rec;
    rec.m = m;
    for_each_site(fs, [&](std::size_t k, std::span<const int> n) {
        if (region.contains(fs, n)) rec.scale = std::max(rec.scale, std::abs(u[k]));
    });
    const double H = cs.spacing();
    for_each_site(cs, [&](std::size_t k, std::span<const int> n) {
        for (int j = 0; j < cs.dim(); ++j)
            if (n[j] == cs.lo()[j] || n[j] == cs.hi()[j]) return;
        double r2 = 0.0;
        for (int j = 0; j < cs.dim(); ++j) {
            const double t = H * n[j] - region.center[j];
            r2 += t * t;
        }
        if (!(std::sqrt(r2) + H < region.radius)) return;
        double lap = 0.0;
        for (int j = 0; j < cs.dim(); ++j) lap += cu[k + cs.stride(j)] + cu[k - cs.stride(j)] - 2.0 * cu[k];
        rec.residual = std::max(rec.residual, std::abs(lap));
        ++rec.coarse_sites;
    });
    rec.relative = rec.scale > 0.0 ? rec.residual / rec.scale : (rec.residual == 0.0 ? 0.0 : kInf);
    return rec;
}

ExperimentReport coarsen_experiment(std::span<const HarmonicInput> inputs, std::span<const int> ms, double tol)
{
    ExperimentReport rep;
    rep.experiment = "coarsen-check";
    rep.config = {{"ms", std::vector<int>(ms.begin(), ms.end())}, {"tol", tol}};
    Table& t = rep.table("coarsening", {"input", "d", "h", "m", "coarse_sites", "residual", "relative", "passed"});
    for (const auto& in : inputs) {
        const int d = in.u.spec().dim();
        const std::vector<double> c(d, 0.0);
        certify_harmonic(in, c, 1e-9);
        for (int m : ms) {
            const auto r = coarsen_check(in.u, m, BallRegion(c, in.radius));
            const bool ok = r.relative <= tol && r.coarse_sites > 0;
            t.add({in.name, std::int64_t(d), in.u.spec().spacing(), std::int64_t(m), std::int64_t(r.coarse_sites),
                   r.residual, r.relative, std::int64_t(ok)});
            rep.checks.push_back({"coarsen[" + in.name + ", d=" + std::to_string(d) + ", h=" +
                                      num(in.u.spec().spacing()) + ", m=" + std::to_string(m) + "]",
                                  ok, "relative residual " + num(r.relative)});
        }
    }
    return rep;
}

ExperimentReport rescaled_three_balls(std::span<const HarmonicInput> inputs, int m, const ThreeBallsConfig& cfg,
                                      double coarsen_tol)
{
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    std::vector<HarmonicInput> scaled;
    std::vector<CoarsenRecord> recs;
    for (const auto& in : inputs) {
        if (in.fields && !in.fields->is_zero()) throw std::invalid_argument("rescaling needs V = B = 0");
        const LatticeSpec& s = in.u.spec();
        const auto c = origin_or(cfg.center, s.dim());
        certify_harmonic(in, c, cfg.certify_tol);
        std::vector<double> cm(c);
        for (double& v : cm) v /= m;
        const auto rec = coarsen_check(in.u, m, BallRegion(cm, in.radius));
        if (!(rec.relative <= coarsen_tol))
            throw std::invalid_argument("coarsening breaks discrete harmonicity for input '" + in.name +
                                        "' (relative residual " + num(rec.relative) + ")");
        recs.push_back(rec);
        LatticeFunction um(LatticeSpec(s.dim(), m * s.spacing(), s.lo(), s.hi()),
                           std::vector<double>(in.u.values().begin(), in.u.values().end()));
        scaled.push_back({in.name, std::move(um), std::nullopt, in.radius});
    }
    ExperimentReport rep = three_balls_experiment(scaled, cfg);
    rep.experiment = "rescaled-three-balls";
    rep.config["m"] = m;
    rep.config["coarsen_tol"] = coarsen_tol;
    Table& t = rep.table("coarsening", {"input", "h", "m", "coarse_sites", "relative"});
    for (std::size_t i = 0; i < inputs.size(); ++i)
        t.add({inputs[i].name, inputs[i].u.spec().spacing(), std::int64_t(m), std::int64_t(recs[i].coarse_sites),
               recs[i].relative});
    return rep;
}

ExperimentReport commutator_check(const CommutatorCheckConfig& cfg)
{
    ExperimentReport rep;
    rep.experiment = "commutator-check";
    rep.config = {{"d", cfg.d}, {"h", cfg.h}, {"delta", cfg.delta}, {"window", window_json(cfg.window)},
                  {"c_ps", cfg.c_ps}, {"seed", cfg.seed}, {"samples", cfg.samples},
                  {"coefficient_sites", cfg.coefficient_sites}};
    const double tau = cfg.delta * cfg.window.delta0 / cfg.h;
    if (!cfg.window.admits(tau, cfg.h))
        rep.warnings.push_back("tau=" + num(tau) + " outside the window (" + num(cfg.window.tau0) + ", " +
                               num(cfg.window.delta0 / cfg.h) + ")");
    const LatticeSpec spec = LatticeSpec::covering_ball(cfg.d, cfg.h, 2.0, 3);
    const ConjugationContext ctx(spec, WeightParams(tau, cfg.c_ps));
    auto rel = [](double a, double b) {
        const double s = std::max(std::abs(a), std::abs(b));
        return s > 0.0 ? std::abs(a - b) / s : 0.0;
    };
    auto sup_rel = [](const LatticeFunction& a, const LatticeFunction& b) {
        const double s = std::max(a.sup_norm(), b.sup_norm());
        return s > 0.0 ? (a - b).sup_norm() / s : 0.0;
    };
    Table& t = rep.table("identities", {"sample", "input", "split", "energy", "two_path", "pointwise", "symmetry",
                                        "antisymmetry", "expanded_S", "expanded_A", "expanded_commutator"});
    double worst[6] = {0, 0, 0, 0, 0, 0};
    for (int s = 0; s < cfg.samples; ++s) {
        const bool rough = s % 2 == 0;
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
        const LatticeFunction f = rough ? random_field(spec, 0.5, 2.0, seed) : random_bump(spec, 0.5, 2.0, seed);
        const LatticeFunction g = random_field(spec, 0.5, 2.0, seed + 100003);
        const LatticeFunction L = conjugate_apply(f, ctx), S = sym_apply(f, ctx), A = antisym_apply(f, ctx);
        const double split = sup_rel(S + A, L);
        const double form = commutator_form(f, ctx);
        const LatticeFunction SA = sym_apply(A, ctx), AS = antisym_apply(S, ctx);
        const double composed = inner_product(f, SA) - inner_product(f, AS);
        const double nl = l2_norm(L), ns = l2_norm(S), na = l2_norm(A);
        const double energy = rel(nl * nl, ns * ns + na * na + form);
        const double two_path = rel(form, composed);
        // The composed side cancels two much larger terms; measure against them.
        const double pointwise = (commutator_apply(f, ctx) - (SA - AS)).sup_norm() /
                                 std::max(SA.sup_norm(), AS.sup_norm());
        const double sym = std::abs(inner_product(S, g) - inner_product(f, sym_apply(g, ctx))) / (ns * l2_norm(g));
        const double anti =
            std::abs(inner_product(A, g) + inner_product(f, antisym_apply(g, ctx))) / (na * l2_norm(g));
        const double es = l2_norm(expanded_sym_apply(f, ctx)) / ns;
        const double ea = l2_norm(expanded_antisym_apply(f, ctx)) / na;
        const double ec = expanded_commutator_form(f, ctx) / form;
        t.add({std::int64_t(s), std::string(rough ? "rough" : "bump"), split, energy, two_path, pointwise, sym, anti,
               es, ea, ec});
        const double v[6] = {split, energy, two_path, pointwise, sym, anti};
        for (int i = 0; i < 6; ++i) worst[i] = std::max(worst[i], v[i]);
    }
    const char* names[6] = {"split", "energy", "two_path", "pointwise", "symmetry", "antisymmetry"};
    const double tols[6] = {1e-11, 1e-11, 1e-11, 1e-11, 1e-12, 1e-12};
    if (cfg.samples > 0)
        for (int i = 0; i < 6; ++i)
            rep.checks.push_back({names[i], worst[i] <= tols[i], "max relative error " + num(worst[i])});

    // Raw against simplified coefficients at random sites.
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> dir(0, cfg.d - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double coeff_worst = 0.0;
    int done = 0;
    while (done < cfg.coefficient_sites) {
        MultiIndex n(cfg.d);
        for (int j = 0; j < cfg.d; ++j)
            n[j] = spec.lo()[j] + static_cast<int>(unit(rng) * spec.extent(j)) % spec.extent(j);
        int l1 = 0;
        for (int v : n) l1 += std::abs(v);
        if (l1 <= 2) continue; // the stencil would touch the singular origin
        const auto cp = commutator_coeffs(n, dir(rng), dir(rng), ctx);
        coeff_worst = std::max({coeff_worst, rel(cp.raw.a, cp.simplified.a), rel(cp.raw.b, cp.simplified.b),
                                rel(cp.raw.c, cp.simplified.c), rel(cp.raw.e, cp.simplified.e)});
        ++done;
    }
    if (cfg.coefficient_sites > 0)
        rep.checks.push_back({"coefficients", coeff_worst <= 1e-12, "max relative error " + num(coeff_worst)});
    rep.summary = {{"tau", tau}, {"coefficient_max_relative_error", coeff_worst}};
    return rep;
}

ExperimentReport symbol_scan(const SymbolScanConfig& cfg)
{
    ExperimentReport rep;
    rep.experiment = "symbol-scan";
    rep.config = {{"d", cfg.d}, {"x_bar", cfg.x_bar}, {"tau", cfg.tau}, {"h", cfg.h}, {"c0", cfg.c0},
                  {"c_ps", cfg.c_ps}, {"resolution", cfg.resolution}, {"refinement_tol", cfg.refinement_tol},
                  {"gamma0", cfg.scan.gamma0}, {"zoom_candidates", cfg.scan.zoom_candidates},
                  {"zoom_levels", cfg.scan.zoom_levels}, {"zoom_points", cfg.scan.zoom_points},
                  {"emit_grid", cfg.emit_grid}};
    if (static_cast<int>(cfg.x_bar.size()) != cfg.d) throw std::invalid_argument("x_bar must have d entries");
    const FrozenPoint fp = FrozenPoint::from_weight(cfg.x_bar, WeightParams(cfg.tau, cfg.c_ps), cfg.h);
    const auto r = margin_refinement(fp, cfg.c0, cfg.resolution, cfg.refinement_tol, cfg.scan);
    rep.summary = {{"coarse", margin_report_json(r.coarse)}, {"fine", margin_report_json(r.fine)},
                   {"relative_change", r.relative_change}};
    Table& t = rep.table("refinement", {"resolution", "min_margin", "grid_min_margin", "high_min", "low_min",
                                        "near_min", "c1_split"});
    for (const MarginReport* m : {&r.coarse, &r.fine})
        t.add({std::int64_t(m->resolution), m->min_margin, m->grid_min_margin, m->high.min_margin,
               m->low.min_margin, m->near.min_margin, m->c1_split});
    rep.constants.push_back({"min_margin", r.fine.min_margin, std::nullopt, 0.0, SymbolGrid(cfg.d, 2 * cfg.resolution, cfg.h).size()});
    rep.constants.push_back({"C1", r.fine.c1_split, std::nullopt, 0.0, SymbolGrid(cfg.d, 2 * cfg.resolution, cfg.h).size()});
    rep.checks.push_back({"margin_positive", r.fine.min_margin > 0.0, "min margin " + num(r.fine.min_margin)});
    rep.checks.push_back({"refinement_agrees", r.agrees,
                          "relative change " + num(r.relative_change) + " (tol " + num(cfg.refinement_tol) + ")"});
    if (cfg.emit_grid) {
        std::vector<std::string> cols;
        for (int j = 0; j < cfg.d; ++j) cols.push_back("xi_" + std::to_string(j + 1));
        for (const char* c : {"p_r", "p_i", "q", "margin"}) cols.emplace_back(c);
        Table& g = rep.table("symbol_grid", cols);
        const SymbolGrid grid(cfg.d, cfg.resolution, cfg.h);
        std::vector<double> xi(cfg.d);
        for (std::size_t f = 0; f < grid.size(); ++f) {
            grid.point(f, xi);
            std::vector<Cell> row(xi.begin(), xi.end());
            row.push_back(symbol_pr(xi, fp));
            row.push_back(symbol_pi(xi, fp));
            row.push_back(symbol_q(xi, fp));
            row.push_back(symbol_margin(xi, fp, cfg.c0));
            g.add(std::move(row));
        }
    }
    return rep;
}

} // namespace dsuc
