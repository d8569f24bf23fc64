#include "dsuc/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dsuc {

namespace {

constexpr double kPi = std::numbers::pi;

struct Trig {
    std::vector<double> s, c, half; // sin(h xi), cos(h xi), sin^2(h xi / 2)
    explicit Trig(int d) : s(d), c(d), half(d) {}
    void set(int j, double hx)
    {
        s[j] = std::sin(hx);
        c[j] = std::cos(hx);
        const double t = std::sin(0.5 * hx);
        half[j] = t * t;
    }
};

struct SymbolValues {
    double pr, pi, q, margin;
};

SymbolValues evaluate(const Trig& t, const FrozenPoint& fp, double c0)
{
    const int d = fp.dim();
    const double h = fp.h, ih2 = 1.0 / (h * h);
    double pr = 0.0, pi = 0.0, q = 0.0, d2 = 0.0, d4 = 0.0;
    for (int j = 0; j < d; ++j) {
        const double g = fp.grad_phi[j];
        pr += -4.0 * ih2 * t.half[j] + g * g * t.c[j];
        pi += 2.0 * g * t.s[j] / h;
        const double s2 = t.s[j] * t.s[j] * ih2;
        d2 += s2;
        d4 += s2 * s2;
        for (int k = 0; k < d; ++k) {
            const double H = fp.hess_phi(j, k);
            if (H == 0.0) continue;
            const double gp = g + fp.grad_phi[k], gm = g - fp.grad_phi[k];
            const double cminus = t.c[j] * t.c[k] + t.s[j] * t.s[k];
            const double cplus = t.c[j] * t.c[k] - t.s[j] * t.s[k];
            q += 4.0 * ih2 * t.s[j] * t.s[k] * H + H * (gp * gp * cminus - gm * gm * cplus);
        }
    }
    const double tau = fp.tau;
    const double den = tau * tau * tau * tau + tau * tau * d2 + d4;
    return {pr, pi, q, (pr * pr + pi * pi + c0 * tau * q) / den};
}

Trig trig_of(std::span<const double> xi, const FrozenPoint& fp)
{
    if (static_cast<int>(xi.size()) != fp.dim()) throw std::invalid_argument("frequency dimension mismatch");
    Trig t(fp.dim());
    for (int j = 0; j < fp.dim(); ++j) t.set(j, fp.h * xi[j]);
    return t;
}

double wrap(double x, double h)
{
    const double period = 2.0 * kPi / h;
    double y = std::fmod(x + kPi / h, period);
    if (y <= 0.0) y += period;
    return y - kPi / h;
}

double norm(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

struct Candidate {
    double margin;
    std::size_t order;
    std::vector<double> xi;
};

// Points on C_tau used as extra zoom seeds.
std::vector<std::vector<double>> char_set_samples(const FrozenPoint& fp)
{
    const int d = fp.dim();
    std::vector<std::vector<double>> out;
    if (d < 2) return out;
    const double R = fp.grad_phi.norm();
    const Eigen::VectorXd g = fp.grad_phi / R;
    // Orthonormal directions spanning the complement of g.
    std::vector<Eigen::VectorXd> basis;
    for (int i = 0; i < d && static_cast<int>(basis.size()) < d - 1; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(d, i);
        v -= v.dot(g) * g;
        for (const auto& b : basis) v -= v.dot(b) * b;
        if (v.norm() > 1e-8) basis.push_back(v / v.norm());
    }
    const int m = d == 2 ? 2 : 8;
    for (int i = 0; i < m; ++i) {
        const double a = 2.0 * kPi * i / m;
        Eigen::VectorXd v = basis.size() == 1 ? Eigen::VectorXd((i == 0 ? 1.0 : -1.0) * basis[0])
                                              : Eigen::VectorXd(std::cos(a) * basis[0] + std::sin(a) * basis[1]);
        v *= R;
        out.emplace_back(v.data(), v.data() + d);
    }
    return out;
}

void classify(RegionMin& high, RegionMin& low, RegionMin& near, std::span<const double> xi, double margin,
              const FrozenPoint& fp, double c1, double gamma0)
{
    const double tau = fp.tau;
    RegionMin* r;
    if (fp.dim() >= 2 && char_set_distance(xi, fp) <= gamma0 * tau) r = &near;
    else if (norm(xi) >= c1 * tau) r = &high;
    else r = &low;
    ++r->samples;
    if (margin < r->min_margin) {
        r->min_margin = margin;
        r->argmin_xi.assign(xi.begin(), xi.end());
    }
}

LatticeFunction apply_frozen(const LatticeFunction& f, const FrozenPoint& fp, Boundary bc, bool symmetric)
{
    const LatticeSpec& s = f.spec();
    if (s.dim() != fp.dim()) throw std::invalid_argument("frozen point dimension mismatch");
    const double h = s.spacing();
    LatticeFunction out(s);
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        double acc = 0.0;
        for (int j = 0; j < s.dim(); ++j) {
            const auto st = s.stride(j);
            const int ext = s.extent(j);
            double fu, fd;
            if (bc == Boundary::periodic) {
                fu = n[j] < s.hi()[j] ? f[k + st] : f[k - (ext - 1) * st];
                fd = n[j] > s.lo()[j] ? f[k - st] : f[k + (ext - 1) * st];
            } else {
                fu = n[j] < s.hi()[j] ? f[k + st] : 0.0;
                fd = n[j] > s.lo()[j] ? f[k - st] : 0.0;
            }
            const double g = fp.grad_phi[j];
            if (symmetric) acc += (fu + fd - 2.0 * f[k]) / (h * h) + 0.5 * g * g * (fu + fd);
            else acc -= g * (fu - fd) / h;
        }
        out[k] = acc;
    });
    return out;
}

} // namespace

FrozenPoint FrozenPoint::from_weight(std::vector<double> x_bar, const WeightParams& params, double h)
{
    if (!(h > 0.0)) throw std::invalid_argument("spacing must be positive");
    const double r = norm(x_bar);
    if (!(r > 0.5 && r < 2.0)) throw std::invalid_argument("frozen point must lie in the annulus 1/2 < |x| < 2");
    const WeightEval e = phi_eval(x_bar, params);
    return FrozenPoint{std::move(x_bar), e.gradient, e.hessian, params.tau, h};
}

SymbolGrid::SymbolGrid(int d, int resolution, double h) : d_(d), n_(resolution), h_(h)
{
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (resolution < 2) throw std::invalid_argument("grid resolution must be >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("spacing must be positive");
}

double SymbolGrid::axis(int k) const { return -kPi / h_ + 2.0 * kPi * (k + 1) / (n_ * h_); }

std::size_t SymbolGrid::size() const
{
    std::size_t s = 1;
    for (int j = 0; j < d_; ++j) s *= static_cast<std::size_t>(n_);
    return s;
}

void SymbolGrid::point(std::size_t flat, std::span<double> xi) const
{
    for (int j = d_ - 1; j >= 0; --j) {
        xi[j] = axis(static_cast<int>(flat % n_));
        flat /= n_;
    }
}

double symbol_pr(std::span<const double> xi, const FrozenPoint& fp) { return evaluate(trig_of(xi, fp), fp, 0.0).pr; }
double symbol_pi(std::span<const double> xi, const FrozenPoint& fp) { return evaluate(trig_of(xi, fp), fp, 0.0).pi; }
double symbol_q(std::span<const double> xi, const FrozenPoint& fp) { return evaluate(trig_of(xi, fp), fp, 0.0).q; }

double symbol_margin(std::span<const double> xi, const FrozenPoint& fp, double c0)
{
    return evaluate(trig_of(xi, fp), fp, c0).margin;
}

double symbol_q_taylor(std::span<const double> xi, const FrozenPoint& fp)
{
    const int d = fp.dim();
    Eigen::Map<const Eigen::VectorXd> x(xi.data(), d);
    return 4.0 * x.dot(fp.hess_phi * x) + 4.0 * fp.grad_phi.dot(fp.hess_phi * fp.grad_phi);
}

double char_set_distance(std::span<const double> xi, const FrozenPoint& fp)
{
    const int d = fp.dim();
    if (static_cast<int>(xi.size()) != d) throw std::invalid_argument("frequency dimension mismatch");
    const double R = fp.grad_phi.norm();
    if (!(R > 0.0)) throw std::invalid_argument("degenerate frozen point: grad phi = 0");
    if (d == 1) return std::numeric_limits<double>::infinity();
    Eigen::Map<const Eigen::VectorXd> x(xi.data(), d);
    const double a = x.dot(fp.grad_phi) / R;
    const double p = std::sqrt(std::max(0.0, x.squaredNorm() - a * a));
    return std::hypot(a, p - R);
}

MarginReport lower_bound_margin(const FrozenPoint& fp, double c0, const SymbolGrid& grid, const ScanOptions& opts)
{
    const int d = fp.dim();
    if (grid.dim() != d) throw std::invalid_argument("grid dimension mismatch");
    if (grid.spacing() != fp.h) throw std::invalid_argument("grid spacing differs from frozen point spacing");
    if (grid.resolution() < opts.min_resolution)
        throw std::invalid_argument("grid resolution below minimum " + std::to_string(opts.min_resolution));
    const double h = fp.h, tau = fp.tau;
    const int N = grid.resolution();

    // Per-axis trig tables.
    std::vector<double> ax(N), as(N), ac(N), ah(N);
    for (int k = 0; k < N; ++k) {
        ax[k] = grid.axis(k);
        as[k] = std::sin(h * ax[k]);
        ac[k] = std::cos(h * ax[k]);
        const double t = std::sin(0.5 * h * ax[k]);
        ah[k] = t * t;
    }

    const std::size_t total = grid.size();
    std::vector<int> idx(d, 0);
    std::vector<double> xi(d);
    Trig t(d);
    std::vector<double> margins(total);
    double c1 = 0.0;
    for (std::size_t f = 0; f < total; ++f) {
        for (int j = 0; j < d; ++j) {
            xi[j] = ax[idx[j]];
            t.s[j] = as[idx[j]];
            t.c[j] = ac[idx[j]];
            t.half[j] = ah[idx[j]];
        }
        const SymbolValues v = evaluate(t, fp, c0);
        margins[f] = v.margin;
        const double r = norm(xi);
        if (std::abs(v.pr) < r * r / 32.0) c1 = std::max(c1, r / tau);
        for (int j = d - 1; j >= 0; --j) {
            if (++idx[j] < N) break;
            idx[j] = 0;
        }
    }

    MarginReport rep;
    rep.c1_split = c1;
    rep.gamma0 = opts.gamma0;
    rep.resolution = N;
    const double inf = std::numeric_limits<double>::infinity();
    rep.high = {inf, {}, 0};
    rep.low = {inf, {}, 0};
    rep.near = {inf, {}, 0};

    // Best K grid points; strict comparison keeps the smallest index on ties.
    std::vector<Candidate> best;
    const auto K = static_cast<std::size_t>(std::max(0, opts.zoom_candidates));
    for (std::size_t f = 0; f < total; ++f) {
        grid.point(f, xi);
        classify(rep.high, rep.low, rep.near, xi, margins[f], fp, c1, opts.gamma0);
        if (K == 0) continue;
        if (best.size() < K || margins[f] < best.back().margin) {
            Candidate c{margins[f], f, xi};
            auto pos = std::upper_bound(best.begin(), best.end(), c, [](const Candidate& a, const Candidate& b) {
                return a.margin < b.margin || (a.margin == b.margin && a.order < b.order);
            });
            best.insert(pos, std::move(c));
            if (best.size() > K) best.pop_back();
        }
    }
    const std::size_t argmin = static_cast<std::size_t>(
        std::min_element(margins.begin(), margins.end()) - margins.begin());
    rep.grid_min_margin = margins[argmin];
    grid.point(argmin, xi);
    rep.min_margin = rep.grid_min_margin;
    rep.argmin_xi = xi;

    if (K > 0 && opts.zoom_levels > 0) {
        for (auto& s : char_set_samples(fp)) best.push_back({symbol_margin(s, fp, c0), total + best.size(), s});
        const int P = std::max(3, opts.zoom_points);
        const double step0 = 2.0 * kPi / (N * h);
        std::vector<int> li(d);
        std::vector<double> trial(d);
        for (const auto& cand : best) {
            std::vector<double> centre = cand.xi;
            double cbest = cand.margin;
            double w = step0;
            for (int level = 0; level < opts.zoom_levels; ++level) {
                std::fill(li.begin(), li.end(), 0);
                std::vector<double> next = centre;
                std::size_t local = 1;
                for (int j = 0; j < d; ++j) local *= static_cast<std::size_t>(P);
                for (std::size_t q = 0; q < local; ++q) {
                    for (int j = 0; j < d; ++j) trial[j] = wrap(centre[j] + w * (2.0 * li[j] / (P - 1) - 1.0), h);
                    const double m = symbol_margin(trial, fp, c0);
                    classify(rep.high, rep.low, rep.near, trial, m, fp, c1, opts.gamma0);
                    if (m < cbest) {
                        cbest = m;
                        next = trial;
                    }
                    for (int j = d - 1; j >= 0; --j) {
                        if (++li[j] < P) break;
                        li[j] = 0;
                    }
                }
                centre = next;
                w /= 4.0;
            }
            if (cbest < rep.min_margin) {
                rep.min_margin = cbest;
                rep.argmin_xi = centre;
            }
        }
    }
    return rep;
}

RefinementCheck margin_refinement(const FrozenPoint& fp, double c0, int resolution, double tolerance,
                                  const ScanOptions& opts)
{
    RefinementCheck r{lower_bound_margin(fp, c0, SymbolGrid(fp.dim(), resolution, fp.h), opts),
                      lower_bound_margin(fp, c0, SymbolGrid(fp.dim(), 2 * resolution, fp.h), opts), 0.0, false};
    const double a = r.coarse.min_margin, b = r.fine.min_margin;
    const double scale = std::max(std::abs(a), std::abs(b));
    r.relative_change = scale > 0.0 ? std::abs(a - b) / scale : 0.0;
    r.agrees = r.relative_change <= tolerance;
    return r;
}

nlohmann::json margin_report_json(const MarginReport& r)
{
    auto region = [](const RegionMin& m) {
        nlohmann::json j;
        j["samples"] = m.samples;
        if (m.samples == 0) {
            j["min_margin"] = nullptr;
            j["argmin_xi"] = nullptr;
        } else {
            j["min_margin"] = m.min_margin;
            j["argmin_xi"] = m.argmin_xi;
        }
        return j;
    };
    nlohmann::json j;
    j["min_margin"] = r.min_margin;
    j["argmin_xi"] = r.argmin_xi;
    j["grid_min_margin"] = r.grid_min_margin;
    j["resolution"] = r.resolution;
    j["c1_split"] = r.c1_split;
    j["gamma0"] = r.gamma0;
    j["regions"] = {{"high_frequency", region(r.high)}, {"low_frequency", region(r.low)},
                    {"near_characteristic", region(r.near)}};
    return j;
}

void write_symbol_csv(std::ostream& os, const FrozenPoint& fp, double c0, const SymbolGrid& grid)
{
    const int d = fp.dim();
    for (int j = 0; j < d; ++j) os << "xi_" << (j + 1) << ',';
    os << "p_r,p_i,q,margin\n";
    std::vector<double> xi(d);
    char buf[32];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << sep;
    };
    for (std::size_t f = 0; f < grid.size(); ++f) {
        grid.point(f, xi);
        const SymbolValues v = evaluate(trig_of(xi, fp), fp, c0);
        for (double x : xi) put(x, ',');
        put(v.pr, ',');
        put(v.pi, ',');
        put(v.q, ',');
        put(v.margin, '\n');
    }
}

LatticeFunction frozen_sym_apply(const LatticeFunction& f, const FrozenPoint& fp, Boundary bc)
{
    return apply_frozen(f, fp, bc, true);
}

LatticeFunction frozen_antisym_apply(const LatticeFunction& f, const FrozenPoint& fp, Boundary bc)
{
    return apply_frozen(f, fp, bc, false);
}

double frozen_commutator_form(const LatticeFunction& f, const FrozenPoint& fp, Boundary bc)
{
    const LatticeSpec& s = f.spec();
    const int d = s.dim();
    if (d != fp.dim()) throw std::invalid_argument("frozen point dimension mismatch");
    const double h = s.spacing();
    std::vector<double> up(d), dn(d);
    double total = 0.0;
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        for (int j = 0; j < d; ++j) {
            const auto st = s.stride(j);
            const int ext = s.extent(j);
            if (bc == Boundary::periodic) {
                up[j] = n[j] < s.hi()[j] ? f[k + st] : f[k - (ext - 1) * st];
                dn[j] = n[j] > s.lo()[j] ? f[k - st] : f[k + (ext - 1) * st];
            } else {
                up[j] = n[j] < s.hi()[j] ? f[k + st] : 0.0;
                dn[j] = n[j] > s.lo()[j] ? f[k - st] : 0.0;
            }
        }
        for (int j = 0; j < d; ++j)
            for (int kk = 0; kk < d; ++kk) {
                const double H = fp.hess_phi(j, kk);
                const double gp = fp.grad_phi[j] + fp.grad_phi[kk], gm = fp.grad_phi[j] - fp.grad_phi[kk];
                total += H * ((up[j] - dn[j]) / h) * ((up[kk] - dn[kk]) / h) +
                         0.5 * H * (gp * gp * (up[j] * up[kk] + dn[j] * dn[kk]) - gm * gm * (up[j] * dn[kk] + dn[j] * up[kk]));
            }
    });
    return std::pow(h, d) * total;
}

} // namespace dsuc
