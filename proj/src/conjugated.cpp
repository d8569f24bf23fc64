#include "dsuc/conjugated.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dsuc {

namespace {

constexpr double kExpGuard = 700.0;

double cell_volume(const LatticeSpec& s) { return std::pow(s.spacing(), s.dim()); }

// phi offsets around a site, all read from the extended table.
struct Stencil {
    const ConjugationContext& ctx;
    std::size_t e0;
    std::ptrdiff_t sj, sk;
    double operator()(int a, int b) const { return ctx.phi(e0 + a * sj + b * sk); }
};

void require_analytic(const ConjugationContext& ctx)
{
    if (!ctx.params()) throw std::invalid_argument("expanded operators need the default weight");
}

// Gradient and hessian of tau varphi(|x|) without allocating.
void radial_derivatives(std::span<const double> x, const WeightParams& p, double* grad, double* hess)
{
    const int d = static_cast<int>(x.size());
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    const double r = std::sqrt(r2);
    const double d1 = varphi(r, p.c_ps, 1), d2 = varphi(r, p.c_ps, 2);
    for (int j = 0; j < d; ++j) {
        grad[j] = p.tau * d1 * x[j] / r;
        for (int k = 0; k < d; ++k)
            hess[j * d + k] = p.tau * ((j == k ? d1 / r : 0.0) + (d2 - d1 / r) * x[j] * x[k] / r2);
    }
}

} // namespace

ConjugationContext::ConjugationContext(LatticeSpec spec, double tau)
    : spec_(std::move(spec)), ext_(spec_.grown(2)), tau_(tau)
{
}

ConjugationContext::ConjugationContext(LatticeSpec spec, WeightParams params)
    : ConjugationContext(std::move(spec), params.tau)
{
    params_ = params;
    phi_.assign(ext_.size(), 0.0);
    std::vector<double> x(ext_.dim());
    const double h = ext_.spacing();
    for_each_site(ext_, [&](std::size_t k, std::span<const int> n) {
        bool origin = true;
        for (int j = 0; j < ext_.dim(); ++j) {
            x[j] = h * n[j];
            origin = origin && n[j] == 0;
        }
        if (origin) {
            phi_[k] = std::numeric_limits<double>::quiet_NaN();
            has_singular_site_ = true;
            return;
        }
        double r = 0.0;
        for (double v : x) r += v * v;
        phi_[k] = params.tau * varphi(std::sqrt(r), params.c_ps);
    });
    finish_tables();
}

ConjugationContext ConjugationContext::from_table(LatticeSpec spec, double tau, const LatticeFunction& phi)
{
    ConjugationContext ctx(std::move(spec), tau);
    if (!phi.spec().contains_box(ctx.ext_)) throw std::invalid_argument("weight table must cover the box plus two sites");
    const LatticeFunction t = phi.restricted_to(ctx.ext_);
    ctx.phi_.assign(t.values().begin(), t.values().end());
    ctx.finish_tables();
    return ctx;
}

void ConjugationContext::finish_tables()
{
    double m = 0.0;
    for (double v : phi_)
        if (std::isfinite(v)) m = std::max(m, std::abs(v));
    if (!(m < kExpGuard)) throw std::overflow_error("weight overflow: max |phi| must stay below 700");
    ep_.resize(phi_.size());
    em_.resize(phi_.size());
    for (std::size_t k = 0; k < phi_.size(); ++k) {
        ep_[k] = std::exp(phi_[k]);
        em_[k] = std::exp(-phi_[k]);
    }
}

double ConjugationContext::phi_at(std::span<const int> n, int j, int a, int k, int b) const
{
    MultiIndex m(n.begin(), n.end());
    m[j] += a;
    m[k] += b;
    if (!ext_.contains(m)) throw std::out_of_range("stencil leaves the weight table");
    return phi_[ext_.flat(m)];
}

void ConjugationContext::check_support(const LatticeFunction& f) const
{
    if (!(f.spec() == spec_)) throw std::invalid_argument("function box differs from context box");
    if (!has_singular_site_) return;
    for_each_site(spec_, [&](std::size_t k, std::span<const int> n) {
        if (f[k] == 0.0) return;
        int l1 = 0;
        for (int v : n) l1 += std::abs(v);
        if (l1 <= 2) throw std::domain_error("weight singularity: support too close to the origin");
    });
}

LatticeFunction conjugate_apply(const LatticeFunction& f, const ConjugationContext& ctx)
{
    ctx.check_support(f);
    const LatticeSpec& s = f.spec();
    const double ih2 = 1.0 / (s.spacing() * s.spacing());
    LatticeFunction out(s);
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        const std::size_t e = ctx.ext_flat(n);
        // Lap(e^-phi f) at n
        double lap = 0.0;
        for (int j = 0; j < s.dim(); ++j) {
            const auto st = s.stride(j);
            const auto est = ctx.extended().stride(j);
            if (n[j] < s.hi()[j] && f[k + st] != 0.0) lap += ctx.exp_minus(e + est) * f[k + st];
            if (n[j] > s.lo()[j] && f[k - st] != 0.0) lap += ctx.exp_minus(e - est) * f[k - st];
            if (f[k] != 0.0) lap -= 2.0 * ctx.exp_minus(e) * f[k];
        }
        out[k] = lap == 0.0 ? 0.0 : ih2 * ctx.exp_plus(e) * lap;
    });
    return out;
}

LatticeFunction sym_apply(const LatticeFunction& f, const ConjugationContext& ctx)
{
    ctx.check_support(f);
    const LatticeSpec& s = f.spec();
    const double ih2 = 1.0 / (s.spacing() * s.spacing());
    LatticeFunction out(s);
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        const std::size_t e = ctx.ext_flat(n);
        double acc = 0.0;
        for (int j = 0; j < s.dim(); ++j) {
            const auto st = s.stride(j);
            const auto est = ctx.extended().stride(j);
            const double fu = n[j] < s.hi()[j] ? f[k + st] : 0.0;
            const double fd = n[j] > s.lo()[j] ? f[k - st] : 0.0;
            if (fu != 0.0) acc += std::cosh(ctx.phi(e + est) - ctx.phi(e)) * fu;
            if (fd != 0.0) acc += std::cosh(ctx.phi(e) - ctx.phi(e - est)) * fd;
            acc -= 2.0 * f[k];
        }
        out[k] = ih2 * acc;
    });
    return out;
}

LatticeFunction antisym_apply(const LatticeFunction& f, const ConjugationContext& ctx)
{
    ctx.check_support(f);
    const LatticeSpec& s = f.spec();
    const double ih2 = 1.0 / (s.spacing() * s.spacing());
    LatticeFunction out(s);
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        const std::size_t e = ctx.ext_flat(n);
        double acc = 0.0;
        for (int j = 0; j < s.dim(); ++j) {
            const auto st = s.stride(j);
            const auto est = ctx.extended().stride(j);
            const double fu = n[j] < s.hi()[j] ? f[k + st] : 0.0;
            const double fd = n[j] > s.lo()[j] ? f[k - st] : 0.0;
            if (fd != 0.0) acc += std::sinh(ctx.phi(e) - ctx.phi(e - est)) * fd;
            if (fu != 0.0) acc -= std::sinh(ctx.phi(e + est) - ctx.phi(e)) * fu;
        }
        out[k] = ih2 * acc;
    });
    return out;
}

CommutatorCoeffPair commutator_coeffs(std::span<const int> n, int j, int k, const ConjugationContext& ctx)
{
    const int d = ctx.spec().dim();
    if (j < 0 || j >= d || k < 0 || k >= d) throw std::out_of_range("direction out of range");
    if (static_cast<int>(n.size()) != d) throw std::invalid_argument("site dimension mismatch");
    if (!ctx.spec().contains(n)) throw std::out_of_range("stencil leaves the weight table");
    const auto& ext = ctx.extended();
    const Stencil P{ctx, ctx.ext_flat(n), ext.stride(j), ext.stride(k)};

    // Both forms cancel O(tau h) terms down to O(tau h^3) near the axes, so they
    // are evaluated in extended precision and rounded once.
    using L = long double;
    auto Q = [&](int a, int b) { return static_cast<L>(P(a, b)); };
    const L p00 = Q(0, 0);
    const L dpj = Q(1, 0) - p00, dpk = Q(0, 1) - p00;  // D+^j phi(n), D+^k phi(n)
    const L dmj = p00 - Q(-1, 0), dmk = p00 - Q(0, -1); // D-^j phi(n), D-^k phi(n)

    CommutatorCoeffPair out{};
    out.raw.a = double(-std::cosh(dpj) * std::sinh(Q(1, 1) - Q(1, 0)) + std::sinh(dpk) * std::cosh(Q(1, 1) - Q(0, 1)));
    out.raw.b =
        double(std::cosh(dmj) * std::sinh(Q(-1, 0) - Q(-1, -1)) - std::sinh(dmk) * std::cosh(Q(0, -1) - Q(-1, -1)));
    out.raw.c = double(std::cosh(dpj) * std::sinh(Q(1, 0) - Q(1, -1)) - std::sinh(dmk) * std::cosh(Q(1, -1) - Q(0, -1)));
    out.raw.e =
        double(-std::cosh(dmj) * std::sinh(Q(-1, 1) - Q(-1, 0)) + std::sinh(dpk) * std::cosh(Q(0, 1) - Q(-1, 1)));

    const L dpp = Q(1, 1) - Q(1, 0) - Q(0, 1) + p00;
    const L dmm = p00 - Q(-1, 0) - Q(0, -1) + Q(-1, -1);
    const L dpm = Q(1, 0) - p00 - Q(1, -1) + Q(0, -1);
    const L dmp = Q(0, 1) - p00 - Q(-1, 1) + Q(-1, 0);
    out.simplified.a = double(-std::sinh(dpp) * std::cosh(dpj - dpk));
    out.simplified.b = double(-std::sinh(dmm) * std::cosh(dmj - dmk));
    out.simplified.c = double(std::sinh(dpm) * std::cosh(dpj + dmk));
    out.simplified.e = double(std::sinh(dmp) * std::cosh(dmj + dpk));
    return out;
}

LatticeFunction commutator_apply(const LatticeFunction& f, const ConjugationContext& ctx, CoeffForm form)
{
    ctx.check_support(f);
    const LatticeSpec& s = f.spec();
    const int d = s.dim();
    const double h = s.spacing();
    const double ih4 = 1.0 / (h * h * h * h);
    LatticeFunction out(s);
    MultiIndex m(d);
    auto val = [&](std::span<const int> n, int j, int a, int k, int b) {
        m.assign(n.begin(), n.end());
        m[j] += a;
        m[k] += b;
        return f.at(m);
    };
    for_each_site(s, [&](std::size_t idx, std::span<const int> n) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const double fpp = val(n, j, 1, k, 1), fmm = val(n, j, -1, k, -1);
                const double fpm = val(n, j, 1, k, -1), fmp = val(n, j, -1, k, 1);
                if (fpp == 0.0 && fmm == 0.0 && fpm == 0.0 && fmp == 0.0) continue;
                const auto cp = commutator_coeffs(n, j, k, ctx);
                const auto& c = form == CoeffForm::raw ? cp.raw : cp.simplified;
                acc += c.a * fpp + c.b * fmm + c.c * fpm + c.e * fmp;
            }
        out[idx] = ih4 * acc;
    });
    return out;
}

double commutator_form(const LatticeFunction& f, const ConjugationContext& ctx)
{
    ctx.check_support(f);
    const LatticeSpec& s = f.spec();
    const int d = s.dim();
    const double h = s.spacing();
    const auto& ext = ctx.extended();
    double total = 0.0;
    for_each_site(s, [&](std::size_t k0, std::span<const int> n) {
        for (int j = 0; j < d; ++j) {
            const auto stj = s.stride(j);
            const double fpj = n[j] < s.hi()[j] ? f[k0 + stj] : 0.0;
            const double fmj = n[j] > s.lo()[j] ? f[k0 - stj] : 0.0;
            if (fpj == 0.0 && fmj == 0.0) continue;
            for (int k = 0; k < d; ++k) {
                const auto stk = s.stride(k);
                const double fpk = n[k] < s.hi()[k] ? f[k0 + stk] : 0.0;
                const double fmk = n[k] > s.lo()[k] ? f[k0 - stk] : 0.0;
                const Stencil P{ctx, ctx.ext_flat(n), ext.stride(j), ext.stride(k)};
                const double p00 = P(0, 0);
                double acc = 0.0;
                if (fpj != 0.0 && fpk != 0.0) {
                    const double w = std::sinh(P(1, 1) - P(1, 0) - P(0, 1) + p00);
                    acc += w * fpj * fpk + w * (std::cosh(P(1, 1) - p00) - 1.0) * fpj * fpk;
                }
                if (fmj != 0.0 && fmk != 0.0) {
                    const double w = std::sinh(p00 - P(-1, 0) - P(0, -1) + P(-1, -1));
                    acc += w * fmj * fmk + w * (std::cosh(P(-1, -1) - p00) - 1.0) * fmj * fmk;
                }
                if (fpj != 0.0 && fmk != 0.0) {
                    const double w = std::sinh(P(1, 0) - p00 - P(1, -1) + P(0, -1));
                    acc -= w * fpj * fmk + w * (std::cosh(P(1, -1) - p00) - 1.0) * fpj * fmk;
                }
                if (fmj != 0.0 && fpk != 0.0) {
                    const double w = std::sinh(P(0, 1) - p00 - P(-1, 1) + P(-1, 0));
                    acc -= w * fmj * fpk + w * (std::cosh(P(-1, 1) - p00) - 1.0) * fmj * fpk;
                }
                total += acc;
            }
        }
    });
    return cell_volume(s) * total / (h * h * h * h);
}

CarlemanRecord carleman_ratio(const LatticeFunction& u, const ConjugationContext& ctx, const FieldData* fields,
                              DifferenceKind kind)
{
    const LatticeSpec& s = u.spec();
    if (!(s == ctx.spec())) throw std::invalid_argument("function box differs from context box");
    const double h = s.spacing();
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        if (u[k] == 0.0) return;
        const double r = s.radius(n);
        if (r < 0.5 || r >= 2.0) throw std::invalid_argument("support outside annulus");
        for (int j = 0; j < s.dim(); ++j)
            if (n[j] - 2 < s.lo()[j] || n[j] + 2 > s.hi()[j])
                throw std::invalid_argument("support outside annulus: needs two sites of margin to the box edge");
    });
    CarlemanRecord rec;
    if (u.is_zero()) return rec;

    const Difference mode = kind == DifferenceKind::symmetric ? Difference::symmetric
                            : kind == DifferenceKind::forward ? Difference::forward
                                                              : Difference::backward;
    auto dsum = [&](const LatticeFunction& f) {
        LatticeFunction acc(s);
        for (int j = 0; j < s.dim(); ++j) acc += diff(f, j, mode);
        return acc;
    };
    const LatticeFunction du = dsum(u);
    const LatticeFunction d2u = dsum(du);
    LatticeFunction g = fields ? schrodinger_apply(u, *fields) : (1.0 / (h * h)) * laplacian(u);

    auto weighted = [&](const LatticeFunction& f) {
        double acc = 0.0;
        for_each_site(s, [&](std::size_t k, std::span<const int> n) {
            if (f[k] == 0.0) return;
            const double w = ctx.exp_plus(ctx.ext_flat(n)) * f[k];
            acc += w * w;
        });
        return cell_volume(s) * acc;
    };
    const double tau = ctx.tau();
    rec.lhs = tau * tau * tau * weighted(u) + tau * weighted(du) / (h * h) + weighted(d2u) / (tau * h * h * h * h);
    rec.rhs = weighted(g);
    rec.ratio = rec.rhs > 0.0 ? rec.lhs / rec.rhs : std::numeric_limits<double>::infinity();
    return rec;
}

LatticeFunction expanded_sym_apply(const LatticeFunction& f, const ConjugationContext& ctx)
{
    require_analytic(ctx);
    ctx.check_support(f);
    const LatticeSpec& s = f.spec();
    const int d = s.dim();
    const double h = s.spacing();
    LatticeFunction out = (1.0 / (h * h)) * laplacian(f);
    std::vector<double> x(d), g(d), H(d * d);
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        double acc = 0.0;
        bool any = false;
        for (int j = 0; j < d; ++j) {
            const double fu = n[j] < s.hi()[j] ? f[k + s.stride(j)] : 0.0;
            const double fd = n[j] > s.lo()[j] ? f[k - s.stride(j)] : 0.0;
            any = any || fu != 0.0 || fd != 0.0;
        }
        if (!any) return;
        for (int j = 0; j < d; ++j) x[j] = h * n[j];
        radial_derivatives(x, *ctx.params(), g.data(), H.data());
        for (int j = 0; j < d; ++j) {
            const double fu = n[j] < s.hi()[j] ? f[k + s.stride(j)] : 0.0;
            const double fd = n[j] > s.lo()[j] ? f[k - s.stride(j)] : 0.0;
            acc += 0.5 * g[j] * g[j] * (fu + fd);
        }
        out[k] += acc;
    });
    return out;
}

LatticeFunction expanded_antisym_apply(const LatticeFunction& f, const ConjugationContext& ctx)
{
    require_analytic(ctx);
    ctx.check_support(f);
    const LatticeSpec& s = f.spec();
    const int d = s.dim();
    const double h = s.spacing();
    LatticeFunction out(s);
    std::vector<double> x(d), g(d), H(d * d);
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        double acc = 0.0;
        bool computed = false;
        for (int j = 0; j < d; ++j) {
            const double fu = n[j] < s.hi()[j] ? f[k + s.stride(j)] : 0.0;
            const double fd = n[j] > s.lo()[j] ? f[k - s.stride(j)] : 0.0;
            if (fu == fd) continue;
            if (!computed) {
                for (int i = 0; i < d; ++i) x[i] = h * n[i];
                radial_derivatives(x, *ctx.params(), g.data(), H.data());
                computed = true;
            }
            acc -= g[j] * (fu - fd) / h;
        }
        out[k] = acc;
    });
    return out;
}

double expanded_commutator_form(const LatticeFunction& f, const ConjugationContext& ctx)
{
    require_analytic(ctx);
    ctx.check_support(f);
    const LatticeSpec& s = f.spec();
    const int d = s.dim();
    const double h = s.spacing();
    std::vector<double> x(d), g(d), H(d * d), fp(d), fm(d);
    double total = 0.0;
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        bool any = false;
        for (int j = 0; j < d; ++j) {
            fp[j] = n[j] < s.hi()[j] ? f[k + s.stride(j)] : 0.0;
            fm[j] = n[j] > s.lo()[j] ? f[k - s.stride(j)] : 0.0;
            any = any || fp[j] != 0.0 || fm[j] != 0.0;
        }
        if (!any) return;
        for (int j = 0; j < d; ++j) x[j] = h * n[j];
        radial_derivatives(x, *ctx.params(), g.data(), H.data());
        for (int j = 0; j < d; ++j)
            for (int kk = 0; kk < d; ++kk) {
                const double hjk = H[j * d + kk];
                const double sp = (g[j] + g[kk]) * (g[j] + g[kk]);
                const double sm = (g[j] - g[kk]) * (g[j] - g[kk]);
                total += hjk * ((fp[j] - fm[j]) / h) * ((fp[kk] - fm[kk]) / h) +
                         0.5 * hjk * (sp * (fp[j] * fp[kk] + fm[j] * fm[kk]) - sm * (fp[j] * fm[kk] + fm[j] * fp[kk]));
            }
    });
    return cell_volume(s) * total;
}

} // namespace dsuc
