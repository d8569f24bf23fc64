#include "dsuc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsuc {

namespace {

void check_direction(const LatticeSpec& spec, int j)
{
    if (j < 0 || j >= spec.dim()) throw std::out_of_range("direction out of range");
}

void check_same(const LatticeSpec& a, const LatticeSpec& b)
{
    if (!(a == b)) throw std::invalid_argument("lattice spec mismatch");
}

int floor_div(int a, int m)
{
    int q = a / m;
    if ((a % m != 0) && ((a < 0) != (m < 0))) --q;
    return q;
}

int ceil_div(int a, int m) { return -floor_div(-a, m); }

} // namespace

LatticeSpec::LatticeSpec(int d, double h, MultiIndex lo, MultiIndex hi)
    : d_(d), h_(h), lo_(std::move(lo)), hi_(std::move(hi))
{
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("spacing must be positive");
    if (static_cast<int>(lo_.size()) != d || static_cast<int>(hi_.size()) != d)
        throw std::invalid_argument("box bounds must have d entries");
    stride_.assign(d, 1);
    size_ = 1;
    for (int j = d - 1; j >= 0; --j) {
        if (hi_[j] < lo_[j]) throw std::invalid_argument("empty box");
        stride_[j] = static_cast<std::ptrdiff_t>(size_);
        size_ *= static_cast<std::size_t>(hi_[j] - lo_[j] + 1);
    }
}

LatticeSpec LatticeSpec::cube(int d, double h, int half_width)
{
    return LatticeSpec(d, h, MultiIndex(d, -half_width), MultiIndex(d, half_width));
}

LatticeSpec LatticeSpec::covering_ball(int d, double h, double radius, int halo)
{
    const int w = static_cast<int>(std::ceil(radius / h - 1e-12)) + halo;
    return cube(d, h, w);
}

bool LatticeSpec::contains(std::span<const int> n) const
{
    for (int j = 0; j < d_; ++j)
        if (n[j] < lo_[j] || n[j] > hi_[j]) return false;
    return true;
}

std::size_t LatticeSpec::flat(std::span<const int> n) const
{
    std::ptrdiff_t k = 0;
    for (int j = 0; j < d_; ++j) k += (n[j] - lo_[j]) * stride_[j];
    return static_cast<std::size_t>(k);
}

MultiIndex LatticeSpec::index(std::size_t flat) const
{
    MultiIndex n(d_);
    for (int j = 0; j < d_; ++j) {
        const auto q = static_cast<std::ptrdiff_t>(flat) / stride_[j];
        n[j] = lo_[j] + static_cast<int>(q);
        flat -= static_cast<std::size_t>(q * stride_[j]);
    }
    return n;
}

double LatticeSpec::radius(std::span<const int> n) const
{
    double s = 0.0;
    for (int j = 0; j < d_; ++j) s += (h_ * n[j]) * (h_ * n[j]);
    return std::sqrt(s);
}

LatticeSpec LatticeSpec::grown(int halo) const
{
    MultiIndex lo = lo_, hi = hi_;
    for (int j = 0; j < d_; ++j) {
        lo[j] -= halo;
        hi[j] += halo;
    }
    return LatticeSpec(d_, h_, lo, hi);
}

bool LatticeSpec::same_lattice(const LatticeSpec& other) const
{
    return d_ == other.d_ && h_ == other.h_;
}

bool LatticeSpec::contains_box(const LatticeSpec& other) const
{
    if (!same_lattice(other)) return false;
    for (int j = 0; j < d_; ++j)
        if (other.lo_[j] < lo_[j] || other.hi_[j] > hi_[j]) return false;
    return true;
}

bool LatticeSpec::operator==(const LatticeSpec& other) const
{
    return same_lattice(other) && lo_ == other.lo_ && hi_ == other.hi_;
}

LatticeFunction::LatticeFunction(LatticeSpec spec, double fill)
    : spec_(std::move(spec)), v_(spec_.size(), fill)
{
    if (!std::isfinite(fill)) throw std::invalid_argument("non-finite lattice value");
}

LatticeFunction::LatticeFunction(LatticeSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), v_(std::move(values))
{
    if (v_.size() != spec_.size()) throw std::invalid_argument("value count does not match box");
    require_finite();
}

double LatticeFunction::at(std::span<const int> n) const
{
    return spec_.contains(n) ? v_[spec_.flat(n)] : 0.0;
}

double LatticeFunction::sup_norm() const
{
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

bool LatticeFunction::is_zero() const
{
    return std::all_of(v_.begin(), v_.end(), [](double x) { return x == 0.0; });
}

void LatticeFunction::require_finite() const
{
    for (double x : v_)
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite lattice value");
}

LatticeFunction LatticeFunction::restricted_to(const LatticeSpec& box) const
{
    if (!spec_.same_lattice(box)) throw std::invalid_argument("lattice spec mismatch");
    LatticeFunction out(box);
    for_each_site(box, [&](std::size_t k, std::span<const int> n) { out.v_[k] = at(n); });
    return out;
}

LatticeFunction& LatticeFunction::operator+=(const LatticeFunction& g)
{
    check_same(spec_, g.spec_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += g.v_[k];
    return *this;
}

LatticeFunction& LatticeFunction::operator-=(const LatticeFunction& g)
{
    check_same(spec_, g.spec_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= g.v_[k];
    return *this;
}

LatticeFunction& LatticeFunction::operator*=(double s)
{
    for (double& x : v_) x *= s;
    return *this;
}

BallRegion::BallRegion(std::vector<double> c, double r) : center(std::move(c)), radius(r)
{
    if (!(r > 0.0)) throw std::invalid_argument("ball radius must be positive");
    if (center.empty()) throw std::invalid_argument("ball center must have d entries");
}

BallRegion BallRegion::centered(int d, double radius)
{
    return BallRegion(std::vector<double>(d, 0.0), radius);
}

bool BallRegion::contains(const LatticeSpec& spec, std::span<const int> n) const
{
    if (static_cast<int>(center.size()) != spec.dim())
        throw std::invalid_argument("ball center dimension mismatch");
    const double h = spec.spacing();
    double s = 0.0;
    for (int j = 0; j < spec.dim(); ++j) {
        const double t = h * n[j] - center[j];
        s += t * t;
    }
    return std::sqrt(s) < radius;
}

FieldData::FieldData(LatticeFunction potential, std::vector<LatticeFunction> magnetic)
    : V_(std::move(potential)), B_(std::move(magnetic))
{
    if (static_cast<int>(B_.size()) != V_.spec().dim())
        throw std::invalid_argument("magnetic field needs d components");
    for (const auto& b : B_) check_same(V_.spec(), b.spec());
    v_bound_ = V_.sup_norm();
    for (const auto& b : B_) b_bound_ = std::max(b_bound_, b.sup_norm());
}

FieldData FieldData::zero(const LatticeSpec& spec)
{
    return FieldData(LatticeFunction(spec), std::vector<LatticeFunction>(spec.dim(), LatticeFunction(spec)));
}

LatticeFunction diff(const LatticeFunction& f, int j, Difference mode)
{
    const LatticeSpec& s = f.spec();
    check_direction(s, j);
    LatticeFunction out(s);
    const auto st = s.stride(j);
    const int lo = s.lo()[j], hi = s.hi()[j];
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        const double up = n[j] < hi ? f[k + st] : 0.0;
        const double dn = n[j] > lo ? f[k - st] : 0.0;
        switch (mode) {
        case Difference::forward: out[k] = up - f[k]; break;
        case Difference::backward: out[k] = f[k] - dn; break;
        case Difference::symmetric: out[k] = 0.5 * (up - dn); break;
        }
    });
    return out;
}

LatticeFunction laplacian(const LatticeFunction& f)
{
    const LatticeSpec& s = f.spec();
    LatticeFunction out(s);
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        double acc = 0.0;
        for (int j = 0; j < s.dim(); ++j) {
            const auto st = s.stride(j);
            const double up = n[j] < s.hi()[j] ? f[k + st] : 0.0;
            const double dn = n[j] > s.lo()[j] ? f[k - st] : 0.0;
            acc += up + dn - 2.0 * f[k];
        }
        out[k] = acc;
    });
    return out;
}

LatticeFunction schrodinger_apply(const LatticeFunction& f, const FieldData& fields)
{
    const LatticeSpec& s = f.spec();
    if (!fields.spec().contains_box(s)) throw std::invalid_argument("field coverage");
    const double h = s.spacing();
    LatticeFunction out = laplacian(f);
    out *= 1.0 / (h * h);
    const bool same_box = fields.spec() == s;
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        const std::size_t kf = same_box ? k : fields.spec().flat(n);
        double acc = fields.potential()[kf] * f[k];
        for (int j = 0; j < s.dim(); ++j) {
            const double b = fields.magnetic(j)[kf];
            if (b == 0.0) continue;
            const double up = n[j] < s.hi()[j] ? f[k + s.stride(j)] : 0.0;
            acc += b * (up - f[k]) / h;
        }
        out[k] += acc;
    });
    return out;
}

double l2_norm(const LatticeFunction& f)
{
    const LatticeSpec& s = f.spec();
    double acc = 0.0;
    for (double x : f.values()) acc += x * x;
    return std::sqrt(std::pow(s.spacing(), s.dim()) * acc);
}

double l2_norm(const LatticeFunction& f, const BallRegion& region)
{
    const LatticeSpec& s = f.spec();
    double acc = 0.0;
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        if (region.contains(s, n)) acc += f[k] * f[k];
    });
    return std::sqrt(std::pow(s.spacing(), s.dim()) * acc);
}

double inner_product(const LatticeFunction& f, const LatticeFunction& g)
{
    const LatticeSpec& a = f.spec();
    const LatticeSpec& b = g.spec();
    if (!a.same_lattice(b)) throw std::invalid_argument("lattice spec mismatch");
    double acc = 0.0;
    if (a == b) {
        for (std::size_t k = 0; k < a.size(); ++k) acc += f[k] * g[k];
    } else {
        // Only the overlap contributes under zero extension.
        for_each_site(a, [&](std::size_t k, std::span<const int> n) {
            if (f[k] != 0.0) acc += f[k] * g.at(n);
        });
    }
    return std::pow(a.spacing(), a.dim()) * acc;
}

std::size_t count_sites(const LatticeSpec& spec, const BallRegion& region)
{
    std::size_t c = 0;
    for_each_site(spec, [&](std::size_t, std::span<const int> n) {
        if (region.contains(spec, n)) ++c;
    });
    return c;
}

LatticeFunction coarsen(const LatticeFunction& f, int m)
{
    if (m < 1) throw std::invalid_argument("coarsening factor must be >= 1");
    const LatticeSpec& s = f.spec();
    MultiIndex lo(s.dim()), hi(s.dim());
    for (int j = 0; j < s.dim(); ++j) {
        lo[j] = ceil_div(s.lo()[j], m);
        hi[j] = floor_div(s.hi()[j], m);
        if (hi[j] < lo[j]) throw std::invalid_argument("empty coarse lattice");
    }
    LatticeSpec cs(s.dim(), m * s.spacing(), lo, hi);
    LatticeFunction out(cs);
    MultiIndex fine(s.dim());
    for_each_site(cs, [&](std::size_t k, std::span<const int> n) {
        for (int j = 0; j < s.dim(); ++j) fine[j] = m * n[j];
        out[k] = f[s.flat(fine)];
    });
    return out;
}

ProductRuleTerms cutoff_product_terms(const LatticeFunction& u, const LatticeFunction& theta,
                                      const FieldData& fields)
{
    const LatticeSpec& s = u.spec();
    check_same(s, theta.spec());
    if (!fields.spec().contains_box(s)) throw std::invalid_argument("field coverage");
    const double h = s.spacing();
    ProductRuleTerms t{LatticeFunction(s), LatticeFunction(s), LatticeFunction(s)};
    MultiIndex m(s.dim());
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        const std::size_t kf = fields.spec().flat(n);
        double mag = 0.0, tr = 0.0, cu = 0.0;
        for (int j = 0; j < s.dim(); ++j) {
            const auto st = s.stride(j);
            const bool has_up = n[j] < s.hi()[j], has_dn = n[j] > s.lo()[j];
            const double u_up = has_up ? u[k + st] : 0.0, u_dn = has_dn ? u[k - st] : 0.0;
            const double th_up = has_up ? theta[k + st] : 0.0, th_dn = has_dn ? theta[k - st] : 0.0;
            mag += fields.magnetic(j)[kf] * (th_up - theta[k]) * u_up;
            tr += (th_up - theta[k]) * (u_up - u_dn);
            cu += (th_up + th_dn - 2.0 * theta[k]) * u_dn;
        }
        t.magnetic[k] = mag / h;
        t.transport[k] = tr / (h * h);
        t.curvature[k] = cu / (h * h);
    });
    return t;
}

} // namespace dsuc
