#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dsuc {

using MultiIndex = std::vector<int>;

// Finite box lo..hi (inclusive) of the lattice (hZ)^d. Storage is row-major,
// last index fastest.
class LatticeSpec {
public:
    LatticeSpec(int d, double h, MultiIndex lo, MultiIndex hi);

    // [-w, w]^d
    static LatticeSpec cube(int d, double h, int half_width);
    // Smallest cube containing the closed ball of the given radius, plus `halo` sites.
    static LatticeSpec covering_ball(int d, double h, double radius, int halo = 0);

    int dim() const { return d_; }
    double spacing() const { return h_; }
    const MultiIndex& lo() const { return lo_; }
    const MultiIndex& hi() const { return hi_; }
    int extent(int j) const { return hi_[j] - lo_[j] + 1; }
    std::size_t size() const { return size_; }
    std::ptrdiff_t stride(int j) const { return stride_[j]; }

    bool contains(std::span<const int> n) const;
    std::size_t flat(std::span<const int> n) const;
    MultiIndex index(std::size_t flat) const;
    double radius(std::span<const int> n) const;

    LatticeSpec grown(int halo) const;
    bool same_lattice(const LatticeSpec& other) const;
    bool contains_box(const LatticeSpec& other) const;

    bool operator==(const LatticeSpec& other) const;

private:
    int d_;
    double h_;
    MultiIndex lo_, hi_;
    std::vector<std::ptrdiff_t> stride_;
    std::size_t size_ = 0;
};

// Calls fn(flat, index) for every site in storage order.
template <class Fn>
void for_each_site(const LatticeSpec& spec, Fn&& fn)
{
    const int d = spec.dim();
    MultiIndex n = spec.lo();
    const std::size_t total = spec.size();
    for (std::size_t k = 0; k < total; ++k) {
        fn(k, std::span<const int>(n));
        for (int j = d - 1; j >= 0; --j) {
            if (n[j] < spec.hi()[j]) {
                ++n[j];
                break;
            }
            n[j] = spec.lo()[j];
        }
    }
}

class LatticeFunction {
public:
    explicit LatticeFunction(LatticeSpec spec, double fill = 0.0);
    // Throws std::invalid_argument on size mismatch or non-finite values.
    LatticeFunction(LatticeSpec spec, std::vector<double> values);

    // f(x) sampled at x = h n.
    template <class Fn>
    static LatticeFunction sample(const LatticeSpec& spec, Fn&& f)
    {
        LatticeFunction out(spec);
        std::vector<double> x(spec.dim());
        const double h = spec.spacing();
        for_each_site(spec, [&](std::size_t k, std::span<const int> n) {
            for (int j = 0; j < spec.dim(); ++j) x[j] = h * n[j];
            out.v_[k] = f(std::span<const double>(x));
        });
        out.require_finite();
        return out;
    }

    const LatticeSpec& spec() const { return spec_; }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }
    double operator[](std::size_t k) const { return v_[k]; }
    double& operator[](std::size_t k) { return v_[k]; }

    // Zero extension outside the box.
    double at(std::span<const int> n) const;

    double sup_norm() const;
    bool is_zero() const;
    void require_finite() const;

    // Copy onto another box of the same lattice, zero where the source is undefined.
    LatticeFunction restricted_to(const LatticeSpec& box) const;

    LatticeFunction& operator+=(const LatticeFunction& g);
    LatticeFunction& operator-=(const LatticeFunction& g);
    LatticeFunction& operator*=(double s);
    friend LatticeFunction operator+(LatticeFunction a, const LatticeFunction& b) { return a += b; }
    friend LatticeFunction operator-(LatticeFunction a, const LatticeFunction& b) { return a -= b; }
    friend LatticeFunction operator*(double s, LatticeFunction a) { return a *= s; }

private:
    LatticeSpec spec_;
    std::vector<double> v_;
};

// Open ball |x - center| < radius.
struct BallRegion {
    std::vector<double> center;
    double radius;

    BallRegion(std::vector<double> center, double radius);
    static BallRegion centered(int d, double radius);
    bool contains(const LatticeSpec& spec, std::span<const int> n) const;
};

// Potential V and magnetic components B_1..B_d sampled on a common box.
class FieldData {
public:
    FieldData(LatticeFunction potential, std::vector<LatticeFunction> magnetic);
    static FieldData zero(const LatticeSpec& spec);

    const LatticeFunction& potential() const { return V_; }
    const LatticeFunction& magnetic(int j) const { return B_[j]; }
    const LatticeSpec& spec() const { return V_.spec(); }
    double potential_bound() const { return v_bound_; }
    double magnetic_bound() const { return b_bound_; }
    bool is_zero() const { return v_bound_ == 0.0 && b_bound_ == 0.0; }

private:
    LatticeFunction V_;
    std::vector<LatticeFunction> B_;
    double v_bound_ = 0.0, b_bound_ = 0.0;
};

enum class Difference { forward, backward, symmetric };

// Unscaled differences; `direction` is 0-based.
LatticeFunction diff(const LatticeFunction& f, int direction, Difference mode);
// Sum over directions of f(n+e_j) + f(n-e_j) - 2 f(n), no h^-2.
LatticeFunction laplacian(const LatticeFunction& f);
// h^-2 Lap f + h^-1 sum_j B_j D+^j f + V f. Fields must cover f's box.
LatticeFunction schrodinger_apply(const LatticeFunction& f, const FieldData& fields);

double l2_norm(const LatticeFunction& f);
double l2_norm(const LatticeFunction& f, const BallRegion& region);
double inner_product(const LatticeFunction& f, const LatticeFunction& g);
std::size_t count_sites(const LatticeSpec& spec, const BallRegion& region);

// Restriction to (m h)Z^d: coarse box ceil(lo/m)..floor(hi/m).
LatticeFunction coarsen(const LatticeFunction& f, int m);

// P(theta u) - theta P u = magnetic + transport + curvature.
struct ProductRuleTerms {
    LatticeFunction magnetic;
    LatticeFunction transport;
    LatticeFunction curvature;
};
ProductRuleTerms cutoff_product_terms(const LatticeFunction& u, const LatticeFunction& theta,
                                      const FieldData& fields);

} // namespace dsuc
