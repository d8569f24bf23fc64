#include "dsuc/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>
#include <random>

namespace dsuc {

DirichletProblem DirichletProblem::on_ball(LatticeFunction boundary, double radius, FieldData fields)
{
    const LatticeSpec spec = boundary.spec();
    const BallRegion ball = BallRegion::centered(spec.dim(), radius);
    std::vector<char> mask(spec.size(), 0);
    for_each_site(spec, [&](std::size_t k, std::span<const int> n) { mask[k] = ball.contains(spec, n) ? 1 : 0; });
    return DirichletProblem{spec, std::move(mask), std::move(boundary), std::move(fields)};
}

DirichletProblem DirichletProblem::on_ball(LatticeFunction boundary, double radius)
{
    FieldData z = FieldData::zero(boundary.spec());
    return on_ball(std::move(boundary), radius, std::move(z));
}

double interior_residual(const LatticeFunction& u, const FieldData& fields, const std::vector<char>& interior)
{
    const LatticeSpec& s = u.spec();
    if (interior.size() != s.size()) throw std::invalid_argument("interior mask size mismatch");
    const LatticeFunction r = schrodinger_apply(u, fields);
    double m = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (interior[k]) m = std::max(m, std::abs(r[k]));
    return m;
}

DirichletSolution dirichlet_solve(const DirichletProblem& p, double tol, int max_iter)
{
    const LatticeSpec& s = p.spec;
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (max_iter < 0) throw std::invalid_argument("max_iter must be >= 0");
    if (!(p.boundary.spec() == s)) throw std::invalid_argument("boundary data box differs from problem box");
    if (!p.fields.spec().contains_box(s)) throw std::invalid_argument("field coverage");
    if (p.interior.size() != s.size()) throw std::invalid_argument("interior mask size mismatch");

    const int d = s.dim();
    const double h = s.spacing();
    std::vector<long> id(s.size(), -1);
    long count = 0;
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        if (!p.interior[k]) return;
        for (int j = 0; j < d; ++j)
            if (n[j] == s.lo()[j] || n[j] == s.hi()[j])
                throw std::invalid_argument("interior mask touches the box edge");
        id[k] = count++;
    });

    LatticeFunction u = p.boundary;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (p.interior[k]) u[k] = 0.0;

    double scale = 0.0;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(count) * (2 * d + 1));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(count);
    // Rows are h^2 P_h, so entries stay O(1).
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        if (!p.interior[k]) return;
        const std::size_t kf = p.fields.spec().flat(n);
        const long row = id[k];
        double diag = h * h * p.fields.potential()[kf];
        for (int j = 0; j < d; ++j) {
            const double bj = p.fields.magnetic(j)[kf];
            diag += -2.0 - h * bj;
            const auto st = s.stride(j);
            const std::size_t nb[2] = {k + st, k - st};
            const double w[2] = {1.0 + h * bj, 1.0};
            for (int q = 0; q < 2; ++q) {
                if (id[nb[q]] >= 0) {
                    trip.emplace_back(row, id[nb[q]], w[q]);
                } else {
                    b[row] -= w[q] * p.boundary[nb[q]];
                    scale = std::max(scale, std::abs(p.boundary[nb[q]]));
                }
            }
        }
        trip.emplace_back(row, row, diag);
    });
    if (count == 0) return {u, 0.0, scale, 0};

    Eigen::SparseMatrix<double> A(count, count);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("singular system: " + lu.lastErrorMessage(), INFINITY);

    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw SolverError("sparse solve failed", INFINITY);
    const double ih2 = 1.0 / (h * h);
    double res = INFINITY;
    int it = 0;
    for (;; ++it) {
        const Eigen::VectorXd r = b - A * x;
        res = ih2 * r.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(res)) throw SolverError("singular system: non-finite solution", res);
        if (res <= tol * scale || it >= max_iter) break;
        x += lu.solve(r);
    }
    for (std::size_t k = 0; k < s.size(); ++k)
        if (id[k] >= 0) u[k] = x[id[k]];
    // Independent certificate on the assembled function.
    res = interior_residual(u, p.fields, p.interior);
    if (!(res <= tol * scale)) throw SolverError("residual certificate failed", res);
    return {std::move(u), res, scale, it};
}

double HarmonicPolynomial::operator()(std::span<const double> x) const
{
    switch (kind) {
    case HarmonicKind::constant: return 1.0;
    case HarmonicKind::linear: return x[j];
    case HarmonicKind::mixed: return x[j] * x[k];
    case HarmonicKind::diff_squares: return x[j] * x[j] - x[k] * x[k];
    case HarmonicKind::deg3: return x[j] * x[j] * x[j] - 3.0 * x[j] * x[k] * x[k];
    }
    return 0.0;
}

LatticeFunction HarmonicPolynomial::sample(const LatticeSpec& spec) const
{
    return LatticeFunction::sample(spec, *this);
}

HarmonicPolynomial harmonic_polynomial(int d, HarmonicKind kind, int j, int k)
{
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    const bool pair = kind == HarmonicKind::mixed || kind == HarmonicKind::diff_squares || kind == HarmonicKind::deg3;
    if (pair && d < 2) throw std::invalid_argument(harmonic_kind_name(kind) + " needs d >= 2");
    if (j < 0 || j >= d) throw std::out_of_range("direction out of range");
    if (pair && (k < 0 || k >= d || k == j)) throw std::out_of_range("direction out of range");
    return {kind, j, pair ? k : j};
}

HarmonicKind parse_harmonic_kind(const std::string& name)
{
    if (name == "const") return HarmonicKind::constant;
    if (name == "linear") return HarmonicKind::linear;
    if (name == "mixed") return HarmonicKind::mixed;
    if (name == "diff_squares") return HarmonicKind::diff_squares;
    if (name == "deg3") return HarmonicKind::deg3;
    throw std::invalid_argument("unknown harmonic polynomial kind: " + name);
}

std::string harmonic_kind_name(HarmonicKind kind)
{
    switch (kind) {
    case HarmonicKind::constant: return "const";
    case HarmonicKind::linear: return "linear";
    case HarmonicKind::mixed: return "mixed";
    case HarmonicKind::diff_squares: return "diff_squares";
    case HarmonicKind::deg3: return "deg3";
    }
    return "?";
}

LatticeFunction random_bump(const LatticeSpec& spec, double r_in, double r_out, std::uint64_t seed,
                            const BumpOptions& opts)
{
    const double h = spec.spacing();
    const int d = spec.dim();
    if (!(r_in >= 0.0) || !(r_out > r_in)) throw std::invalid_argument("need 0 <= r_in < r_out");
    if (r_out - r_in < 6.0 * h) throw std::invalid_argument("annulus too thin for the lattice spacing (< 6h)");
    if (opts.modes < 1) throw std::invalid_argument("bump needs at least one mode");
    const double gap = opts.gap < 0.0 ? 2.0 * h : opts.gap;
    const double a = r_in + gap, b = r_out - gap;
    if (!(b - a > 2.0 * h)) throw std::invalid_argument("annulus too thin after the support gap");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    struct Mode {
        std::vector<double> c;
        double inv2s2, amp;
    };
    std::vector<Mode> modes;
    for (int m = 0; m < opts.modes; ++m) {
        std::vector<double> dir(d);
        double nrm = 0.0;
        do {
            nrm = 0.0;
            for (auto& v : dir) {
                v = normal(rng);
                nrm += v * v;
            }
        } while (nrm == 0.0);
        const double rho = a + (b - a) * unit(rng);
        for (auto& v : dir) v *= rho / std::sqrt(nrm);
        const double sigma = 0.1 + 0.3 * unit(rng);
        modes.push_back({dir, 1.0 / (2.0 * sigma * sigma), normal(rng)});
    }
    return LatticeFunction::sample(spec, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        const double r = std::sqrt(r2);
        if (!(r > a && r < b)) return 0.0;
        const double t = 2.0 * (r - a) / (b - a) - 1.0;
        const double cut = std::exp(1.0 - 1.0 / (1.0 - t * t));
        double acc = 0.0;
        for (const auto& m : modes) {
            double q = 0.0;
            for (int j = 0; j < d; ++j) q += (x[j] - m.c[j]) * (x[j] - m.c[j]);
            acc += m.amp * std::exp(-q * m.inv2s2);
        }
        return cut * acc;
    });
}

LatticeFunction random_smooth_data(const LatticeSpec& spec, std::uint64_t seed, int modes)
{
    const int d = spec.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    struct Wave {
        std::vector<double> w;
        double phase, amp;
    };
    std::vector<Wave> waves;
    for (int m = 0; m < modes; ++m) {
        std::vector<double> w(d);
        for (auto& v : w) v = -2.0 + 4.0 * unit(rng);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        waves.push_back({w, phase, normal(rng)});
    }
    return LatticeFunction::sample(spec, [&](std::span<const double> x) {
        double acc = 0.0;
        for (const auto& wv : waves) {
            double arg = wv.phase;
            for (int j = 0; j < d; ++j) arg += wv.w[j] * x[j];
            acc += wv.amp * std::cos(arg);
        }
        return acc;
    });
}

} // namespace dsuc
