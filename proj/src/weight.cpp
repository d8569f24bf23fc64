#include "dsuc/weight.hpp"

#include <algorithm>
#include <cmath>

namespace dsuc {

WeightParams::WeightParams(double t, double c) : tau(t), c_ps(c)
{
    if (!(t > 1.0) || !std::isfinite(t)) throw std::invalid_argument("tau must be > 1");
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("c_ps must be >= 0");
}

double varphi(double t, double c, int order)
{
    if (!(t > 0.0)) throw std::domain_error("weight singularity: varphi needs t > 0");
    const double L = std::log(t);
    const double at = std::atan(L);
    switch (order) {
    case 0: return -L + c * (L * at - 0.5 * std::log1p(L * L));
    case 1: return (-1.0 + c * at) / t;
    case 2: return (c / (1.0 + L * L) + 1.0 - c * at) / (t * t);
    default: throw std::invalid_argument("varphi order must be 0, 1 or 2");
    }
}

WeightEval phi_eval(std::span<const double> x, const WeightParams& p)
{
    const int d = static_cast<int>(x.size());
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
    const double r = xv.norm();
    if (!(r > 0.0)) throw std::domain_error("weight singularity at the origin");
    const double d1 = varphi(r, p.c_ps, 1), d2 = varphi(r, p.c_ps, 2);
    const Eigen::VectorXd u = xv / r;
    WeightEval e;
    e.value = p.tau * varphi(r, p.c_ps, 0);
    e.gradient = p.tau * d1 * u;
    e.hessian = p.tau * ((d1 / r) * Eigen::MatrixXd::Identity(d, d) + (d2 - d1 / r) * u * u.transpose());
    return e;
}

double pseudoconvexity_margin(double r, double c)
{
    const double d1 = varphi(r, c, 1), d2 = varphi(r, c, 2);
    return d1 * d1 * (d2 + d1 / r);
}

double pseudoconvexity_margin(std::span<const double> x, double c)
{
    double s = 0.0;
    for (double v : x) s += v * v;
    return pseudoconvexity_margin(std::sqrt(s), c);
}

double pseudoconvexity_margin_closed(double r, double c)
{
    if (!(r > 0.0)) throw std::domain_error("weight singularity: varphi needs t > 0");
    const double L = std::log(r);
    const double a = c * std::atan(L) - 1.0;
    return c * a * a / (std::pow(r, 4) * (1.0 + L * L));
}

AdmissibilityReport admissibility_check(const WeightParams& p, double r_in, double r_out, int samples)
{
    if (!(r_in > 0.0) || !(r_out > r_in)) throw std::invalid_argument("need 0 < r_in < r_out");
    if (samples < 2) throw std::invalid_argument("need at least two samples");
    AdmissibilityReport rep;
    rep.min_margin = INFINITY;
    rep.max_derivative = -INFINITY;
    for (int i = 0; i < samples; ++i) {
        const double r = r_in + (r_out - r_in) * i / (samples - 1);
        const double m = pseudoconvexity_margin(r, p.c_ps);
        const double d1 = varphi(r, p.c_ps, 1);
        rep.min_margin = std::min(rep.min_margin, m);
        rep.max_derivative = std::max(rep.max_derivative, d1);
        if (!(m > 0.0) || !(d1 < 0.0)) rep.offending_radii.push_back(r);
    }
    rep.admissible = rep.offending_radii.empty();
    return rep;
}

void require_admissible(const WeightParams& p, double r_in, double r_out)
{
    const auto rep = admissibility_check(p, r_in, r_out);
    if (!rep.admissible)
        throw AdmissibilityError("weight not admissible: pseudoconvexity fails at r = " +
                                 std::to_string(rep.offending_radii.front()));
}

ThreeBallConstants three_ball_constants(double c)
{
    const double c1 = std::abs(varphi(1.5, c) - varphi(1.0, c));
    const double c2 = varphi(0.25, c) - varphi(1.0, c);
    return {c1, c2, c2 / (c1 + c2)};
}

} // namespace dsuc
