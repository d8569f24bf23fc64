#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsuc {

inline constexpr double kDefaultConvexification = 0.01;

struct WeightParams {
    double tau;
    double c_ps;

    // tau > 1, c_ps >= 0. c_ps = 0 is the limiting (non-admissible) weight.
    explicit WeightParams(double tau, double c_ps = kDefaultConvexification);
};

// Radial profile -log t + c (L atan L - log(1+L^2)/2), L = log t, and its
// first two derivatives. Throws std::domain_error for t <= 0.
double varphi(double t, double c_ps, int order = 0);

struct WeightEval {
    double value;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

// phi(x) = tau varphi(|x|). Throws std::domain_error at x = 0.
WeightEval phi_eval(std::span<const double> x, const WeightParams& params);

// (varphi')^2 (varphi'' + varphi'/r) at r = |x|.
double pseudoconvexity_margin(std::span<const double> x, double c_ps);
double pseudoconvexity_margin(double r, double c_ps);
// Same quantity in the simplified form c (c atan L - 1)^2 / (r^4 (1 + L^2)).
double pseudoconvexity_margin_closed(double r, double c_ps);

struct AdmissibilityReport {
    bool admissible = false;
    double min_margin = 0.0;
    double max_derivative = 0.0; // max varphi' on the interval, must stay negative
    std::vector<double> offending_radii;
};

class AdmissibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

AdmissibilityReport admissibility_check(const WeightParams& params, double r_in, double r_out,
                                        int samples = 4001);
void require_admissible(const WeightParams& params, double r_in = 0.5, double r_out = 2.0);

// c1 = |varphi(3/2) - varphi(1)|, c2 = varphi(1/4) - varphi(1), alpha = c2 / (c1 + c2).
struct ThreeBallConstants {
    double c1, c2, alpha;
};
ThreeBallConstants three_ball_constants(double c_ps);

} // namespace dsuc
