#include "doctest.h"

#include "dsuc/weight.hpp"

#include <cmath>
#include <vector>

using namespace dsuc;

namespace {

// Values below were computed with 40-digit arithmetic, c_ps = 0.01.
constexpr double kC2 = 1.39404611071396754790867267041628931725;
constexpr double kC1 = 0.404664258963603378572171151017977183324;
constexpr double kAlpha = 0.7750253371607893989754991186314232678569;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

} // namespace

TEST_CASE("radial profile derivatives against high precision values")
{
    struct Row {
        double t, d1, d2;
    };
    const Row rows[] = {
        {0.3, -3.362589435754304261625027046060188875298, 11.25399124832022821729414461584711828787},
        {1.7, -0.585365594539560491490974350847162619832, 0.3470326858879198705455843420216982398356},
        {3.1, -0.3198484813430557794880062834882456885155, 0.1036333112386793476011200510929041802425},
    };
    for (const auto& r : rows) {
        CHECK(rel(varphi(r.t, 0.01, 1), r.d1) < 1e-14);
        CHECK(rel(varphi(r.t, 0.01, 2), r.d2) < 1e-14);
    }
    CHECK(varphi(1.0, 0.01) == 0.0);
    CHECK(varphi(1.0, 0.01, 1) == -1.0);
}

TEST_CASE("radial profile derivatives match central differences")
{
    for (double c : {0.0, 0.01, 0.3}) {
        for (double t : {0.4, 0.9, 1.3, 2.5}) {
            const double e = 1e-5;
            const double fd1 = (varphi(t + e, c) - varphi(t - e, c)) / (2 * e);
            const double fd2 = (varphi(t + e, c, 1) - varphi(t - e, c, 1)) / (2 * e);
            CHECK(rel(fd1, varphi(t, c, 1)) < 1e-8);
            CHECK(rel(fd2, varphi(t, c, 2)) < 1e-8);
        }
    }
}

TEST_CASE("profile domain and order validation")
{
    CHECK_THROWS_AS(varphi(0.0, 0.01), std::domain_error);
    CHECK_THROWS_AS(varphi(-1.0, 0.01), std::domain_error);
    CHECK_THROWS_AS(varphi(1.0, 0.01, 3), std::invalid_argument);
    CHECK_THROWS_AS(WeightParams(1.0), std::invalid_argument);
    CHECK_THROWS_AS(WeightParams(5.0, -0.1), std::invalid_argument);
    CHECK_NOTHROW(WeightParams(5.0, 0.0));
}

TEST_CASE("phi gradient and hessian")
{
    const WeightParams p(7.0, 0.01);
    const std::vector<double> x{0.6, -0.9, 0.4};
    const auto e = phi_eval(x, p);
    const double eps = 1e-5;
    for (int j = 0; j < 3; ++j) {
        auto xp = x, xm = x;
        xp[j] += eps;
        xm[j] -= eps;
        const auto ep = phi_eval(xp, p), em = phi_eval(xm, p);
        CHECK(rel((ep.value - em.value) / (2 * eps), e.gradient[j]) < 1e-8);
        for (int k = 0; k < 3; ++k) {
            const double fd = (ep.gradient[k] - em.gradient[k]) / (2 * eps);
            CHECK(std::abs(fd - e.hessian(j, k)) < 1e-7 * (1 + std::abs(e.hessian(j, k))));
        }
    }
    CHECK((e.hessian - e.hessian.transpose()).norm() < 1e-14 * e.hessian.norm());
    CHECK_THROWS_AS(phi_eval(std::vector<double>{0.0, 0.0}, p), std::domain_error);
}

TEST_CASE("pseudoconvexity margin closed form")
{
    for (double c : {0.001, 0.01, 0.1})
        for (double r = 0.3; r < 5.0; r += 0.0173) CHECK(rel(pseudoconvexity_margin(r, c), pseudoconvexity_margin_closed(r, c)) < 1e-12);
    CHECK(pseudoconvexity_margin_closed(1.0, 0.01) == 0.01);
    CHECK(pseudoconvexity_margin_closed(1.0, 0.37) == 0.37);
    for (double r = 0.3; r < 5.0; r += 0.1) {
        CHECK(pseudoconvexity_margin_closed(r, 0.0) == 0.0);
        CHECK(std::abs(pseudoconvexity_margin(r, 0.0)) < 1e-14 * std::pow(r, -4));
    }
    for (double r = 1.0; r <= 4.0; r += 0.001) CHECK(pseudoconvexity_margin(r, 0.01) > 0.0);
    const std::vector<double> x{0.6, 0.8};
    CHECK(pseudoconvexity_margin(x, 0.01) == doctest::Approx(pseudoconvexity_margin(1.0, 0.01)).epsilon(1e-14));
}

TEST_CASE("admissibility")
{
    const auto ok = admissibility_check(WeightParams(10.0, 0.01), 0.5, 2.0);
    CHECK(ok.admissible);
    CHECK(ok.min_margin > 0.0);
    CHECK(ok.max_derivative < 0.0);
    const auto flat = admissibility_check(WeightParams(10.0, 0.0), 0.5, 2.0);
    CHECK_FALSE(flat.admissible);
    CHECK(flat.offending_radii.size() > 0);
    CHECK_THROWS_AS(require_admissible(WeightParams(10.0, 0.0)), AdmissibilityError);
    CHECK_NOTHROW(require_admissible(WeightParams(10.0, 0.01)));
    // Large c_ps turns varphi' positive once c atan(log r) > 1.
    CHECK_FALSE(admissibility_check(WeightParams(10.0, 2.0), 0.5, 40.0).admissible);
}

TEST_CASE("three-balls exponents")
{
    const auto k = three_ball_constants(0.01);
    CHECK(rel(k.c1, kC1) < 1e-14);
    CHECK(rel(k.c2, kC2) < 1e-14);
    CHECK(rel(k.alpha, kAlpha) < 1e-14);
    const auto k0 = three_ball_constants(0.0);
    CHECK(rel(k0.c1, std::log(1.5)) < 1e-15);
    CHECK(rel(k0.c2, std::log(4.0)) < 1e-15);
}
