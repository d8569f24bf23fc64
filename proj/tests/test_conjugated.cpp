#include "doctest.h"

#include "dsuc/conjugated.hpp"
#include "dsuc/experiments.hpp"
#include "dsuc/solver.hpp"

#include <cmath>
#include <random>

using namespace dsuc;

namespace {

double rel(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

double sup_rel(const LatticeFunction& a, const LatticeFunction& b)
{
    const double s = std::max(a.sup_norm(), b.sup_norm());
    return s > 0.0 ? (a - b).sup_norm() / s : 0.0;
}

LatticeFunction test_function(const LatticeSpec& s, std::uint64_t seed)
{
    return seed % 2 ? random_bump(s, 0.5, 2.0, seed) : random_field(s, 0.5, 2.0, seed);
}

} // namespace

TEST_CASE("conjugated operator against e^phi Lap e^-phi")
{
    const double h = 1.0 / 16;
    const auto s = LatticeSpec::covering_ball(2, h, 2.0, 3);
    const ConjugationContext ctx(s, WeightParams(1.6, 0.01));
    const auto f = test_function(s, 4);
    LatticeFunction g = f;
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        if (f[k] != 0.0) g[k] *= std::exp(-ctx.phi(ctx.ext_flat(n)));
    });
    LatticeFunction expect = laplacian(g);
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        expect[k] = expect[k] == 0.0 ? 0.0 : expect[k] * std::exp(ctx.phi(ctx.ext_flat(n))) / (h * h);
    });
    CHECK(sup_rel(conjugate_apply(f, ctx), expect) < 1e-12);
}

TEST_CASE("splitting and energy identities")
{
    for (int d : {1, 2, 3}) {
        const double h = d == 3 ? 1.0 / 8 : 1.0 / 32;
        const auto s = LatticeSpec::covering_ball(d, h, 2.0, 3);
        const ConjugationContext ctx(s, WeightParams(std::max(2.0, 0.05 / h), 0.01));
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const auto f = test_function(s, seed);
            const auto L = conjugate_apply(f, ctx), S = sym_apply(f, ctx), A = antisym_apply(f, ctx);
            CHECK(sup_rel(S + A, L) < 1e-12);
            const double form = commutator_form(f, ctx);
            const double nl = l2_norm(L), ns = l2_norm(S), na = l2_norm(A);
            CHECK(rel(nl * nl, ns * ns + na * na + form) < 1e-12);
            const auto SA = sym_apply(A, ctx), AS = antisym_apply(S, ctx);
            CHECK(rel(form, inner_product(f, SA) - inner_product(f, AS)) < 1e-11);
            CHECK((commutator_apply(f, ctx) - (SA - AS)).sup_norm() < 1e-11 * std::max(SA.sup_norm(), AS.sup_norm()));
            CHECK(sup_rel(commutator_apply(f, ctx, CoeffForm::raw), commutator_apply(f, ctx)) < 1e-12);
        }
    }
}

TEST_CASE("S is symmetric and A antisymmetric")
{
    const double h = 1.0 / 32;
    const auto s = LatticeSpec::covering_ball(2, h, 2.0, 3);
    const ConjugationContext ctx(s, WeightParams(3.0, 0.01));
    const auto f = random_field(s, 0.5, 2.0, 1), g = random_field(s, 0.5, 2.0, 2);
    const double sfg = inner_product(sym_apply(f, ctx), g), fsg = inner_product(f, sym_apply(g, ctx));
    CHECK(rel(sfg, fsg) < 1e-13);
    const double afg = inner_product(antisym_apply(f, ctx), g), fag = inner_product(f, antisym_apply(g, ctx));
    CHECK(rel(afg, -fag) < 1e-13);
    CHECK(std::abs(inner_product(antisym_apply(f, ctx), f)) < 1e-12 * l2_norm(antisym_apply(f, ctx)) * l2_norm(f));
}

TEST_CASE("raw and simplified coefficients agree at random sites")
{
    for (int d : {1, 2, 3}) {
        const double h = d == 3 ? 1.0 / 16 : 1.0 / 64;
        const auto s = LatticeSpec::covering_ball(d, h, 2.0, 3);
        const ConjugationContext ctx(s, WeightParams(std::max(2.0, 0.05 / h), 0.01));
        std::mt19937_64 rng(d);
        std::uniform_int_distribution<int> dir(0, d - 1);
        int checked = 0;
        while (checked < 300) {
            MultiIndex n(d);
            int l1 = 0;
            for (int j = 0; j < d; ++j) {
                n[j] = std::uniform_int_distribution<int>(s.lo()[j], s.hi()[j])(rng);
                l1 += std::abs(n[j]);
            }
            if (l1 <= 2) continue;
            const auto c = commutator_coeffs(n, dir(rng), dir(rng), ctx);
            CHECK(rel(c.raw.a, c.simplified.a) < 1e-12);
            CHECK(rel(c.raw.b, c.simplified.b) < 1e-12);
            CHECK(rel(c.raw.c, c.simplified.c) < 1e-12);
            CHECK(rel(c.raw.e, c.simplified.e) < 1e-12);
            ++checked;
        }
    }
}

TEST_CASE("linear weight has vanishing commutator")
{
    const double h = 1.0 / 16;
    const auto s = LatticeSpec::cube(2, h, 20);
    // Dyadic slopes keep every difference exact.
    const auto phi = LatticeFunction::sample(s.grown(2), [&](std::span<const double> x) {
        return 0.375 * x[0] / h - 0.125 * x[1] / h;
    });
    const auto ctx = ConjugationContext::from_table(s, 10.0, phi);
    for_each_site(s, [&](std::size_t, std::span<const int> n) {
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                const auto c = commutator_coeffs(n, j, k, ctx);
                CHECK(c.raw.a == 0.0);
                CHECK(c.raw.b == 0.0);
                CHECK(c.raw.c == 0.0);
                CHECK(c.raw.e == 0.0);
                CHECK(c.simplified.a == 0.0);
                CHECK(c.simplified.b == 0.0);
                CHECK(c.simplified.c == 0.0);
                CHECK(c.simplified.e == 0.0);
            }
    });
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    LatticeFunction f(s);
    for (auto& v : f.values()) v = nd(rng);
    CHECK(commutator_form(f, ctx) == 0.0);
    CHECK(commutator_apply(f, ctx).is_zero());
}

TEST_CASE("constant weight reduces to the scaled Laplacian")
{
    const double h = 0.125;
    const auto s = LatticeSpec::cube(2, h, 6);
    const auto ctx = ConjugationContext::from_table(s, 2.0, LatticeFunction(s.grown(2), 0.0));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    LatticeFunction f(s);
    for (auto& v : f.values()) v = nd(rng);
    CHECK(sup_rel(sym_apply(f, ctx), (1.0 / (h * h)) * laplacian(f)) < 1e-15);
    CHECK(antisym_apply(f, ctx).is_zero());
    CHECK(commutator_form(f, ctx) == 0.0);
}

TEST_CASE("support and table validation")
{
    const double h = 1.0 / 8;
    const auto s = LatticeSpec::covering_ball(2, h, 2.0, 3);
    const ConjugationContext ctx(s, WeightParams(2.0, 0.01));
    LatticeFunction f(s);
    f[s.flat(MultiIndex{1, 1})] = 1.0;
    CHECK_THROWS_AS(sym_apply(f, ctx), std::domain_error);
    f[s.flat(MultiIndex{1, 1})] = 0.0;
    f[s.flat(MultiIndex{2, 1})] = 1.0;
    CHECK_NOTHROW(sym_apply(f, ctx));
    CHECK_THROWS_AS(sym_apply(LatticeFunction(LatticeSpec::cube(2, h, 3)), ctx), std::invalid_argument);
    CHECK_THROWS_AS(ConjugationContext(s, WeightParams(1e4, 0.01)), std::overflow_error);
    CHECK_THROWS_AS(ConjugationContext::from_table(s, 2.0, LatticeFunction(s, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(commutator_coeffs(MultiIndex{5, 5}, 0, 2, ctx), std::out_of_range);
    CHECK(std::isnan(ctx.phi(ctx.ext_flat(MultiIndex{0, 0}))));
}

TEST_CASE("Carleman ratio")
{
    const double h = 1.0 / 32;
    const auto s = LatticeSpec::covering_ball(2, h, 2.0, 3);
    const ConjugationContext ctx(s, WeightParams(1.6, 0.01));

    const auto zero = carleman_ratio(LatticeFunction(s), ctx);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    CHECK(zero.ratio == 0.0);

    const auto u = random_bump(s, 0.5, 2.0, 9);
    const auto r = carleman_ratio(u, ctx);
    CHECK(r.lhs > 0.0);
    CHECK(r.rhs > 0.0);
    CHECK(r.ratio == doctest::Approx(r.lhs / r.rhs).epsilon(1e-15));
    // Scaling u scales both sides quadratically.
    CHECK(carleman_ratio(3.0 * u, ctx).ratio == doctest::Approx(r.ratio).epsilon(1e-13));

    const auto fwd = carleman_ratio(u, ctx, nullptr, DifferenceKind::forward);
    CHECK(fwd.rhs == doctest::Approx(r.rhs).epsilon(1e-15));
    CHECK(fwd.lhs != r.lhs);

    // Fields change only the right-hand side.
    const FieldData fields(LatticeFunction(s, 1.0), {LatticeFunction(s), LatticeFunction(s)});
    const auto rf = carleman_ratio(u, ctx, &fields);
    CHECK(rf.lhs == doctest::Approx(r.lhs).epsilon(1e-15));
    CHECK(rf.rhs != r.rhs);

    LatticeFunction inner(s);
    inner[s.flat(MultiIndex{4, 0})] = 1.0; // |x| = 1/8
    CHECK_THROWS_AS(carleman_ratio(inner, ctx), std::invalid_argument);
    LatticeFunction outer(s);
    outer[s.flat(MultiIndex{64, 0})] = 1.0; // |x| = 2
    CHECK_THROWS_AS(carleman_ratio(outer, ctx), std::invalid_argument);
}

TEST_CASE("expanded operators approach the discrete ones as h shrinks")
{
    double prev = 1.0;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const auto s = LatticeSpec::covering_ball(2, h, 2.0, 3);
        const ConjugationContext ctx(s, WeightParams(3.0, 0.01));
        const auto f = random_bump(s, 0.5, 2.0, 5);
        const double err = l2_norm(expanded_sym_apply(f, ctx) - sym_apply(f, ctx)) / l2_norm(sym_apply(f, ctx));
        CHECK(err < prev);
        prev = err;
    }
}
