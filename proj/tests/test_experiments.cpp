#include "doctest.h"

#include "dsuc/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace dsuc;
namespace fs = std::filesystem;

namespace {

double cell(const Table& t, std::size_t row, const std::string& col)
{
    const auto it = std::find(t.columns.begin(), t.columns.end(), col);
    REQUIRE(it != t.columns.end());
    return std::get<double>(t.rows.at(row).at(it - t.columns.begin()));
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// a^{n1} cos(t n2) with a + 1/a + 2 cos t = 4 is harmonic for the 5-point
// stencil at any spacing but not after restriction to every second site.
LatticeFunction exponential_cosine(double h, int w, double t)
{
    const double s = 4.0 - 2.0 * std::cos(t);
    const double a = 0.5 * (s + std::sqrt(s * s - 4.0));
    const auto spec = LatticeSpec::cube(2, h, w);
    LatticeFunction u(spec);
    for_each_site(spec, [&](std::size_t k, std::span<const int> n) { u[k] = std::pow(a, n[0]) * std::cos(t * n[1]); });
    return u;
}

} // namespace

TEST_CASE("input certification")
{
    auto in = polynomial_input(2, 1.0 / 32, HarmonicKind::deg3);
    CHECK(harmonic_defect(in.u, nullptr, BallRegion::centered(2, 4.0)) == 0.0);
    CHECK_NOTHROW(certify_harmonic(in, {0.0, 0.0}, 1e-12));
    in.u[in.u.spec().flat(MultiIndex{3, 5})] += 1e-3;
    CHECK_THROWS_WITH_AS(certify_harmonic(in, {0.0, 0.0}, 1e-9), doctest::Contains("uncertified"),
                         std::invalid_argument);

    const HarmonicInput small{"small", LatticeFunction(LatticeSpec::cube(2, 0.25, 4), 1.0), std::nullopt, 1.0};
    CHECK_THROWS_WITH_AS(certify_harmonic(small, {0.0, 0.0}, 1e-9), doctest::Contains("uncertified"),
                         std::invalid_argument);

    const auto solved = solved_input(2, 1.0 / 16, 5);
    CHECK_NOTHROW(certify_harmonic(solved, {0.0, 0.0}, 1e-9));
}

TEST_CASE("log-convexity constant matches its definition")
{
    const auto in = polynomial_input(2, 1.0 / 64, HarmonicKind::mixed);
    LogConvexityConfig cfg;
    cfg.taus = {5.5, 6.0};
    const auto rep = log_convexity_scan(std::span<const HarmonicInput>(&in, 1), cfg);
    const auto* t = rep.find_table("scan");
    REQUIRE(t);
    REQUIRE(t->rows.size() == 2);
    const auto k = three_ball_constants(0.01);
    const double n0 = l2_norm(in.u, BallRegion::centered(2, 0.5));
    const double n1 = l2_norm(in.u, BallRegion::centered(2, 1.0));
    const double n2 = l2_norm(in.u, BallRegion::centered(2, 2.0));
    const double expect = n1 / (std::exp(6.0 * k.c1) * n0 + std::exp(-6.0 * k.c2) * n2);
    CHECK(cell(*t, 1, "c_emp") == doctest::Approx(expect).epsilon(1e-14));
    REQUIRE(rep.find_constant("C_emp"));
    CHECK(rep.find_constant("C_emp")->value >= cell(*t, 1, "c_emp"));
}

TEST_CASE("log-convexity warns on an empty window and rejects vanishing input")
{
    const auto in = polynomial_input(2, 1.0 / 16, HarmonicKind::mixed);
    const auto rep = log_convexity_scan(std::span<const HarmonicInput>(&in, 1), LogConvexityConfig{});
    CHECK(rep.warnings.size() == 1);
    CHECK(rep.find_constant("C_emp") == nullptr);

    const HarmonicInput zero{"zero", LatticeFunction(LatticeSpec::covering_ball(2, 1.0 / 16, 4.0, 1)), std::nullopt,
                             4.0};
    CHECK_THROWS_WITH(log_convexity_scan(std::span<const HarmonicInput>(&zero, 1), LogConvexityConfig{}),
                      doctest::Contains("degenerate"));
}

TEST_CASE("three-balls ratios for harmonic polynomials stay below the threshold")
{
    std::vector<HarmonicInput> ins;
    for (double h : {1.0 / 32, 1.0 / 64})
        for (auto kind : {HarmonicKind::diff_squares, HarmonicKind::deg3}) ins.push_back(polynomial_input(2, h, kind));
    const auto rep = three_balls_experiment(ins, ThreeBallsConfig{});
    CHECK(rep.checks_passed());
    const auto* t = rep.find_table("ratios");
    REQUIRE(t);
    // Continuum values: (2^(1-alpha) ... ) give about 3.1 for degree two and 4.6 for degree three.
    CHECK(cell(*t, 1, "R") == doctest::Approx(3.14).epsilon(0.02));
    CHECK(cell(*t, 3, "R") == doctest::Approx(4.6).epsilon(0.02));
    CHECK(rep.find_constant("alpha")->value == doctest::Approx(0.7750253371607894).epsilon(1e-14));
}

TEST_CASE("three-balls is translation invariant")
{
    const auto base = polynomial_input(2, 1.0 / 32, HarmonicKind::deg3);
    const std::vector<double> c{0.25, -0.5}; // (8, -16) sites
    auto moved = base;
    moved.u = translate(base.u, {8, -16});
    ThreeBallsConfig shifted;
    shifted.center = c;
    const auto a = three_balls_experiment(std::span<const HarmonicInput>(&base, 1), ThreeBallsConfig{});
    const auto b = three_balls_experiment(std::span<const HarmonicInput>(&moved, 1), shifted);
    CHECK(cell(*a.find_table("ratios"), 0, "R") == cell(*b.find_table("ratios"), 0, "R"));
}

TEST_CASE("three-balls correction branch needs three spacings")
{
    std::vector<HarmonicInput> ins;
    for (double h : {1.0 / 16, 1.0 / 32}) ins.push_back(polynomial_input(2, h, HarmonicKind::deg3));
    ThreeBallsConfig cfg;
    cfg.C = 1.0;
    CHECK_THROWS_WITH(three_balls_experiment(ins, cfg), doctest::Contains("insufficient sweep"));
    ins.push_back(polynomial_input(2, 1.0 / 64, HarmonicKind::deg3));
    const auto rep = three_balls_experiment(ins, cfg);
    const auto* c0 = rep.find_constant("c0_emp[deg3]");
    REQUIRE(c0);
    CHECK(c0->r_squared.has_value());
    CHECK(c0->samples == 3);
}

TEST_CASE("rescaling by one changes nothing")
{
    std::vector<HarmonicInput> ins{polynomial_input(2, 1.0 / 32, HarmonicKind::mixed)};
    const auto a = three_balls_experiment(ins, ThreeBallsConfig{});
    const auto b = rescaled_three_balls(ins, 1, ThreeBallsConfig{});
    CHECK(a.find_table("ratios")->rows == b.find_table("ratios")->rows);
    CHECK(b.experiment == "rescaled-three-balls");
}

TEST_CASE("coarsening harmonic polynomials keeps them harmonic")
{
    std::vector<HarmonicInput> ins;
    for (auto kind : {HarmonicKind::constant, HarmonicKind::linear, HarmonicKind::mixed, HarmonicKind::diff_squares,
                      HarmonicKind::deg3})
        ins.push_back(polynomial_input(2, 1.0 / 32, kind));
    ins.push_back(polynomial_input(1, 1.0 / 32, HarmonicKind::linear));
    ins.push_back(solved_input(1, 1.0 / 32, 3));
    const std::vector<int> ms{2, 3, 4};
    const auto rep = coarsen_experiment(ins, ms);
    CHECK(rep.checks.size() == ins.size() * ms.size());
    CHECK(rep.checks_passed());
}

TEST_CASE("coarsening a generic 2-D discrete harmonic function leaves a residual")
{
    const auto u = exponential_cosine(1.0 / 8, 12, 0.3);
    CHECK(harmonic_defect(u, nullptr, BallRegion::centered(2, 1.4)) < 1e-14);
    const auto r = coarsen_check(u, 2, BallRegion::centered(2, 1.4));
    CHECK(r.coarse_sites > 0);
    CHECK(r.relative > 1e-4);

    // Away from the rough boundary layer of a solved input the residual behaves like h^4.
    const auto coarse = solved_input(2, 1.0 / 16, 3), fine = solved_input(2, 1.0 / 32, 3);
    const auto rc = coarsen_check(coarse.u, 2, BallRegion::centered(2, 2.0));
    const auto rf = coarsen_check(fine.u, 2, BallRegion::centered(2, 2.0));
    CHECK(rc.relative > 1e-12);
    CHECK(rc.relative / rf.relative == doctest::Approx(16.0).epsilon(0.15));

    std::vector<HarmonicInput> ins{coarse};
    CHECK_THROWS_WITH(rescaled_three_balls(ins, 2, ThreeBallsConfig{}), doctest::Contains("coarsening breaks"));
}

TEST_CASE("Caccioppoli ratio")
{
    const double h = 1.0 / 64;
    const auto lin = polynomial_input(2, h, HarmonicKind::linear);
    const auto r = caccioppoli_ratio(lin.u, nullptr, 1.0, 2.0, false);
    // |B_1| / int_{B_2} x^2 = pi / (4 pi).
    CHECK(r.ratio == doctest::Approx(0.25).epsilon(0.02));
    CHECK_FALSE(r.gap_condition_met);
    CHECK_THROWS_WITH(caccioppoli_ratio(lin.u, nullptr, 1.0, 2.0, true), doctest::Contains("radii too close"));
    const auto one = polynomial_input(2, h, HarmonicKind::constant);
    CHECK(caccioppoli_ratio(one.u, nullptr, 1.0, 2.0, false).ratio == 0.0);
    CHECK(caccioppoli_ratio(lin.u, nullptr, 0.5, 3.0, true).gap_condition_met);

    std::vector<HarmonicInput> ins;
    for (double hh : {1.0 / 32, 1.0 / 64}) ins.push_back(polynomial_input(2, hh, HarmonicKind::mixed));
    CaccioppoliConfig cfg;
    cfg.enforce_gap = false;
    const auto rep = caccioppoli_experiment(ins, cfg);
    CHECK(rep.checks_passed());
    CHECK(rep.warnings.size() == 2);
}

TEST_CASE("partition of unity")
{
    for (double scale : {0.3, 0.7}) {
        for (double t = -2.0; t <= 2.0; t += 0.0137) {
            double sum = 0.0;
            for (int i = -10; i <= 10; ++i) {
                const double p = partition_factor(t, scale, i);
                CHECK(p >= 0.0);
                if (t / scale <= i - 1 || t / scale >= i + 1) CHECK(p == 0.0);
                sum += p;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    CHECK(smoothstep(0.5) == doctest::Approx(0.5));
    CHECK(smoothstep(-1.0) == 0.0);
    CHECK(smoothstep(2.0) == 1.0);
}

TEST_CASE("localization sums")
{
    const double h = 1.0 / 32;
    const auto s = LatticeSpec::covering_ball(2, h, 2.0, 3);
    const ConjugationContext ctx(s, WeightParams(4.0, 0.01));
    const auto f = random_bump(s, 0.5, 2.0, 2);
    const LatticeFunction one(s, 1.0);
    const auto r = localization_sums(f, ctx, 0.5, std::span<const LatticeFunction>(&one, 1));
    CHECK(r.pieces == 1);
    CHECK(r.sum_S == doctest::Approx(r.norm_S).epsilon(1e-15));
    CHECK(r.sum_L == doctest::Approx(r.norm_L).epsilon(1e-15));

    const auto rep = localization_diagnostic(f, ctx, 0.5);
    CHECK(rep.checks_passed());
    CHECK(rep.find_constant("C_S")->value > 0.0);
    CHECK_THROWS_AS(localization_diagnostic(f, ctx, 1.5), std::invalid_argument);
    const ConjugationContext slow(s, WeightParams(1.2, 0.01));
    CHECK_THROWS_WITH(localization_diagnostic(f, slow, 0.5), doctest::Contains("partition scale"));
}

TEST_CASE("Carleman sweep is independent of the job count")
{
    SweepConfig cfg;
    cfg.h_grid = {1.0 / 32, 1.0 / 64};
    cfg.tau_rule = TauRule::grid;
    cfg.taus = {2.0, 4.0};
    cfg.window.tau0 = 1.0;
    cfg.samples = 4;
    const auto a = carleman_sweep(cfg);
    cfg.jobs = 4;
    const auto b = carleman_sweep(cfg);
    CHECK(a.warnings.size() == 1); // tau = 4 > 0.1 / (1/32)
    CHECK(std::get<std::string>(a.find_table("cells")->rows[1][2]) == "skipped");
    CHECK(cell(*a.find_table("cells"), 3, "max_ratio") == cell(*b.find_table("cells"), 3, "max_ratio"));
    CHECK(report_json(a).dump() == report_json(b).dump());

    cfg.samples = 0;
    const auto empty = carleman_sweep(cfg);
    CHECK(empty.tables.empty());
    CHECK(empty.checks.empty());

    cfg.h_grid = {1.0 / 64, 1.0 / 32};
    CHECK_THROWS_AS(carleman_sweep(cfg), std::invalid_argument);
}

TEST_CASE("Carleman sweep skips cells outside the window")
{
    SweepConfig cfg;
    cfg.h_grid = {0.5};
    cfg.tau_rule = TauRule::fixed;
    cfg.taus = {1000.0};
    cfg.samples = 2;
    const auto rep = carleman_sweep(cfg);
    CHECK(rep.warnings.size() == 1);
    const auto* t = rep.find_table("cells");
    REQUIRE(t);
    CHECK(std::get<std::string>(t->rows[0][2]) == "skipped");
}

TEST_CASE("singular potential with mu0 = 0 reduces to the log-convexity constant")
{
    SingularPotentialConfig cfg;
    cfg.h_grid = {1.0 / 32};
    cfg.seeds = 1;
    cfg.kappa_samples = 4;
    const auto rep = singular_potential_experiment(0.0, cfg);
    const auto in = solved_input(2, 1.0 / 32, cfg.seed);
    LogConvexityConfig lc;
    lc.taus = {0.1 / (1.0 / 32)};
    const auto ref = log_convexity_scan(std::span<const HarmonicInput>(&in, 1), lc);
    CHECK(cell(*rep.find_table("kappa_scan"), 3, "C") ==
          doctest::Approx(cell(*ref.find_table("scan"), 0, "c_emp")).epsilon(1e-12));
    CHECK_THROWS_AS(singular_potential_experiment(-1.0, cfg), std::invalid_argument);

    const auto strong = singular_potential_experiment(0.05, cfg);
    const auto* runs = strong.find_table("runs");
    REQUIRE(runs);
    CHECK(cell(*runs, 0, "v_bound") == doctest::Approx(0.05 * std::pow(32.0, 1.5)).epsilon(1e-14));
    CHECK(cell(*runs, 0, "b_bound") == doctest::Approx(0.05 * std::sqrt(32.0)).epsilon(1e-14));
}

TEST_CASE("commutator check and symbol scan reports")
{
    CommutatorCheckConfig cc;
    cc.samples = 4;
    cc.coefficient_sites = 200;
    const auto a = commutator_check(cc);
    CHECK(a.checks_passed());
    CHECK(a.checks.size() == 7);

    SymbolScanConfig sc;
    sc.c0 = 0.002;
    sc.resolution = 64;
    sc.emit_grid = true;
    const auto b = symbol_scan(sc);
    CHECK(b.checks_passed());
    CHECK(b.find_table("symbol_grid")->rows.size() == 64 * 64);
    CHECK(b.find_table("refinement")->rows.size() == 2);
}

TEST_CASE("report files are deterministic")
{
    ExperimentReport r;
    r.experiment = "demo";
    r.config = {{"b", 2}, {"a", 1.0 / 3}};
    auto& t = r.table("values", {"x", "y", "name"});
    t.add({0.1, std::int64_t(2), std::string("p")});
    t.add({std::nan(""), std::int64_t(-1), std::string("q")});
    r.constants.push_back({"k", 1.5, 0.99, 0.01, 3});
    const fs::path base = fs::temp_directory_path() / ("dsuc_report_" + std::to_string(::getpid()));
    const auto f1 = write_report(r, base / "one");
    const auto f2 = write_report(r, base / "two");
    CHECK(f1.json.filename() == f2.json.filename());
    CHECK(slurp(f1.json) == slurp(f2.json));
    REQUIRE(f1.csv.size() == 1);
    CHECK(slurp(f1.csv[0]) == slurp(f2.csv[0]));
    CHECK(slurp(f1.csv[0]) == "x,y,name\n0.10000000000000001,2,p\nnan,-1,q\n");
    CHECK(fs::exists(f1.meta));
    const auto j = nlohmann::json::parse(slurp(f1.json));
    CHECK(j["schema"] == kReportSchema);
    CHECK(config_hash(r.config) == config_hash(nlohmann::json::parse(r.config.dump())));
    fs::remove_all(base);
}

TEST_CASE("line fit and median")
{
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK_THROWS_AS(fit_line(std::vector<double>{1, 1}, std::vector<double>{1, 2}), std::invalid_argument);
}
