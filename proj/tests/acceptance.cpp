// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "dsuc/cli.hpp"
#include "dsuc/experiments.hpp"

#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <unistd.h>

using namespace dsuc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
    std::vector<std::string> info;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double rel(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

int jobs() { return static_cast<int>(std::max(1u, std::min(8u, std::thread::hardware_concurrency()))); }

// Failed checks of a report, joined.
std::string failures(const ExperimentReport& r)
{
    std::string s;
    for (const auto& c : r.checks)
        if (!c.passed) s += (s.empty() ? "" : "; ") + c.name + " (" + c.detail + ")";
    return s;
}

Outcome operator_identities()
{
    Outcome o;
    double worst[4] = {0, 0, 0, 0};
    const char* names[4] = {"split", "energy", "two_path", "pointwise"};
    for (int d : {1, 2})
        for (double h : {1.0 / 32, 1.0 / 64}) {
            CommutatorCheckConfig cfg;
            cfg.d = d;
            cfg.h = h;
            cfg.window.tau0 = 1.0;
            cfg.samples = 100;
            cfg.coefficient_sites = 0;
            const auto rep = commutator_check(cfg);
            for (const auto& c : rep.checks)
                for (int i = 0; i < 4; ++i)
                    if (c.name == names[i]) {
                        if (!c.passed) o.passed = false;
                        const auto* t = rep.find_table("identities");
                        for (const auto& row : t->rows) worst[i] = std::max(worst[i], std::get<double>(row[2 + i]));
                    }
        }
    o.detail = "400 samples, max rel split " + fmt(worst[0]) + ", energy " + fmt(worst[1]) + ", two-path " +
               fmt(worst[2]) + ", pointwise " + fmt(worst[3]) + " (tol 1e-11)";
    return o;
}

Outcome coefficient_forms()
{
    Outcome o;
    CommutatorCheckConfig cfg;
    cfg.d = 2;
    cfg.h = 1.0 / 64;
    cfg.window.tau0 = 1.0;
    cfg.samples = 0;
    cfg.coefficient_sites = 1000;
    const auto rep = commutator_check(cfg);
    o.passed = rep.checks_passed() && !rep.checks.empty();
    o.detail = "1000 sites: " + rep.checks.front().detail;

    // Linear weight with dyadic slopes: every difference is exact.
    const double h = 1.0 / 16;
    const auto s = LatticeSpec::cube(2, h, 20);
    const auto phi = LatticeFunction::sample(s.grown(2), [&](std::span<const double> x) {
        return 0.375 * x[0] / h - 0.125 * x[1] / h;
    });
    const auto ctx = ConjugationContext::from_table(s, 10.0, phi);
    std::size_t nonzero = 0;
    for_each_site(s, [&](std::size_t, std::span<const int> n) {
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                const auto c = commutator_coeffs(n, j, k, ctx);
                for (double v : {c.raw.a, c.raw.b, c.raw.c, c.raw.e, c.simplified.a, c.simplified.b, c.simplified.c,
                                 c.simplified.e})
                    nonzero += v != 0.0;
            }
    });
    o.passed = o.passed && nonzero == 0;
    o.detail += "; linear weight nonzero coefficients: " + std::to_string(nonzero);
    return o;
}

Outcome weight_checks()
{
    Outcome o;
    double worst = 0.0;
    for (double c : {0.001, 0.01, 0.1})
        for (double r = 0.3; r < 5.0; r += 0.0073)
            worst = std::max(worst, rel(pseudoconvexity_margin(r, c), pseudoconvexity_margin_closed(r, c)));
    double min_on_annulus = INFINITY;
    for (double r = 1.0; r <= 4.0; r += 1e-3) min_on_annulus = std::min(min_on_annulus, pseudoconvexity_margin(r, 0.01));
    const bool exact_at_one = pseudoconvexity_margin_closed(1.0, 0.01) == 0.01;
    bool zero_at_zero = true;
    for (double r = 0.3; r < 5.0; r += 0.01) zero_at_zero = zero_at_zero && pseudoconvexity_margin_closed(r, 0.0) == 0.0;
    o.passed = worst <= 1e-12 && min_on_annulus > 0.0 && exact_at_one && zero_at_zero;
    o.detail = "closed vs derivative form " + fmt(worst) + ", min on [1,4] " + fmt(min_on_annulus) +
               ", margin(1) == c_ps " + (exact_at_one ? "yes" : "no") + ", zero at c_ps=0 " +
               (zero_at_zero ? "yes" : "no");
    return o;
}

using cplx = std::complex<double>;

std::vector<cplx> dft(const LatticeFunction& f, int N)
{
    const int d = f.spec().dim();
    std::vector<cplx> in(f.spec().size()), out(in.size());
    for (std::size_t k = 0; k < in.size(); ++k) in[k] = f[k];
    std::vector<int> dims(d, N);
    fftw_plan p = fftw_plan_dft(d, dims.data(), reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
    return out;
}

double parseval_error(int d)
{
    const int N = 64;
    const double h = 1.0 / 128;
    const std::vector<double> xb = d == 1 ? std::vector<double>{1.3} : std::vector<double>{0.8, -0.7};
    const auto fp = FrozenPoint::from_weight(xb, WeightParams(20.0, kDefaultConvexification), h);
    const LatticeSpec s(d, h, MultiIndex(d, 0), MultiIndex(d, N - 1));
    std::mt19937_64 rng(11 + d);
    std::normal_distribution<double> nd;
    LatticeFunction f(s);
    for (auto& v : f.values()) v = nd(rng);
    const auto F = dft(f, N);
    std::vector<double> xi(d);
    double ss = 0.0, aa = 0.0, qq = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
        std::size_t flat = k;
        for (int j = d - 1; j >= 0; --j) {
            xi[j] = 2.0 * std::numbers::pi * static_cast<double>(flat % N) / (N * h);
            flat /= N;
        }
        const double w = std::norm(F[k]);
        ss += std::pow(symbol_pr(xi, fp), 2) * w;
        aa += std::pow(symbol_pi(xi, fp), 2) * w;
        qq += symbol_q(xi, fp) * w;
    }
    const double vol = std::pow(h, d) / std::pow(double(N), d);
    const double ns = l2_norm(frozen_sym_apply(f, fp, Boundary::periodic));
    const double na = l2_norm(frozen_antisym_apply(f, fp, Boundary::periodic));
    return std::max({rel(ns * ns, vol * ss), rel(na * na, vol * aa),
                     rel(frozen_commutator_form(f, fp, Boundary::periodic), vol * qq)});
}

Outcome symbols()
{
    Outcome o;
    const double e1 = parseval_error(1), e2 = parseval_error(2);
    SymbolScanConfig cfg;
    cfg.emit_grid = false;
    const auto rep = symbol_scan(cfg);
    const bool parseval = std::max(e1, e2) <= 1e-9;
    o.passed = parseval && rep.checks_passed();
    o.detail = "Parseval d=1 " + fmt(e1) + ", d=2 " + fmt(e2) + "; c0=0.05: min margin " +
               fmt(rep.find_constant("min_margin")->value) + (rep.checks_passed() ? "" : "; failed: " + failures(rep));
    for (double c0 : {0.005, 0.002}) {
        SymbolScanConfig small = cfg;
        small.c0 = c0;
        const auto r = symbol_scan(small);
        o.info.push_back("c0=" + fmt(c0) + ": min margin " + fmt(r.find_constant("min_margin")->value) +
                         (r.checks_passed() ? ", positive and refinement agrees" : ", " + failures(r)));
    }
    return o;
}

Outcome coarsening()
{
    Outcome o;
    std::vector<HarmonicInput> ins;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        ins.push_back(polynomial_input(1, h, HarmonicKind::linear));
        ins.push_back(solved_input(1, h, 3));
        for (auto k : {HarmonicKind::mixed, HarmonicKind::diff_squares, HarmonicKind::deg3})
            ins.push_back(polynomial_input(2, h, k));
        ins.push_back(solved_input(2, h, 3));
    }
    const std::vector<int> ms{2, 3, 4};
    const auto rep = coarsen_experiment(ins, ms);
    std::size_t failed = 0;
    double worst = 0.0;
    for (const auto& c : rep.checks) failed += !c.passed;
    const auto* t = rep.find_table("coarsening");
    for (const auto& row : t->rows) worst = std::max(worst, std::get<double>(row[6]));
    o.passed = failed == 0;
    o.detail = std::to_string(rep.checks.size() - failed) + "/" + std::to_string(rep.checks.size()) +
               " input/m pairs within 1e-12, worst relative residual " + fmt(worst);
    for (const auto& c : rep.checks)
        if (!c.passed) o.info.push_back("failed " + c.name + ": " + c.detail);
    return o;
}

Outcome caccioppoli()
{
    Outcome o;
    std::vector<HarmonicInput> ins;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128})
        for (auto k : {HarmonicKind::linear, HarmonicKind::mixed, HarmonicKind::diff_squares, HarmonicKind::deg3})
            ins.push_back(polynomial_input(2, h, k));
    CaccioppoliConfig cfg;
    cfg.enforce_gap = false;
    const auto rep = caccioppoli_experiment(ins, cfg);
    o.passed = rep.checks_passed() && !rep.checks.empty();
    o.detail = "C_emp " + fmt(rep.find_constant("C_emp")->value) + ", " + std::to_string(rep.checks.size()) +
               " growth checks" + (o.passed ? "" : "; failed: " + failures(rep));
    return o;
}

Outcome carleman()
{
    Outcome o;
    SweepConfig cfg;
    cfg.window.tau0 = 1.0;
    cfg.jobs = jobs();
    const auto rep = carleman_sweep(cfg);
    const auto* g = rep.find_table("growth");
    o.passed = rep.checks_passed() && g && g->rows.size() == 2;
    std::string growth;
    if (g)
        for (const auto& row : g->rows) growth += (growth.empty() ? "" : ", ") + fmt(std::get<double>(row[4]));
    o.detail = "max ratio growth per halving " + growth + " (cap 2), C_emp " +
               fmt(rep.find_constant("C_emp")->value);
    return o;
}

Outcome three_balls()
{
    Outcome o;
    std::vector<HarmonicInput> ins;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        for (auto k : {HarmonicKind::mixed, HarmonicKind::diff_squares, HarmonicKind::deg3})
            ins.push_back(polynomial_input(2, h, k));
        ins.push_back(solved_input(2, h, 3, 2.5));
    }
    const auto rep = three_balls_experiment(ins, ThreeBallsConfig{});
    o.passed = rep.checks_passed() && !rep.checks.empty();
    o.detail = "alpha " + fmt(rep.find_constant("alpha")->value) + ", max R " +
               fmt(rep.find_constant("R_max")->value) + " (C 10)" + (o.passed ? "" : "; failed: " + failures(rep));
    return o;
}

std::map<std::string, std::string> data_files(const fs::path& dir)
{
    std::map<std::string, std::string> m;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.ends_with(".meta.json")) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        m[name] = s.str();
    }
    return m;
}

Outcome determinism()
{
    Outcome o;
    const fs::path root = fs::temp_directory_path() / ("dsuc_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> manifests{
        {"carleman-sweep", "--h", "1/16,1/32", "--samples", "5", "--tau0", "1", "--jobs", std::to_string(jobs())},
        {"three-balls", "--h", "1/32", "--inputs", "mixed,solved:4"},
        {"commutator-check", "--d", "1", "--samples", "4", "--coefficient-sites", "100"},
        {"coarsen-check", "--h", "1/32", "--inputs", "deg3"},
        {"caccioppoli", "--h", "1/32", "--no-gap-check"},
        {"symbol-scan", "--c0", "0.002", "--resolution", "64"},
        {"localize", "--h", "1/32", "--tau", "3", "--samples", "2"},
        {"log-convexity", "--h", "1/64", "--inputs", "mixed"},
        {"singular-potential", "--h", "1/32", "--seeds", "1"},
    };
    std::size_t files = 0, differing = 0;
    for (std::size_t i = 0; i < manifests.size(); ++i) {
        std::map<std::string, std::string> seen[2];
        for (int pass = 0; pass < 2; ++pass) {
            auto args = manifests[i];
            const fs::path dir = root / (std::to_string(i) + "_" + std::to_string(pass));
            args.insert(args.end(), {"--out", dir.string()});
            std::ostringstream out, err;
            dsuc::cli::run(args, out, err);
            if (fs::exists(dir)) seen[pass] = data_files(dir);
        }
        if (seen[0].empty()) {
            o.passed = false;
            o.info.push_back(manifests[i][0] + " wrote no files");
        }
        files += seen[0].size();
        if (seen[0] != seen[1]) {
            ++differing;
            o.passed = false;
            o.info.push_back(manifests[i][0] + " output differs between runs");
        }
    }
    fs::remove_all(root);
    o.detail = std::to_string(manifests.size()) + " manifests, " + std::to_string(files) + " data files, " +
               std::to_string(differing) + " differing";
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"operator identities", operator_identities},
        {"coefficient simplification", coefficient_forms},
        {"weight pseudoconvexity", weight_checks},
        {"symbols", symbols},
        {"coarsening", coarsening},
        {"Caccioppoli stability", caccioppoli},
        {"Carleman stability", carleman},
        {"three-balls", three_balls},
        {"CLI determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.passed;
        std::printf("%s %zu %s: %s [%.1fs]\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        for (const auto& line : o.info) std::printf("     %s\n", line.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
