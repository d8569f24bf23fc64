#pragma once

#include "dsuc/conjugated.hpp"
#include "dsuc/lattice.hpp"
#include "dsuc/report.hpp"
#include "dsuc/solver.hpp"
#include "dsuc/symbol.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsuc {

// Admissible tau window tau0 < tau < delta0 / h.
struct Window {
    double delta0 = 0.1;
    double tau0 = 5.0;
    bool admits(double tau, double h) const { return tau > tau0 && tau < delta0 / h; }
};

// A function claimed to solve P_h u = 0 in B_radius(center).
struct HarmonicInput {
    std::string name;
    LatticeFunction u;
    std::optional<FieldData> fields;
    double radius = 4.0;
};

// max |h^2 P_h u| / max|u| over region sites whose stencil stays in the box.
double harmonic_defect(const LatticeFunction& u, const FieldData* fields, const BallRegion& region);
// Throws "uncertified input" if the defect exceeds tol or the box misses B_2(center).
void certify_harmonic(const HarmonicInput& in, const std::vector<double>& center, double tol);

// Harmonic polynomial on the cube covering B_radius(center) plus one site.
HarmonicInput polynomial_input(int d, double h, HarmonicKind kind, std::vector<double> center = {}, double radius = 4.0);
// Dirichlet solution on B_radius with seeded smooth boundary data.
HarmonicInput solved_input(int d, double h, std::uint64_t seed, double radius = 4.0, double tol = 1e-9);
// Same values, indices shifted by `shift`.
LatticeFunction translate(const LatticeFunction& u, const MultiIndex& shift);

struct LogConvexityConfig {
    double c_ps = kDefaultConvexification;
    Window window;
    std::vector<double> taus; // empty: tau_samples points inside the window
    int tau_samples = 16;
    double growth_cap = 2.0;
    double certify_tol = 1e-9;
};
ExperimentReport log_convexity_scan(std::span<const HarmonicInput> inputs, const LogConvexityConfig& cfg);
ExperimentReport log_convexity_scan(const LatticeFunction& u, const LogConvexityConfig& cfg);

struct ThreeBallsConfig {
    double c_ps = kDefaultConvexification;
    double C = 10.0;            // threshold for the correction branch
    std::vector<double> center; // empty: origin
    double floor = 1e-300;
    double min_r_squared = 0.9;
    double certify_tol = 1e-9;
};
ExperimentReport three_balls_experiment(std::span<const HarmonicInput> inputs, const ThreeBallsConfig& cfg);

enum class TauRule { fixed, fraction, grid };
enum class SweepInput { bump, spike };

struct SweepConfig {
    int d = 2;
    std::vector<double> h_grid{1.0 / 32, 1.0 / 64, 1.0 / 128};
    TauRule tau_rule = TauRule::fraction;
    std::vector<double> taus; // fixed: one value; grid: any number
    double delta = 0.5;       // fraction rule: tau = delta * delta0 / h
    double c_ps = kDefaultConvexification;
    Window window;
    std::uint64_t seed = 7;
    int samples = 50;
    double growth_cap = 2.0;
    SweepInput input = SweepInput::bump;
    DifferenceKind difference = DifferenceKind::symmetric;
    int jobs = 1;

    void validate() const;
};
ExperimentReport carleman_sweep(const SweepConfig& cfg);

struct CaccioppoliRecord {
    double lhs = 0.0, rhs = 0.0, ratio = 0.0;
    bool gap_condition_met = false;
};
// Throws "radii too close for h" unless 10h < r1 and r1 + 100h < r2, when enforced.
CaccioppoliRecord caccioppoli_ratio(const LatticeFunction& u, const FieldData* fields, double r1, double r2,
                                    bool enforce_gap = true);

struct CaccioppoliConfig {
    double r1 = 1.0, r2 = 2.0;
    bool enforce_gap = true;
    double growth_tol = 0.10;
    double certify_tol = 1e-9;
};
ExperimentReport caccioppoli_experiment(std::span<const HarmonicInput> inputs, const CaccioppoliConfig& cfg);

struct LocalizationRecord {
    double scale = 0.0;
    std::size_t pieces = 0;
    double norm_S = 0, sum_S = 0, rhs_S = 0;
    double norm_A = 0, sum_A = 0, rhs_A = 0;
    double norm_L = 0, sum_L = 0, rhs_L = 0;
};
// C-infinity partition of unity by cubes of side `scale`; 1-D factors
// psi_i(t) = S(t/scale - i + 1) - S(t/scale - i).
double smoothstep(double t);
double partition_factor(double t, double scale, int i);
// Sums over explicitly given cutoffs (must add up to one on supp f).
LocalizationRecord localization_sums(const LatticeFunction& f, const ConjugationContext& ctx, double eps0,
                                     std::span<const LatticeFunction> cutoffs);
ExperimentReport localization_diagnostic(const LatticeFunction& f, const ConjugationContext& ctx, double eps0);

struct LocalizationConfig {
    int d = 2;
    double h = 1.0 / 64;
    std::vector<double> taus{2.0, 3.0, 4.0, 5.0, 6.0};
    double eps0 = 0.5;
    double c_ps = kDefaultConvexification;
    std::uint64_t seed = 7;
    int samples = 3;
};
ExperimentReport localization_sweep(const LocalizationConfig& cfg);

struct SingularPotentialConfig {
    int d = 2;
    std::vector<double> h_grid{1.0 / 32, 1.0 / 64};
    int seeds = 3;
    std::uint64_t seed = 7;
    double c_ps = kDefaultConvexification;
    double delta0 = 0.1;
    int kappa_samples = 20;
    double C = 10.0;
    double radius = 4.0;
    double tol = 1e-9;
};
ExperimentReport singular_potential_experiment(double mu0, const SingularPotentialConfig& cfg);

struct CoarsenRecord {
    int m = 1;
    std::size_t coarse_sites = 0;
    double residual = 0.0; // max |unscaled coarse Laplacian|
    double scale = 0.0;    // max |u| on the region
    double relative = 0.0;
};
CoarsenRecord coarsen_check(const LatticeFunction& u, int m, const BallRegion& harmonic_region);
ExperimentReport coarsen_experiment(std::span<const HarmonicInput> inputs, std::span<const int> ms,
                                    double tol = 1e-12);

ExperimentReport rescaled_three_balls(std::span<const HarmonicInput> inputs, int m, const ThreeBallsConfig& cfg,
                                      double coarsen_tol = 1e-12);

struct CommutatorCheckConfig {
    int d = 2;
    double h = 1.0 / 32;
    double delta = 0.5;
    Window window;
    double c_ps = kDefaultConvexification;
    std::uint64_t seed = 7;
    int samples = 20;
    int coefficient_sites = 1000;
};
ExperimentReport commutator_check(const CommutatorCheckConfig& cfg);

struct SymbolScanConfig {
    int d = 2;
    std::vector<double> x_bar{1.0, 0.0};
    double tau = 20.0;
    double h = 1.0 / 128;
    double c0 = 0.05;
    double c_ps = kDefaultConvexification;
    int resolution = 128;
    double refinement_tol = 0.05;
    ScanOptions scan;
    bool emit_grid = true;
};
ExperimentReport symbol_scan(const SymbolScanConfig& cfg);

// i.i.d. normal values in r_in + 2h < |x| < r_out - 2h.
LatticeFunction random_field(const LatticeSpec& spec, double r_in, double r_out, std::uint64_t seed);

} // namespace dsuc
