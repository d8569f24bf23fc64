#pragma once

#include "dsuc/lattice.hpp"
#include "dsuc/weight.hpp"

#include <Eigen/Dense>
#include "json.hpp"
#include <ostream>
#include <span>
#include <vector>

namespace dsuc {

// Weight derivatives frozen at a base point x_bar.
struct FrozenPoint {
    std::vector<double> x_bar;
    Eigen::VectorXd grad_phi;
    Eigen::MatrixXd hess_phi;
    double tau;
    double h;

    // Requires 1/2 < |x_bar| < 2.
    static FrozenPoint from_weight(std::vector<double> x_bar, const WeightParams& params, double h);
    int dim() const { return static_cast<int>(grad_phi.size()); }
};

// N samples per axis, xi_k = -pi/h + 2 pi (k+1) / (N h), covering (-pi/h, pi/h].
class SymbolGrid {
public:
    SymbolGrid(int d, int resolution, double h);
    int dim() const { return d_; }
    int resolution() const { return n_; }
    double spacing() const { return h_; }
    double axis(int k) const;
    std::size_t size() const;
    void point(std::size_t flat, std::span<double> xi) const;

private:
    int d_, n_;
    double h_;
};

double symbol_pr(std::span<const double> xi, const FrozenPoint& fp);
double symbol_pi(std::span<const double> xi, const FrozenPoint& fp);
// Exact trigonometric commutator symbol (without the c0 tau factor).
double symbol_q(std::span<const double> xi, const FrozenPoint& fp);
// Leading Taylor form 4 xi.H xi + 4 g.H g.
double symbol_q_taylor(std::span<const double> xi, const FrozenPoint& fp);
// [p_r^2 + p_i^2 + c0 tau q] / [tau^4 + tau^2 sum h^-2 sin^2 + sum h^-4 sin^4].
double symbol_margin(std::span<const double> xi, const FrozenPoint& fp, double c0);

// Distance to {|xi| = tau|grad varphi|} cap {grad phi . xi = 0}. Writing
// xi = a g/|g| + p with p orthogonal to g and R = |grad phi|, the distance is
// sqrt(a^2 + (|p| - R)^2); the set is empty for d = 1 (returns +inf).
double char_set_distance(std::span<const double> xi, const FrozenPoint& fp);

struct RegionMin {
    double min_margin;
    std::vector<double> argmin_xi;
    std::size_t samples = 0;
};

struct MarginReport {
    double min_margin;
    std::vector<double> argmin_xi;
    double grid_min_margin;   // uniform grid only
    RegionMin high, low, near; // |xi| >= C1 tau; rest; dist(xi, C_tau) <= gamma0 tau
    double c1_split;
    double gamma0;
    int resolution;
};

struct ScanOptions {
    double gamma0 = 0.1;
    int zoom_candidates = 8;
    int zoom_levels = 6;
    int zoom_points = 17;
    int min_resolution = 64;
};

MarginReport lower_bound_margin(const FrozenPoint& fp, double c0, const SymbolGrid& grid,
                                const ScanOptions& opts = {});

struct RefinementCheck {
    MarginReport coarse, fine;
    double relative_change;
    bool agrees;
};
// Scans at N and 2N and compares the minima.
RefinementCheck margin_refinement(const FrozenPoint& fp, double c0, int resolution, double tolerance = 0.05,
                                  const ScanOptions& opts = {});

nlohmann::json margin_report_json(const MarginReport& r);
// Columns xi_1..xi_d, p_r, p_i, q, margin.
void write_symbol_csv(std::ostream& os, const FrozenPoint& fp, double c0, const SymbolGrid& grid);

// Frozen-coefficient operators acting on lattice functions. With periodic
// boundary the box is treated as a torus (used for the Fourier cross-checks).
enum class Boundary { zero, periodic };
LatticeFunction frozen_sym_apply(const LatticeFunction& f, const FrozenPoint& fp, Boundary bc);
LatticeFunction frozen_antisym_apply(const LatticeFunction& f, const FrozenPoint& fp, Boundary bc);
double frozen_commutator_form(const LatticeFunction& f, const FrozenPoint& fp, Boundary bc);

} // namespace dsuc
