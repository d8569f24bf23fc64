#pragma once

#include "dsuc/lattice.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dsuc {

// Interior sites are unknowns; every other site of the box carries boundary data.
struct DirichletProblem {
    LatticeSpec spec;
    std::vector<char> interior; // one flag per site, storage order
    LatticeFunction boundary;   // values at interior sites are ignored
    FieldData fields;

    // Interior = open ball of the given radius; the box must leave one site around it.
    static DirichletProblem on_ball(LatticeFunction boundary, double radius, FieldData fields);
    static DirichletProblem on_ball(LatticeFunction boundary, double radius);
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct DirichletSolution {
    LatticeFunction u;
    double residual;    // max over interior of |P_h u|
    double data_scale;  // max |boundary data| over boundary sites adjacent to the interior
    int refinements;
};

// Sparse LU (COLAMD ordering) plus iterative refinement. Certificate:
// residual <= tol * data_scale, else SolverError after max_iter refinements.
DirichletSolution dirichlet_solve(const DirichletProblem& p, double tol = 1e-9, int max_iter = 5);

// Max over interior sites of |P_h u| (sites whose stencil stays in the box).
double interior_residual(const LatticeFunction& u, const FieldData& fields, const std::vector<char>& interior);

enum class HarmonicKind { constant, linear, mixed, diff_squares, deg3 };

// 1; x_j; x_j x_k (j != k); x_j^2 - x_k^2; x_j^3 - 3 x_j x_k^2, sampled at x = h n.
struct HarmonicPolynomial {
    HarmonicKind kind;
    int j = 0, k = 1;

    double operator()(std::span<const double> x) const;
    LatticeFunction sample(const LatticeSpec& spec) const;
};
HarmonicPolynomial harmonic_polynomial(int d, HarmonicKind kind, int j = 0, int k = 1);
HarmonicKind parse_harmonic_kind(const std::string& name);
std::string harmonic_kind_name(HarmonicKind kind);

struct BumpOptions {
    int modes = 4;
    double gap = -1.0; // zero margin to the annulus boundary; negative means 2h
};

// Sum of seeded Gaussian blobs times a smooth radial cutoff, supported in
// r_in + gap < |x| < r_out - gap. Throws if r_out - r_in < 6h.
LatticeFunction random_bump(const LatticeSpec& spec, double r_in, double r_out, std::uint64_t seed,
                            const BumpOptions& opts = {});

// Smooth seeded boundary data: a few low-frequency cosines.
LatticeFunction random_smooth_data(const LatticeSpec& spec, std::uint64_t seed, int modes = 4);

} // namespace dsuc
