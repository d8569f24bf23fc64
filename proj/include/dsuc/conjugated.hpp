#pragma once

#include "dsuc/lattice.hpp"
#include "dsuc/weight.hpp"

#include <optional>
#include <span>
#include <vector>

namespace dsuc {

// Site values of phi and e^{+-phi} on the function box grown by two sites, so
// that every stencil used below (offsets up to e_j + e_k) reads a cached value.
class ConjugationContext {
public:
    ConjugationContext(LatticeSpec spec, WeightParams params);
    // Arbitrary weight table; `phi` must cover spec.grown(2).
    static ConjugationContext from_table(LatticeSpec spec, double tau, const LatticeFunction& phi);

    const LatticeSpec& spec() const { return spec_; }
    const LatticeSpec& extended() const { return ext_; }
    double tau() const { return tau_; }
    const std::optional<WeightParams>& params() const { return params_; }

    std::size_t ext_flat(std::span<const int> n) const { return ext_.flat(n); }
    double phi(std::size_t e) const { return phi_[e]; }
    double exp_plus(std::size_t e) const { return ep_[e]; }
    double exp_minus(std::size_t e) const { return em_[e]; }
    // phi at n + a e_j + b e_k; throws std::out_of_range outside the cached box.
    double phi_at(std::span<const int> n, int j, int a, int k, int b) const;

    // Throws "weight singularity" if f is nonzero within l1 distance 2 of a
    // site where the weight is undefined (the origin for the default weight).
    void check_support(const LatticeFunction& f) const;

private:
    ConjugationContext(LatticeSpec spec, double tau);
    void finish_tables();

    LatticeSpec spec_, ext_;
    double tau_;
    std::optional<WeightParams> params_;
    std::vector<double> phi_, ep_, em_;
    bool has_singular_site_ = false;
};

// h^-2 e^phi Lap(e^-phi f), evaluated literally.
LatticeFunction conjugate_apply(const LatticeFunction& f, const ConjugationContext& ctx);
LatticeFunction sym_apply(const LatticeFunction& f, const ConjugationContext& ctx);
LatticeFunction antisym_apply(const LatticeFunction& f, const ConjugationContext& ctx);

struct CommutatorCoeffs {
    double a, b, c, e; // multiply f(n+e_j+e_k), f(n-e_j-e_k), f(n+e_j-e_k), f(n-e_j+e_k)
};
struct CommutatorCoeffPair {
    CommutatorCoeffs raw;        // products of cosh/sinh of first differences
    CommutatorCoeffs simplified; // sinh(second difference) cosh(sum/difference)
};
// Coefficients of h^4 [S_j, A_k] at site n (directions 0-based).
CommutatorCoeffPair commutator_coeffs(std::span<const int> n, int j, int k, const ConjugationContext& ctx);

enum class CoeffForm { raw, simplified };
// [S, A] f assembled pointwise from the coefficients.
LatticeFunction commutator_apply(const LatticeFunction& f, const ConjugationContext& ctx,
                                 CoeffForm form = CoeffForm::simplified);
// <f, [S, A] f> from the spelled-out sinh/cosh expansion.
double commutator_form(const LatticeFunction& f, const ConjugationContext& ctx);

enum class DifferenceKind { symmetric, forward, backward };

struct CarlemanRecord {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};
// tau^3 |e^phi u|^2 + tau |e^phi h^-1 D u|^2 + tau^-1 |e^phi h^-2 D^2 u|^2 against
// |e^phi g|^2, g = h^-2 Lap u (or P_h u when fields are given). D is the scalar
// sum over directions of the chosen difference.
CarlemanRecord carleman_ratio(const LatticeFunction& u, const ConjugationContext& ctx,
                              const FieldData* fields = nullptr,
                              DifferenceKind kind = DifferenceKind::symmetric);

// Operators with the differences of phi replaced by derivatives at each site.
// Diagnostics only; need the analytic weight.
LatticeFunction expanded_sym_apply(const LatticeFunction& f, const ConjugationContext& ctx);
LatticeFunction expanded_antisym_apply(const LatticeFunction& f, const ConjugationContext& ctx);
double expanded_commutator_form(const LatticeFunction& f, const ConjugationContext& ctx);

} // namespace dsuc
