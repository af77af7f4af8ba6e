#ifndef WEYLWALK_OPERATORS_HPP
#define WEYLWALK_OPERATORS_HPP

#include <string>
#include <vector>

#include "weylwalk/blocks.hpp"

namespace weylwalk::operators {

using blocks::Block;
using blocks::ModulatedBlock;
using blocks::SimpleFn;

/// Nonnegative diagonal operator given by its eigenvalue sequence in the
/// fixed basis. Nuclearity flags are derived at construction.
struct DiagOp {
    seq::ParamSeq eigs;
    std::string label;
    bool nuclear = false;
    bool sqrt_nuclear = false;

    explicit DiagOp(seq::ParamSeq e, std::string lbl = "D");
    double eig(int k) const { return eigs.term(k); }
};

/// Finite-support real vector; entry i is the coordinate i+1 component.
using FiniteVec = std::vector<double>;

double dot(const FiniteVec& a, const FiniteVec& b);

/// S_{th}: argument shift, exact on simple functions. Modulated terms pick
/// up the phase exp(-i t (theta, h)).
SimpleFn apply_shift(const SimpleFn& f, double t, const seq::ParamSeq& h);

/// Momentum shift: multiplies by exp(i t (a, x)), i.e. adds t*a to every
/// term's frequency.
SimpleFn apply_mom_shift(const SimpleFn& f, double t, const FiniteVec& a);

/// Weyl operator W_{h,a} = exp(i/2 (h,a)) S_h V_a applied exactly.
SimpleFn apply_weyl(const SimpleFn& f, const FiniteVec& h, const FiniteVec& a);

/// <U_{tD} chi_Q, chi_W>: product of heat factors with variance t d_k.
/// Exactly zero when sqrt(D) is not nuclear (positive-measure blocks) or the
/// blocks' relative shift is not l1.
CertifiedValue pair_U(double t, const DiagOp& d, const Block& q, const Block& w, double eps);

/// <Uhat_{tD} chi_Q, chi_W>: product of Gaussian-multiplier factors
/// exp(-t d_k x^2 / 2) integrated over edge overlaps.
CertifiedValue pair_Uhat(double t, const DiagOp& d, const Block& q, const Block& w, double eps);

/// <F_n chi_Q, chi_W>: Fourier factors on the first n coordinates, plain
/// overlaps beyond.
CertifiedValue pair_Fn(int n, const Block& q, const Block& w, double eps);

/// Taylor approximation of <S_{th} U_{sD} chi_Q, chi_W> through order n
/// (n <= 4, at most 4 active coordinates in h).
CertifiedValue taylor_sum(double s, const DiagOp& d, const Block& q, const Block& w,
                          const FiniteVec& h, double t, int n, double eps);

/// Taylor approximation of <Shat_{ta} Uhat_{sD} chi_Q, chi_W> through order
/// n, built from x-moment multiplier factors.
CertifiedValue mom_taylor_sum(double s, const DiagOp& d, const Block& q, const Block& w,
                              const FiniteVec& a, double t, int n, double eps);

/// t^{n+1} / (s^{(n+1)/2} (n+1)!) * ||D^{-1/2} h||_1^{n+1} * u_norm.
double taylor_remainder_bound(double s, const DiagOp& d, const seq::ParamSeq& h, double t, int n,
                              double u_norm);

struct BoundCheck {
    double lhs;
    double rhs;
};

/// ||x_j Uhat_{tD} chi_Q|| (certified upper bound) against the closed-form
/// bound (e t d_j)^{-1/2} ||chi_Q||.
BoundCheck bound_check_xexp(double t, const DiagOp& d, int j, const Block& q, double eps);

/// ||(Dx,x) exp(-t(Bx,x)) chi_Q|| (certified upper bound) against the trace
/// bound (1/(e t)) Tr(D B^{-1}) ||chi_Q||.
BoundCheck bound_check_trace(double t, const DiagOp& d, const DiagOp& b, const Block& q,
                             double eps);

enum class DistMoment { Gaussian, Rademacher, Uniform };

struct HypothesisEntry {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisEntry> entries;
    bool all_pass() const;
    std::string first_failure() const;
};

/// Evaluates the nuclearity hypotheses behind the averaging/oscillator
/// theorems from certified tail sums. Failures are reported, not thrown.
HypothesisReport hypothesis_check(const DiagOp& dx, const DiagOp& dp, const DiagOp& b,
                                  DistMoment dist);

} // namespace weylwalk::operators

#endif
