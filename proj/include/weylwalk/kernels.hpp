#ifndef WEYLWALK_KERNELS_HPP
#define WEYLWALK_KERNELS_HPP

#include <complex>
#include <functional>

namespace weylwalk::kernels {

/// Half-open interval [lo, hi), hi > lo. One edge of a block.
struct Interval1D {
    double lo;
    double hi;

    double length() const { return hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
};

enum class NormalFn { Pdf, Cdf, Erf };

// erf/cdf are evaluated by the in-repo Cody rational approximations rather
// than the platform libm, so results are reproducible across toolchains.
// Absolute error <= 1e-14 over |x| <= 8.
double erf(double x);
double erfc(double x);
double norm_pdf(double x);
double norm_cdf(double x);
double std_normal(NormalFn kind, double x);

/// Si(x) = int_0^x sin(u)/u du, |error| <= 1e-12.
double sine_integral(double x);

/// Cin(z) = int_0^z (1-cos u)/u du (entire, even).
double cin_integral(double x);

/// Length of e1 ∩ e2; 0 when disjoint.
double overlap_kernel(Interval1D e1, Interval1D e2);

/// int over e1 ∩ e2 of exp(i theta x) dx.
std::complex<double> osc_kernel(Interval1D e1, Interval1D e2, double theta);

/// <chi_e1 * rho_v, chi_e2>: integral over e2 of the Gaussian mollification
/// (variance v) of the indicator of e1. v = 0 reduces to the overlap length.
double heat_pair_kernel(Interval1D e1, Interval1D e2, double v);

/// int over e2 of d^order/dx^order (chi_e1 * rho_v)(x) dx, order in 1..4.
double heat_deriv_kernel(Interval1D e1, Interval1D e2, double v, int order);

/// int over e1 ∩ e2 of x^moment exp(-u x^2 / 2) dx, moment in 0..4.
double multiplier_kernel(Interval1D e1, Interval1D e2, double u, int moment);

/// <exp(tL) chi_e1, chi_e2> for L = (dx/2) d^2/dx^2 - (dp/2) x^2, via the
/// closed-form Gaussian kernel integrated in y and adaptive quadrature in x.
/// Absolute tolerance 1e-10; throws std::runtime_error if not reached.
double mehler_pair_kernel(Interval1D e1, Interval1D e2, double dx, double dp, double t);

/// int over e2 of the unitary 1-D Fourier transform of chi_e1. Real for
/// symmetric e1; complex in general.
std::complex<double> fourier_pair_kernel(Interval1D e1, Interval1D e2);

/// Adaptive Simpson quadrature with absolute tolerance. Exposed because the
/// modules above share it; throws std::runtime_error when the recursion
/// budget is exhausted before the tolerance is met.
double adaptive_quad(const std::function<double(double)>& f, double a, double b, double abs_tol);

} // namespace weylwalk::kernels

#endif
