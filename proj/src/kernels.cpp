#include "weylwalk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace weylwalk::kernels {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kSqrt2 = 1.41421356237309504880168872420969808;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438187;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// ---------------------------------------------------------------------------
// erf / erfc: W. J. Cody's rational Chebyshev approximations (SPECFUN).
// ---------------------------------------------------------------------------

const double kA[5] = {3.1611237438705656, 113.864154151050156, 377.485237685302021,
                      3209.37758913846947, 0.185777706184603153};
const double kB[4] = {23.6012909523441209, 244.024637934444173, 1282.61652607737228,
                      2844.23683343917062};
const double kC[9] = {0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
                      298.635138197400131,  881.95222124176909,  1712.04761263407058,
                      2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
const double kD[8] = {15.7449261107098347, 117.693950891312499, 537.181101862009858,
                      1621.38957456669019, 3290.79923573345963, 4362.61909014324716,
                      3439.36767414372164, 1230.33935480374942};
const double kP[6] = {0.305326634961232344, 0.360344899949804439, 0.125781726111229246,
                      0.0160837851487422766, 6.58749161529837803e-4, 0.0163153871373020978};
const double kQ[5] = {2.56852019228982242, 1.87295284992346047, 0.527905102951428412,
                      0.0605183413124413191, 0.00233520497626869185};

constexpr double kSqrPi = 0.56418958354775628695; // 1/sqrt(pi)
constexpr double kThresh = 0.46875;
constexpr double kXBig = 26.543;
constexpr double kXSmall = 1.11e-16;

// jint = 0 -> erf, 1 -> erfc.
double calerf(double x, int jint) {
    const double y = std::fabs(x);
    double result;

    if (y <= kThresh) {
        const double ysq = y > kXSmall ? y * y : 0.0;
        double xnum = kA[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i) {
            xnum = (xnum + kA[i]) * ysq;
            xden = (xden + kB[i]) * ysq;
        }
        result = x * (xnum + kA[3]) / (xden + kB[3]);
        return jint == 0 ? result : 1.0 - result;
    }

    if (y <= 4.0) {
        double xnum = kC[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i) {
            xnum = (xnum + kC[i]) * y;
            xden = (xden + kD[i]) * y;
        }
        result = (xnum + kC[7]) / (xden + kD[7]);
        const double ysq = std::trunc(y * 16.0) / 16.0;
        const double del = (y - ysq) * (y + ysq);
        result *= std::exp(-ysq * ysq) * std::exp(-del);
    } else {
        result = 0.0;
        if (y < kXBig) {
            const double ysq = 1.0 / (y * y);
            double xnum = kP[5] * ysq;
            double xden = ysq;
            for (int i = 0; i < 4; ++i) {
                xnum = (xnum + kP[i]) * ysq;
                xden = (xden + kQ[i]) * ysq;
            }
            result = ysq * (xnum + kP[4]) / (xden + kQ[4]);
            result = (kSqrPi - result) / y;
            const double ysq2 = std::trunc(y * 16.0) / 16.0;
            const double del = (y - ysq2) * (y + ysq2);
            result *= std::exp(-ysq2 * ysq2) * std::exp(-del);
        }
    }

    if (jint == 0) {
        result = (0.5 - result) + 0.5;
        return x < 0.0 ? -result : result;
    }
    return x < 0.0 ? 2.0 - result : result;
}

// ---------------------------------------------------------------------------
// Adaptive Simpson
// ---------------------------------------------------------------------------

struct QuadState {
    const std::function<double(double)>& f;
    int budget;
};

double simpson_step(QuadState& st, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = st.f(lm), frm = st.f(rm);
    st.budget -= 2;
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= 52 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    if (st.budget < 0) throw std::runtime_error("kernels: quadrature budget exhausted");
    return simpson_step(st, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
           simpson_step(st, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
}

} // namespace

double erf(double x) { return calerf(x, 0); }
double erfc(double x) { return calerf(x, 1); }

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * calerf(-x / kSqrt2, 1); }

double std_normal(NormalFn kind, double x) {
    switch (kind) {
        case NormalFn::Pdf: return norm_pdf(x);
        case NormalFn::Cdf: return norm_cdf(x);
        case NormalFn::Erf: return erf(x);
    }
    return 0.0;
}

double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double abs_tol) {
    if (a == b) return 0.0;
    QuadState st{f, 2'000'000};
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(st, a, fa, b, fb, m, fm, whole, abs_tol, 0);
}

// ---------------------------------------------------------------------------
// Sine and cosine integrals
// ---------------------------------------------------------------------------

namespace {

// Maclaurin series, accurate in long double for |x| <= 12.
long double si_series(long double x) {
    long double term = x;
    long double sum = x;
    const long double x2 = x * x;
    for (int n = 0; n < 80; ++n) {
        const long double k = 2.0L * n + 1.0L;
        term *= -x2 * k / ((k + 2.0L) * (k + 1.0L) * (k + 2.0L));
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
    }
    return sum;
}

long double cin_series(long double x) {
    const long double x2 = x * x;
    long double term = x2 / 4.0L; // n = 1 term: z^2 / (2 * 2!)
    long double sum = term;
    for (int n = 1; n < 90; ++n) {
        const long double tn = 2.0L * n;
        // ratio of consecutive terms of sum (-1)^{n+1} z^{2n} / (2n (2n)!)
        term *= -x2 * tn / ((tn + 2.0L) * (tn + 1.0L) * (tn + 2.0L));
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
    }
    return sum;
}

// Auxiliary asymptotic sums: Si(x) = pi/2 - f cos x - g sin x,
// Ci(x) = f sin x - g cos x, valid to ~1e-13 for x >= 36.
void si_aux(double x, double& f, double& g) {
    const double x2 = x * x;
    double fk = 1.0, fs = 0.0, gs = 0.0;
    // f: sum (-1)^n (2n)!/x^{2n} / x ; g: sum (-1)^n (2n+1)!/x^{2n} / x^2
    for (int n = 0; n <= 9; ++n) {
        fs += fk;
        gs += fk * (2.0 * n + 1.0);
        fk *= -(2.0 * n + 1.0) * (2.0 * n + 2.0) / x2;
    }
    f = fs / x;
    g = gs / x2;
}

constexpr double kSiSeriesEnd = 12.0;
constexpr double kSiAsympStart = 36.0;

} // namespace

double sine_integral(double x) {
    const double ax = std::fabs(x);
    double v;
    if (ax <= kSiSeriesEnd) {
        v = static_cast<double>(si_series(ax));
    } else if (ax < kSiAsympStart) {
        static const double si12 = static_cast<double>(si_series(12.0L));
        v = si12 + adaptive_quad([](double u) { return std::sin(u) / u; }, kSiSeriesEnd, ax,
                                 5e-14);
    } else {
        double f, g;
        si_aux(ax, f, g);
        v = 0.5 * kPi - f * std::cos(ax) - g * std::sin(ax);
    }
    return x < 0.0 ? -v : v;
}

double cin_integral(double x) {
    const double ax = std::fabs(x);
    if (ax <= kSiSeriesEnd) return static_cast<double>(cin_series(ax));
    if (ax < kSiAsympStart) {
        static const double cin12 = static_cast<double>(cin_series(12.0L));
        return cin12 + adaptive_quad([](double u) { return (1.0 - std::cos(u)) / u; },
                                     kSiSeriesEnd, ax, 5e-14);
    }
    double f, g;
    si_aux(ax, f, g);
    const double ci = f * std::sin(ax) - g * std::cos(ax);
    return kEulerGamma + std::log(ax) - ci;
}

// ---------------------------------------------------------------------------
// Pairing factors
// ---------------------------------------------------------------------------

namespace {

bool intersect(Interval1D e1, Interval1D e2, double& lo, double& hi) {
    lo = std::max(e1.lo, e2.lo);
    hi = std::min(e1.hi, e2.hi);
    return hi > lo;
}

// m(u) = u Phi(u) + rho(u), the antiderivative of Phi.
double phi_antideriv(double u) { return u * norm_cdf(u) + norm_pdf(u); }

} // namespace

double overlap_kernel(Interval1D e1, Interval1D e2) {
    double lo, hi;
    return intersect(e1, e2, lo, hi) ? hi - lo : 0.0;
}

std::complex<double> osc_kernel(Interval1D e1, Interval1D e2, double theta) {
    double lo, hi;
    if (!intersect(e1, e2, lo, hi)) return {0.0, 0.0};
    const double len = hi - lo;
    if (theta == 0.0) return {len, 0.0};
    const double mid = 0.5 * (lo + hi);
    const double mag = 2.0 * std::sin(0.5 * theta * len) / theta;
    return std::polar(1.0, theta * mid) * mag;
}

double heat_pair_kernel(Interval1D e1, Interval1D e2, double v) {
    if (v < 0.0) throw std::invalid_argument("kernels: heat variance must be >= 0");
    if (v == 0.0) return overlap_kernel(e1, e2);
    const double sigma = std::sqrt(v);
    const double a = e1.lo, b = e1.hi, r = e2.lo, s = e2.hi;
    const double val = sigma * (phi_antideriv((s - a) / sigma) - phi_antideriv((r - a) / sigma) -
                                phi_antideriv((s - b) / sigma) + phi_antideriv((r - b) / sigma));
    // closed form is exact; clamp the few-ulp negatives that cancellation produces
    return std::max(0.0, val);
}

double heat_deriv_kernel(Interval1D e1, Interval1D e2, double v, int order) {
    if (!(v > 0.0)) throw std::invalid_argument("kernels: heat_deriv needs v > 0");
    if (order < 1 || order > 4) throw std::invalid_argument("kernels: derivative order must be 1..4");
    const double sigma = std::sqrt(v);
    const double a = e1.lo, b = e1.hi, r = e2.lo, s = e2.hi;

    auto endpoint = [&](double y) {
        const double u = y / sigma;
        if (order == 1) return norm_cdf(u);
        // (d/dy)^{order-2} of rho_v(y); probabilists' Hermite recursion.
        double he = 1.0; // He_0
        if (order >= 3) he = u;            // He_1
        if (order == 4) he = u * u - 1.0;  // He_2
        const double sign = (order % 2 == 0) ? 1.0 : -1.0;
        return sign * he * norm_pdf(u) / std::pow(sigma, order - 1);
    };
    return endpoint(s - a) - endpoint(r - a) - endpoint(s - b) + endpoint(r - b);
}

namespace {

// fixed 20-point Gauss-Legendre rule, nodes built once by Newton iteration
struct GlRule {
    double x[20];
    double w[20];
    GlRule() {
        const int n = 20;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double p0 = 0.0, dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                double p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
                }
                dp = n * (t * p0 - p1) / (t * t - 1.0);
                const double dt = p0 / dp;
                t -= dt;
                if (std::fabs(dt) < 1e-15) break;
            }
            x[i] = -t;
            x[n - 1 - i] = t;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

// int_lo^hi x^m exp(-u x^2 / 2) dx by composite Gauss-Legendre; positive
// weights keep the evaluation cancellation-free for even moments
double moment_integral_quad(double lo, double hi, double u, int m) {
    static const GlRule rule;
    const double su = std::sqrt(u);
    const int panels = 1 + static_cast<int>(su * (hi - lo) / 5.0);
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + (hi - lo) * p / panels;
        const double b = lo + (hi - lo) * (p + 1) / panels;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double xi = c + h * rule.x[i];
            s += rule.w[i] * std::pow(xi, m) * std::exp(-0.5 * u * xi * xi);
        }
        total += s * h;
    }
    return total;
}

} // namespace

double multiplier_kernel(Interval1D e1, Interval1D e2, double u, int moment) {
    if (u < 0.0) throw std::invalid_argument("kernels: multiplier exponent must be >= 0");
    if (moment < 0 || moment > 4) throw std::invalid_argument("kernels: moment must be 0..4");
    double lo, hi;
    if (!intersect(e1, e2, lo, hi)) return 0.0;
    if (u == 0.0) {
        const int m1 = moment + 1;
        return (std::pow(hi, m1) - std::pow(lo, m1)) / m1;
    }
    // The Phi-difference closed form cancels catastrophically when the
    // scaled endpoints are close, and again deep in a one-sided tail; the
    // quadrature path is exact to a few ulp there (positive integrand).
    const double z1 = std::sqrt(u) * lo, z2 = std::sqrt(u) * hi;
    if (z2 - z1 < 2.0 || z1 > 5.0 || z2 < -5.0) return moment_integral_quad(lo, hi, u, moment);

    const double su = std::sqrt(u);
    const double i0 = std::sqrt(2.0 * kPi / u) * (norm_cdf(su * hi) - norm_cdf(su * lo));
    if (moment == 0) return i0;
    const double elo = std::exp(-0.5 * u * lo * lo), ehi = std::exp(-0.5 * u * hi * hi);
    const double i1 = (elo - ehi) / u;
    if (moment == 1) return i1;
    const double i2 = (lo * elo - hi * ehi) / u + i0 / u;
    if (moment == 2) return i2;
    const double i3 = (lo * lo * elo - hi * hi * ehi) / u + 2.0 * i1 / u;
    if (moment == 3) return i3;
    return (lo * lo * lo * elo - hi * hi * hi * ehi) / u + 3.0 * i2 / u;
}

double mehler_pair_kernel(Interval1D e1, Interval1D e2, double dx, double dp, double t) {
    if (!(dx > 0.0) || !(dp > 0.0) || !(t > 0.0))
        throw std::invalid_argument("kernels: mehler parameters must be positive");
    const double omega = std::sqrt(dx * dp);
    const double z = omega * t;

    // sinh(z)/omega and omega*tanh(z), via series when z underflows the ratio
    double sinh_over_omega, omega_tanh;
    if (z < 1e-6) {
        sinh_over_omega = t * (1.0 + z * z / 6.0);
        omega_tanh = omega * omega * t * (1.0 - z * z / 3.0);
    } else {
        sinh_over_omega = std::sinh(z) / omega;
        omega_tanh = omega * std::tanh(z);
    }
    const double ch = std::cosh(z);
    const double sigma_y = std::sqrt(dx * sinh_over_omega / ch);
    const double damp = omega_tanh / (2.0 * dx);
    const double inv_sqrt_ch = 1.0 / std::sqrt(ch);

    auto smeared = [&](double x) {
        const double mu = x / ch;
        return inv_sqrt_ch * std::exp(-damp * x * x) *
               (norm_cdf((e1.hi - mu) / sigma_y) - norm_cdf((e1.lo - mu) / sigma_y));
    };
    return adaptive_quad(smeared, e2.lo, e2.hi, 1e-10);
}

std::complex<double> fourier_pair_kernel(Interval1D e1, Interval1D e2) {
    const double a = e1.lo, b = e1.hi, r = e2.lo, s = e2.hi;
    const double half = 0.5 * std::sqrt(2.0 / kPi);
    const double re =
        half * (sine_integral(b * s) - sine_integral(a * s) - sine_integral(b * r) +
                sine_integral(a * r));
    const double im =
        -half * (cin_integral(b * s) - cin_integral(a * s) - cin_integral(b * r) +
                 cin_integral(a * r));
    return {re, im};
}

} // namespace weylwalk::kernels
