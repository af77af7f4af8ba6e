// Test-side numerical oracles, independent of the library implementation
// paths they check: Gauss-Legendre quadrature (the library quadrature is
// adaptive Simpson), long-double series/continued fractions for erf, brute
// force partial products, a Crank-Nicolson PDE solver, and small fitting
// helpers.
#ifndef WEYLWALK_TEST_ORACLES_HPP
#define WEYLWALK_TEST_ORACLES_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracles {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// --------------------------------------------------------------------------
// Gauss-Legendre quadrature
// --------------------------------------------------------------------------

inline void gauss_legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
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

template <class F>
double gl_panel(const F& f, double a, double b, const std::vector<double>& x,
                const std::vector<double>& w) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += w[i] * f(c + h * x[i]);
    return s * h;
}

/// Composite 24-point Gauss-Legendre with panel doubling until two levels
/// agree to tol.
template <class F>
double quad(const F& f, double a, double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    static thread_local std::vector<double> x, w;
    if (x.empty()) gauss_legendre_nodes(24, x, w);
    double prev = 0.0;
    for (int panels = 1; panels <= (1 << 14); panels *= 2) {
        double s = 0.0;
        const double h = (b - a) / panels;
        for (int i = 0; i < panels; ++i) s += gl_panel(f, a + i * h, a + (i + 1) * h, x, w);
        if (panels > 2 && std::fabs(s - prev) < tol) return s;
        prev = s;
    }
    return prev;
}

template <class F>
std::complex<double> quad_complex(const F& f, double a, double b, double tol = 1e-12) {
    const double re = quad([&](double t) { return f(t).real(); }, a, b, tol);
    const double im = quad([&](double t) { return f(t).imag(); }, a, b, tol);
    return {re, im};
}

// --------------------------------------------------------------------------
// erf / Phi oracles (long-double series + continued fraction)
// --------------------------------------------------------------------------

inline long double gauss_pdf_ld(long double x, long double v) {
    return std::exp(-0.5L * x * x / v) /
           std::sqrt(2.0L * 3.14159265358979323846264338327950288L * v);
}

inline long double erf_series(long double x) {
    // erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1)/(n! (2n+1)); |x| <= ~2.5
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x * x / n;
        sum += term / (2.0L * n + 1.0L);
        if (std::fabs(term) < 1e-25L * std::fabs(sum)) break;
    }
    return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

inline long double erfc_quad(double x) {
    // erfc(x) = 2/sqrt(pi) int_x^inf exp(-t^2) dt; the tail beyond x+14 is
    // below 1e-85 for x >= 0.
    const double v = quad([](double t) { return std::exp(-t * t); }, x, x + 14.0, 1e-18);
    return static_cast<long double>(v) * 2.0L /
           std::sqrt(3.14159265358979323846264338327950288L);
}

inline long double erf_oracle(double x) {
    const double ax = std::fabs(x);
    const long double v = (ax <= 2.0) ? erf_series(ax) : 1.0L - erfc_quad(ax);
    return x < 0 ? -v : v;
}

// --------------------------------------------------------------------------
// Long-double partial products with tail accounting
// --------------------------------------------------------------------------

struct PartialProduct {
    long double value = 1.0L;
    int terms = 0;
};

template <class F>
PartialProduct partial_product(const F& factor, int n_terms) {
    PartialProduct out;
    for (int k = 1; k <= n_terms; ++k) {
        out.value *= static_cast<long double>(factor(k));
        out.terms = k;
        if (out.value == 0.0L) break;
    }
    return out;
}

// --------------------------------------------------------------------------
// Crank-Nicolson oracle for u_t = (dx/2) u'' - (dp/2) x^2 u
// --------------------------------------------------------------------------

struct Cell {
    double lo, hi;
};

inline double cell_overlap(double a, double b, double lo, double hi) {
    const double l = std::max(a, lo), r = std::min(b, hi);
    return r > l ? r - l : 0.0;
}

/// Pairing <exp(tL) chi_[e1], chi_[e2]> via Crank-Nicolson with a Rannacher
/// start. Grid and step chosen so the result is reliable to ~3e-6.
inline double mehler_pde_oracle(double e1lo, double e1hi, double e2lo, double e2hi, double dx,
                                double dp, double t, int nx = 4001, int nt = 1200,
                                double L = 8.0) {
    const double h = 2.0 * L / (nx - 1);
    std::vector<double> u(nx), xg(nx);
    for (int i = 0; i < nx; ++i) {
        xg[i] = -L + i * h;
        u[i] = cell_overlap(e1lo, e1hi, xg[i] - 0.5 * h, xg[i] + 0.5 * h) / h;
    }
    // A u = (dx/2) u'' - (dp/2) x^2 u with zero boundary
    const double alpha = 0.5 * dx / (h * h);
    std::vector<double> diagA(nx), lower(nx), upper(nx), rhs(nx), cp(nx), dpr(nx);
    auto step = [&](double dt, double theta) {
        // (I - theta dt A) u_new = (I + (1-theta) dt A) u_old
        for (int i = 0; i < nx; ++i) {
            const double pot = -0.5 * dp * xg[i] * xg[i];
            const double aii = -2.0 * alpha + pot;
            const double uim = i > 0 ? u[i - 1] : 0.0;
            const double uip = i < nx - 1 ? u[i + 1] : 0.0;
            rhs[i] = u[i] + (1.0 - theta) * dt * (alpha * (uim + uip) + aii * u[i]);
            diagA[i] = 1.0 - theta * dt * aii;
            lower[i] = -theta * dt * alpha;
            upper[i] = -theta * dt * alpha;
        }
        // Thomas
        cp[0] = upper[0] / diagA[0];
        dpr[0] = rhs[0] / diagA[0];
        for (int i = 1; i < nx; ++i) {
            const double m = diagA[i] - lower[i] * cp[i - 1];
            cp[i] = upper[i] / m;
            dpr[i] = (rhs[i] - lower[i] * dpr[i - 1]) / m;
        }
        u[nx - 1] = dpr[nx - 1];
        for (int i = nx - 2; i >= 0; --i) u[i] = dpr[i] - cp[i] * u[i + 1];
    };

    const double dt = t / nt;
    // Rannacher: four implicit-Euler half steps to damp the discontinuous IC
    for (int i = 0; i < 4; ++i) step(0.5 * dt, 1.0);
    for (int i = 2; i < nt; ++i) step(dt, 0.5);

    double out = 0.0;
    for (int i = 0; i < nx; ++i)
        out += u[i] * cell_overlap(e2lo, e2hi, xg[i] - 0.5 * h, xg[i] + 0.5 * h);
    return out;
}

// --------------------------------------------------------------------------
// Fitting helpers
// --------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LineFit f;
    const double den = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (size_t i = 0; i < n; ++i) {
        const double fit = f.slope * x[i] + f.intercept;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

} // namespace oracles

#endif
