#include "weylwalk/seq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace weylwalk::seq {

namespace {

constexpr double kRelSlack = 1e-14; // floating slack applied to closed forms

bool is_finite(double x) { return std::isfinite(x); }

} // namespace

Interval inflate(Interval v, double rel, double abs) {
    const double pad_lo = std::fabs(v.lo) * rel + abs;
    const double pad_hi = std::fabs(v.hi) * rel + abs;
    return {v.lo - pad_lo, v.hi + pad_hi};
}

ParamSeq ParamSeq::zero() { return ParamSeq(Family::Zero, 0.0, 0.0, {}); }

ParamSeq ParamSeq::finite(std::vector<double> values) {
    for (double v : values)
        if (!is_finite(v)) throw std::invalid_argument("seq: finite-support values must be finite");
    return ParamSeq(Family::FiniteSupport, 0.0, 0.0, std::move(values));
}

ParamSeq ParamSeq::geometric(double c, double q) {
    if (!is_finite(c)) throw std::invalid_argument("seq: geometric coefficient must be finite");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("seq: geometric ratio must satisfy 0 < q < 1");
    return ParamSeq(Family::Geometric, c, q, {});
}

ParamSeq ParamSeq::power(double c, double p) {
    if (!(c >= 0.0) || !is_finite(c)) throw std::invalid_argument("seq: power coefficient must be >= 0");
    if (!(p > 0.0)) throw std::invalid_argument("seq: power exponent must be > 0");
    return ParamSeq(Family::Power, c, p, {});
}

double ParamSeq::tail_term(int k) const {
    switch (fam_) {
        case Family::Zero:
        case Family::FiniteSupport:
            return 0.0;
        case Family::Geometric:
            return c_ * std::pow(x_, k);
        case Family::Power:
            return c_ * std::pow(static_cast<double>(k), -x_);
    }
    return 0.0;
}

double ParamSeq::term(int k) const {
    if (k < 1) throw std::invalid_argument("seq: index must be >= 1");
    if (k <= prefix_len()) return prefix_[static_cast<size_t>(k) - 1];
    return tail_term(k);
}

bool ParamSeq::zero_beyond(int n) const {
    if (fam_ == Family::Zero || fam_ == Family::FiniteSupport)
        return n >= prefix_len();
    return c_ == 0.0 && n >= prefix_len();
}

ParamSeq ParamSeq::with_prefix_extended(int n) const {
    if (n <= prefix_len()) return *this;
    ParamSeq out = *this;
    out.prefix_.reserve(static_cast<size_t>(n));
    for (int k = prefix_len() + 1; k <= n; ++k) out.prefix_.push_back(tail_term(k));
    return out;
}

ParamSeq ParamSeq::scaled(double s) const {
    ParamSeq out = *this;
    for (double& v : out.prefix_) v *= s;
    out.c_ *= s;
    return out;
}

ParamSeq ParamSeq::plus(const ParamSeq& other) const {
    const ParamSeq* a = this;
    const ParamSeq* b = &other;
    // Put the structurally simpler tail second.
    auto tail_trivial = [](const ParamSeq& s) {
        return s.fam_ == Family::Zero || s.fam_ == Family::FiniteSupport || s.c_ == 0.0;
    };
    if (tail_trivial(*a) && !tail_trivial(*b)) std::swap(a, b);

    if (tail_trivial(*b)) {
        const int n = std::max(a->prefix_len(), b->prefix_len());
        ParamSeq out = a->with_prefix_extended(n);
        for (int k = 1; k <= b->prefix_len(); ++k)
            out.prefix_[static_cast<size_t>(k) - 1] += b->prefix_[static_cast<size_t>(k) - 1];
        return out;
    }
    if (a->fam_ == b->fam_ && a->x_ == b->x_) {
        const int n = std::max(a->prefix_len(), b->prefix_len());
        ParamSeq ax = a->with_prefix_extended(n);
        ParamSeq bx = b->with_prefix_extended(n);
        ParamSeq out = ax;
        for (int k = 0; k < n; ++k) out.prefix_[static_cast<size_t>(k)] += bx.prefix_[static_cast<size_t>(k)];
        out.c_ = ax.c_ + bx.c_;
        return out;
    }
    throw std::invalid_argument("seq: sum of incompatible tail families is not representable");
}

ParamSeq ParamSeq::abs() const {
    ParamSeq out = *this;
    for (double& v : out.prefix_) v = std::fabs(v);
    out.c_ = std::fabs(out.c_);
    return out;
}

double ParamSeq::term_abs_bound_beyond(int N) const {
    double bound = 0.0;
    for (int k = N + 1; k <= prefix_len(); ++k)
        bound = std::max(bound, std::fabs(prefix_[static_cast<size_t>(k) - 1]));
    const int m = std::max(N, prefix_len());
    switch (fam_) {
        case Family::Zero:
        case Family::FiniteSupport:
            return bound;
        case Family::Geometric:
            if (x_ < 1.0) return std::max(bound, std::fabs(c_) * std::pow(x_, m + 1));
            return std::fabs(c_) == 0.0 ? bound : std::numeric_limits<double>::infinity();
        case Family::Power:
            if (x_ > 0.0) return std::max(bound, std::fabs(c_) * std::pow(static_cast<double>(m + 1), -x_));
            return std::fabs(c_) == 0.0 ? bound : std::numeric_limits<double>::infinity();
    }
    return bound;
}

bool ParamSeq::nonnegative() const {
    for (double v : prefix_)
        if (v < 0.0) return false;
    if (fam_ == Family::Geometric || fam_ == Family::Power) return c_ >= 0.0;
    return true;
}

double TailSum::hi_or_inf() const {
    return infinite ? std::numeric_limits<double>::infinity() : value.hi;
}

namespace {

// Enclosure of sum_{k > M} c * q^k for 0 < q < 1 (exact closed form with
// floating slack).
Interval geometric_tail(double c, double q, int M) {
    const double v = c * std::pow(q, M + 1) / (1.0 - q);
    Interval out{v, v};
    return inflate(out, kRelSlack, 0.0);
}

// Enclosure of sum_{k > M} c * k^(-p) for p > 1. Sums 16 terms explicitly,
// then uses the midpoint rule on the convex integrand: the midpoint integral
// over-estimates the sum, and under-estimates it by at most the accumulated
// curvature error p * (M'-1/2)^(-p-1) / 24.
Interval power_tail(double c, double p, int M) {
    double s = 0.0;
    int m2 = M;
    for (int i = 0; i < 16; ++i) {
        ++m2;
        s += c * std::pow(static_cast<double>(m2), -p);
    }
    const double integral = c * std::pow(m2 + 0.5, 1.0 - p) / (p - 1.0);
    const double curv = c * p * std::pow(m2 - 0.5, -p - 1.0) / 24.0;
    Interval out{s + integral - curv, s + integral};
    return inflate(out, kRelSlack, 0.0);
}

TailSum tail_sum_impl(const ParamSeq& s, int N, bool absolute) {
    if (N < 0) throw std::invalid_argument("seq: tail start index must be >= 0");
    TailSum out;
    out.start_index = N;

    double prefix_part = 0.0;
    for (int k = N + 1; k <= s.prefix_len(); ++k) {
        const double t = s.term(k);
        prefix_part += absolute ? std::fabs(t) : t;
    }
    const int M = std::max(N, s.prefix_len());

    double c = s.fam_coeff();
    Interval tail{0.0, 0.0};
    switch (s.family()) {
        case Family::Zero:
        case Family::FiniteSupport:
            break;
        case Family::Geometric: {
            if (c != 0.0 && s.fam_param() >= 1.0) {
                out.infinite = true;
                return out;
            }
            if (c != 0.0) tail = geometric_tail(absolute ? std::fabs(c) : c, s.fam_param(), M);
            break;
        }
        case Family::Power: {
            if (c != 0.0 && s.fam_param() <= 1.0) {
                out.infinite = true;
                return out;
            }
            if (c != 0.0) tail = power_tail(absolute ? std::fabs(c) : c, s.fam_param(), M);
            break;
        }
    }
    if (tail.lo > tail.hi) std::swap(tail.lo, tail.hi); // negative signed tails
    out.value = inflate({prefix_part + tail.lo, prefix_part + tail.hi}, kRelSlack,
                        std::fabs(prefix_part) * kRelSlack);
    return out;
}

} // namespace

TailSum tail_abs_sum(const ParamSeq& s, int N) { return tail_sum_impl(s, N, true); }

TailSum tail_signed_sum(const ParamSeq& s, int N) { return tail_sum_impl(s, N, false); }

ParamSeq pow_seq(const ParamSeq& s, double alpha) {
    if (alpha == 0.0) throw std::invalid_argument("seq: pow_seq exponent must be nonzero");
    const bool integral = alpha == std::floor(alpha);
    if (!integral && !s.nonnegative())
        throw std::invalid_argument("seq: fractional power of a sequence with negative terms");

    ParamSeq out = s;
    for (double& v : out.prefix_) v = std::pow(v, alpha);
    switch (s.family()) {
        case Family::Zero:
        case Family::FiniteSupport:
            break;
        case Family::Geometric:
            out.c_ = std::pow(s.fam_coeff(), alpha);
            out.x_ = std::pow(s.fam_param(), alpha);
            break;
        case Family::Power:
            out.c_ = std::pow(s.fam_coeff(), alpha);
            out.x_ = s.fam_param() * alpha;
            break;
    }
    return out;
}

ParamSeq ratio_seq(const ParamSeq& num, const ParamSeq& den) {
    const int np = num.prefix_len(), dp = den.prefix_len();
    const int shared = std::max(np, dp);

    auto check_den = [&](double v) {
        if (!(v > 0.0)) throw std::invalid_argument("seq: ratio denominator terms must be > 0");
    };

    // Finite-support numerator: the quotient is finite-support.
    if (num.zero_beyond(shared)) {
        std::vector<double> vals;
        const int n = std::max(shared, num.prefix_len());
        vals.reserve(static_cast<size_t>(n));
        for (int k = 1; k <= n; ++k) {
            const double d = den.term(k);
            check_den(d);
            vals.push_back(num.term(k) / d);
        }
        return ParamSeq::finite(std::move(vals));
    }

    if (den.zero_beyond(shared))
        throw std::invalid_argument("seq: ratio denominator vanishes beyond its support");

    if (num.family() != den.family())
        throw std::invalid_argument("seq: unsupported ratio family pair");
    if (den.fam_coeff() <= 0.0)
        throw std::invalid_argument("seq: ratio denominator terms must be > 0");

    ParamSeq out = num.with_prefix_extended(shared);
    const ParamSeq dx = den.with_prefix_extended(shared);
    for (int k = 0; k < shared; ++k) {
        check_den(dx.prefix()[static_cast<size_t>(k)]);
        out.prefix_[static_cast<size_t>(k)] /= dx.prefix()[static_cast<size_t>(k)];
    }
    out.c_ = num.fam_coeff() / den.fam_coeff();
    if (num.family() == Family::Geometric) {
        out.x_ = num.fam_param() / den.fam_param(); // q >= 1 stays representable
    } else {
        out.x_ = num.fam_param() - den.fam_param(); // p <= 0 stays representable
    }
    return out;
}

} // namespace weylwalk::seq
