#ifndef WEYLWALK_SEQ_HPP
#define WEYLWALK_SEQ_HPP

#include <vector>

namespace weylwalk::seq {

/// Closed interval [lo, hi] used for certified enclosures of series values.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Widens an interval by a relative and absolute floating-point slack.
Interval inflate(Interval v, double rel, double abs);

enum class Family {
    Zero,          // all terms 0
    FiniteSupport, // prefix only, 0 beyond
    Geometric,     // term(k) = c * q^k
    Power,         // term(k) = c * k^(-p)
};

// Infinite real sequence indexed k = 1, 2, ... with an explicit prefix
// followed by a closed-form tail. Construction through the named factories
// enforces the user-facing parameter ranges (0 < q < 1, p > 0, c >= 0 for
// Power); the algebra below (ratio_seq, pow_seq) may produce degenerate
// parameters (q >= 1, p <= 0), which stay representable so that divergence
// remains decidable.
class ParamSeq {
public:
    ParamSeq() = default;

    static ParamSeq zero();
    static ParamSeq finite(std::vector<double> values);
    static ParamSeq geometric(double c, double q);
    static ParamSeq power(double c, double p);

    double term(int k) const;

    Family family() const { return fam_; }
    double fam_coeff() const { return c_; }
    double fam_param() const { return x_; }
    int prefix_len() const { return static_cast<int>(prefix_.size()); }
    const std::vector<double>& prefix() const { return prefix_; }

    /// True when every term beyond index n is exactly zero.
    bool zero_beyond(int n) const;

    /// Copy with terms 1..n materialized into the explicit prefix.
    ParamSeq with_prefix_extended(int n) const;

    /// Elementwise scaling (exact, stays in family).
    ParamSeq scaled(double s) const;

    /// Elementwise sum. Exact when the tails are combinable: either tail
    /// zero/finite, or identical family with identical decay parameter.
    /// Throws std::invalid_argument otherwise.
    ParamSeq plus(const ParamSeq& other) const;

    /// Elementwise absolute value.
    ParamSeq abs() const;

    /// sup_{k > N} |term(k)|; tails of every family are monotone in |.|.
    double term_abs_bound_beyond(int N) const;

    /// True when all terms are >= 0 (conservative: decides from the
    /// representation, no sampling).
    bool nonnegative() const;

    bool operator==(const ParamSeq&) const = default;

private:
    ParamSeq(Family f, double c, double x, std::vector<double> prefix)
        : fam_(f), c_(c), x_(x), prefix_(std::move(prefix)) {}

    double tail_term(int k) const; // family formula, ignores prefix

    Family fam_ = Family::Zero;
    double c_ = 0.0; // coefficient
    double x_ = 0.0; // q (Geometric) or p (Power)
    std::vector<double> prefix_;

    friend ParamSeq pow_seq(const ParamSeq&, double);
    friend ParamSeq ratio_seq(const ParamSeq&, const ParamSeq&);
};

/// Certified enclosure of sum_{k > start_index} |term(k)|.
struct TailSum {
    Interval value;     // meaningful only when !infinite
    bool infinite = false;
    int start_index = 0;

    double hi_or_inf() const;
};

TailSum tail_abs_sum(const ParamSeq& s, int N);

/// Certified enclosure of the signed tail sum_{k > N} term(k). Requires a
/// sign-stable convergent tail (true for every representable family).
TailSum tail_signed_sum(const ParamSeq& s, int N);

/// Elementwise power term(k) -> term(k)^alpha. Requires nonnegative terms
/// when alpha is fractional; alpha must be nonzero.
ParamSeq pow_seq(const ParamSeq& s, double alpha);

/// Elementwise quotient. Supported pairs: X/Geometric, X/Power with matching
/// family, FiniteSupport/anything, anything/FiniteSupport-free denominators.
/// Denominator terms must be strictly positive.
ParamSeq ratio_seq(const ParamSeq& num, const ParamSeq& den);

} // namespace weylwalk::seq

#endif
