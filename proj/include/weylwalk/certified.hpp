#ifndef WEYLWALK_CERTIFIED_HPP
#define WEYLWALK_CERTIFIED_HPP

#include <complex>
#include <functional>

#include "weylwalk/seq.hpp"

namespace weylwalk {

/// Disk enclosure mid +- rad of the exact value of an infinite product or
/// pairing, together with the truncation index the bound was certified at.
struct CertifiedValue {
    std::complex<double> mid{0.0, 0.0};
    double rad = 0.0;
    int trunc_index = 0;

    static CertifiedValue exact_zero(int trunc = 0) { return {{0.0, 0.0}, 0.0, trunc}; }
    bool is_exact_zero() const { return mid == std::complex<double>(0.0, 0.0) && rad == 0.0; }
    bool contains(std::complex<double> z) const { return std::abs(z - mid) <= rad; }

    CertifiedValue scaled(std::complex<double> s) const {
        return {mid * s, rad * std::abs(s), trunc_index};
    }
};

namespace cert {

/// Certified enclosure of sum_{k > T} ln f_k for the tail of a factor
/// product. `usable == false` asks the evaluator to retry at a larger T.
struct LogTail {
    seq::Interval log{0.0, 0.0};
    bool usable = false;
};

/// Builds a log-tail enclosure from |f_k - 1| budgets: dev_sum >= sum of
/// deviations beyond T, dev_term >= sup of a single deviation beyond T.
LogTail first_order_tail(double dev_sum_hi, double dev_term_bound);

/// Evaluates prod_{k>=1} f(k) with a certified tail. Factors for k <= T are
/// evaluated exactly; log_tail(T) must enclose the rest. T is grown from
/// first_index until the total radius meets eps * |mid| (or Tmax is hit, in
/// which case the best achievable enclosure is returned). A factor equal to
/// zero short-circuits to the exact zero value.
CertifiedValue product(double eps, int first_index, int Tmax,
                       const std::function<std::complex<double>(int)>& factor,
                       double factor_rel_err,
                       const std::function<LogTail(int)>& log_tail);

} // namespace cert
} // namespace weylwalk

#endif
