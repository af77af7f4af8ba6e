#include "weylwalk/certified.hpp"

#include <cmath>
#include <stdexcept>

namespace weylwalk::cert {

LogTail first_order_tail(double dev_sum_hi, double dev_term_bound) {
    if (!(dev_term_bound < 0.4) || !std::isfinite(dev_sum_hi)) return {};
    LogTail out;
    out.log = {-dev_sum_hi / (1.0 - dev_term_bound), dev_sum_hi};
    out.usable = true;
    return out;
}

CertifiedValue product(double eps, int first_index, int Tmax,
                       const std::function<std::complex<double>(int)>& factor,
                       double factor_rel_err,
                       const std::function<LogTail(int)>& log_tail) {
    if (!(eps > 0.0)) throw std::invalid_argument("certified product: eps must be > 0");

    int T = std::max(first_index, 8);
    LogTail lt = log_tail(T);
    while ((!lt.usable || lt.log.width() > 0.5 * eps) && T < Tmax) {
        T = std::min(Tmax, 2 * T);
        lt = log_tail(T);
    }
    if (!lt.usable)
        throw std::runtime_error("certified product: tail deviations not certifiable");

    std::complex<double> prefix(1.0, 0.0);
    double fp_rel = 0.0;
    for (int k = 1; k <= T; ++k) {
        const std::complex<double> f = factor(k);
        if (f == std::complex<double>(0.0, 0.0)) return CertifiedValue::exact_zero(k);
        prefix *= f;
        fp_rel += factor_rel_err + 2.3e-16;
    }

    const double glo = std::exp(lt.log.lo);
    const double ghi = std::exp(lt.log.hi);
    CertifiedValue out;
    out.mid = prefix * (0.5 * (glo + ghi));
    out.rad = std::abs(prefix) * (0.5 * (ghi - glo) + 1.1 * fp_rel * ghi);
    out.trunc_index = T;
    return out;
}

} // namespace weylwalk::cert
