#include "weylwalk/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace weylwalk::blocks {

namespace {

constexpr int kTmaxDefault = 1 << 20;
constexpr double kOverlapFactorErr = 6e-16; // pure length arithmetic
constexpr double kOscFactorErr = 2e-15;     // sin/polar based

} // namespace

Block::Block(std::vector<Interval1D> prefix, seq::ParamSeq tail_shift, seq::ParamSeq tail_delta)
    : prefix_(std::move(prefix)), tail_shift_(std::move(tail_shift)), tail_delta_(std::move(tail_delta)) {
    for (const auto& e : prefix_) {
        if (!(e.hi > e.lo) || !std::isfinite(e.lo) || !std::isfinite(e.hi))
            throw std::invalid_argument("block: prefix edges must be finite with hi > lo");
    }
    const int n0 = prefix_len();
    const int n_check = std::max({n0, tail_delta_.prefix_len(), tail_shift_.prefix_len()});
    for (int k = n0 + 1; k <= n_check; ++k) {
        if (!(1.0 + tail_delta_.term(k) > 0.0))
            throw std::invalid_argument("block: tail width must stay positive");
    }
    if (!(tail_delta_.term_abs_bound_beyond(n_check) < 1.0))
        throw std::invalid_argument("block: tail width must stay positive");
    if (!std::isfinite(tail_shift_.term_abs_bound_beyond(n_check)))
        throw std::invalid_argument("block: tail centers must stay bounded");
    if (seq::tail_abs_sum(tail_delta_, n0).infinite)
        throw std::invalid_argument("block: not absolutely measurable (width deviations not l1)");
}

Block Block::unit() { return Block({}, seq::ParamSeq::zero(), seq::ParamSeq::zero()); }

Interval1D Block::edge(int k) const {
    if (k < 1) throw std::invalid_argument("block: edge index must be >= 1");
    if (k <= prefix_len()) return prefix_[static_cast<size_t>(k) - 1];
    const double c = tail_shift_.term(k);
    const double w = 1.0 + tail_delta_.term(k);
    return {c - 0.5 * w, c + 0.5 * w};
}

bool Block::positive_measure() const {
    // prefix widths are positive by construction; only the tail can fail
    return !seq::tail_abs_sum(tail_delta_, prefix_len()).infinite;
}

Block Block::shifted(double t, const seq::ParamSeq& h) const {
    const int n0 = std::max(prefix_len(), h.prefix_len());
    std::vector<Interval1D> new_prefix;
    new_prefix.reserve(static_cast<size_t>(n0));
    for (int k = 1; k <= n0; ++k) {
        Interval1D e = edge(k);
        const double d = t * h.term(k);
        new_prefix.push_back({e.lo + d, e.hi + d});
    }
    seq::ParamSeq new_shift =
        tail_shift_.with_prefix_extended(n0).plus(h.with_prefix_extended(n0).scaled(t));
    return Block(std::move(new_prefix), std::move(new_shift), tail_delta_);
}

bool Block::same_tail_as(const Block& other) const {
    if (prefix_len() != other.prefix_len()) return false;
    return tail_shift_ == other.tail_shift_ && tail_delta_ == other.tail_delta_;
}

// ---------------------------------------------------------------------------
// Tail deviation bookkeeping
// ---------------------------------------------------------------------------

namespace {

// Second-order log-tail for factors f_k = 1 + d_k driven by a single
// sequence: ln(1+d) = d - d^2/2 + r with |r| <= |d|^3 / (3(1-e)).
cert::LogTail single_seq_log_tail(const seq::ParamSeq& delta, int T) {
    const double e = delta.term_abs_bound_beyond(T);
    if (!(e < 0.5)) return {};
    const auto s1 = seq::tail_signed_sum(delta, T);
    const auto s2 = seq::tail_abs_sum(seq::pow_seq(delta, 2.0), T);
    const auto s3 = seq::tail_abs_sum(seq::pow_seq(delta.abs(), 3.0), T);
    if (s1.infinite || s2.infinite || s3.infinite) return {};
    const double c3 = s3.value.hi / (3.0 * (1.0 - e));
    cert::LogTail out;
    out.log = {s1.value.lo - 0.5 * s2.value.hi - c3, s1.value.hi - 0.5 * s2.value.lo + c3};
    out.usable = true;
    return out;
}

} // namespace

BlockPairTail::BlockPairTail(const Block& q, const Block& w) : q_(&q), w_(&w) {
    same_tail = q.same_tail_as(w);
    if (same_tail) return;

    const auto& qs = q.tail_shift();
    const auto& ws = w.tail_shift();
    try {
        diff_abs_ = ws.plus(qs.scaled(-1.0)).abs();
        diff_exact_ = true;
        divergent_ = seq::tail_abs_sum(diff_abs_, std::max(q.prefix_len(), w.prefix_len())).infinite;
    } catch (const std::invalid_argument&) {
        diff_exact_ = false;
        const bool qi = seq::tail_abs_sum(qs, q.prefix_len()).infinite;
        const bool wi = seq::tail_abs_sum(ws, w.prefix_len()).infinite;
        if (qi && wi)
            throw std::invalid_argument(
                "pairing: relative tail shift of incompatible divergent families");
        divergent_ = qi != wi;
    }
}

int BlockPairTail::min_start() const { return std::max(q_->prefix_len(), w_->prefix_len()); }

double BlockPairTail::center_dev_sum(int T) const {
    if (same_tail) return 0.0;
    if (diff_exact_) return seq::tail_abs_sum(diff_abs_, T).hi_or_inf();
    return seq::tail_abs_sum(q_->tail_shift(), T).hi_or_inf() +
           seq::tail_abs_sum(w_->tail_shift(), T).hi_or_inf();
}

double BlockPairTail::center_dev_term(int T) const {
    if (same_tail) return 0.0;
    if (diff_exact_) return diff_abs_.term_abs_bound_beyond(T);
    return q_->tail_shift().term_abs_bound_beyond(T) + w_->tail_shift().term_abs_bound_beyond(T);
}

double BlockPairTail::width_dev_sum(int T) const {
    double s = seq::tail_abs_sum(q_->tail_delta(), T).hi_or_inf();
    if (!same_tail) s += seq::tail_abs_sum(w_->tail_delta(), T).hi_or_inf();
    return s;
}

double BlockPairTail::width_dev_term(int T) const {
    double e = q_->tail_delta().term_abs_bound_beyond(T);
    if (!same_tail) e += w_->tail_delta().term_abs_bound_beyond(T);
    return e;
}

cert::LogTail BlockPairTail::overlap_log_tail(int T) const {
    if (same_tail) return single_seq_log_tail(q_->tail_delta(), T);
    return cert::first_order_tail(width_dev_sum(T) + center_dev_sum(T),
                                  width_dev_term(T) + center_dev_term(T));
}

double edge_abs_bound(const Block& b, int T) {
    return b.tail_shift().term_abs_bound_beyond(T) +
           0.5 * (1.0 + b.tail_delta().term_abs_bound_beyond(T));
}

// ---------------------------------------------------------------------------
// Pairings
// ---------------------------------------------------------------------------

CertifiedValue measure(const Block& q, double eps) {
    const auto& delta = q.tail_delta();
    auto factor = [&](int k) -> std::complex<double> { return q.edge(k).length(); };
    auto tail = [&](int T) { return single_seq_log_tail(delta, T); };
    return cert::product(eps, q.prefix_len(), kTmaxDefault, factor, kOverlapFactorErr, tail);
}

namespace {

// Shared core for plain and phase-modulated block pairings: the factor for a
// modulated coordinate is the oscillatory overlap integral, elsewhere the
// plain overlap length. amp scales the final enclosure.
CertifiedValue pair_core(std::complex<double> amp, const std::vector<double>& freq_diff,
                         const Block& q, const Block& w, double eps) {
    const BlockPairTail tail(q, w);
    if (tail.divergent()) return CertifiedValue::exact_zero();

    const int start = std::max(tail.min_start(), static_cast<int>(freq_diff.size()));
    auto factor = [&](int k) -> std::complex<double> {
        const double theta =
            (k <= static_cast<int>(freq_diff.size())) ? freq_diff[static_cast<size_t>(k) - 1] : 0.0;
        return kernels::osc_kernel(q.edge(k), w.edge(k), theta);
    };
    auto log_tail = [&](int T) { return tail.overlap_log_tail(T); };
    const bool has_phase = !freq_diff.empty();
    CertifiedValue cv = cert::product(eps, start, kTmaxDefault, factor,
                                      has_phase ? kOscFactorErr : kOverlapFactorErr, log_tail);
    return cv.scaled(amp);
}

std::vector<double> freq_difference(const ModulatedBlock& f, const ModulatedBlock& g) {
    std::vector<double> out(std::max(f.freq.size(), g.freq.size()), 0.0);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = f.freq_at(static_cast<int>(i) + 1) - g.freq_at(static_cast<int>(i) + 1);
    while (!out.empty() && out.back() == 0.0) out.pop_back();
    return out;
}

} // namespace

CertifiedValue pair_plain(const Block& q, const Block& w, double eps) {
    return pair_core({1.0, 0.0}, {}, q, w, eps);
}

CertifiedValue pair_modulated(const ModulatedBlock& f, const Block& w, double eps) {
    std::vector<double> freq = f.freq;
    while (!freq.empty() && freq.back() == 0.0) freq.pop_back();
    return pair_core(f.amp, freq, f.block, w, eps);
}

CertifiedValue inner(const SimpleFn& f, const SimpleFn& g, double eps) {
    CertifiedValue acc;
    acc.mid = {0.0, 0.0};
    acc.rad = 0.0;
    const double term_eps = eps / std::max<size_t>(1, f.terms.size() * g.terms.size());
    for (const auto& ft : f.terms) {
        for (const auto& gt : g.terms) {
            const std::complex<double> amp = ft.amp * std::conj(gt.amp);
            CertifiedValue cv = pair_core(amp, freq_difference(ft, gt), ft.block, gt.block, term_eps);
            acc.mid += cv.mid;
            acc.rad += cv.rad;
            acc.trunc_index = std::max(acc.trunc_index, cv.trunc_index);
        }
    }
    return acc;
}

CertifiedValue norm_sq(const SimpleFn& f, double eps) {
    CertifiedValue acc;
    const size_t n = f.terms.size();
    const double term_eps = eps / std::max<size_t>(1, n * n);
    for (size_t i = 0; i < n; ++i) {
        const auto& ti = f.terms[i];
        // diagonal: |amp|^2 * measure-type pairing, real by construction
        CertifiedValue d = pair_core({std::norm(ti.amp), 0.0}, {}, ti.block, ti.block, term_eps);
        acc.mid += std::complex<double>(d.mid.real(), 0.0);
        acc.rad += d.rad;
        acc.trunc_index = std::max(acc.trunc_index, d.trunc_index);
        for (size_t j = i + 1; j < n; ++j) {
            const auto& tj = f.terms[j];
            CertifiedValue cv = pair_core(ti.amp * std::conj(tj.amp), freq_difference(ti, tj),
                                          ti.block, tj.block, term_eps);
            // the (j, i) pairing is the exact conjugate; fold both at once
            acc.mid += std::complex<double>(2.0 * cv.mid.real(), 0.0);
            acc.rad += 2.0 * cv.rad;
            acc.trunc_index = std::max(acc.trunc_index, cv.trunc_index);
        }
    }
    if (std::fabs(acc.mid.imag()) <= 1e-12 * acc.rad) acc.mid = {acc.mid.real(), 0.0};
    return acc;
}

} // namespace weylwalk::blocks
