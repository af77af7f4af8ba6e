#include "weylwalk/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace weylwalk::operators {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535587989211986876373;
constexpr double kE = 2.71828182845904523536028747135266250;
constexpr int kTmaxOps = 1 << 17;
constexpr double kErfFactorErr = 6e-14;

std::string interval_str(const seq::TailSum& ts) {
    if (ts.infinite) return "sum = +inf";
    std::ostringstream os;
    os << "sum in [" << ts.value.lo << ", " << ts.value.hi << "]";
    return os.str();
}

} // namespace

DiagOp::DiagOp(seq::ParamSeq e, std::string lbl) : eigs(std::move(e)), label(std::move(lbl)) {
    if (!eigs.nonnegative())
        throw std::invalid_argument("operators: diagonal operator must be nonnegative");
    nuclear = !seq::tail_abs_sum(eigs, 0).infinite;
    sqrt_nuclear = !seq::tail_abs_sum(seq::pow_seq(eigs, 0.5), 0).infinite;
}

double dot(const FiniteVec& a, const FiniteVec& b) {
    double s = 0.0;
    for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) s += a[i] * b[i];
    return s;
}

SimpleFn apply_shift(const SimpleFn& f, double t, const seq::ParamSeq& h) {
    SimpleFn out;
    out.terms.reserve(f.terms.size());
    for (const auto& term : f.terms) {
        double phase = 0.0;
        for (size_t i = 0; i < term.freq.size(); ++i)
            phase -= t * term.freq[i] * h.term(static_cast<int>(i) + 1);
        out.terms.push_back(
            ModulatedBlock{term.amp * std::polar(1.0, phase), term.freq, term.block.shifted(t, h)});
    }
    return out;
}

SimpleFn apply_mom_shift(const SimpleFn& f, double t, const FiniteVec& a) {
    SimpleFn out;
    out.terms.reserve(f.terms.size());
    for (const auto& term : f.terms) {
        ModulatedBlock mb = term;
        if (mb.freq.size() < a.size()) mb.freq.resize(a.size(), 0.0);
        for (size_t i = 0; i < a.size(); ++i) mb.freq[i] += t * a[i];
        out.terms.push_back(std::move(mb));
    }
    return out;
}

SimpleFn apply_weyl(const SimpleFn& f, const FiniteVec& h, const FiniteVec& a) {
    SimpleFn out = f;
    const std::complex<double> w = std::polar(1.0, 0.5 * dot(h, a));
    for (auto& term : out.terms) term.amp *= w;
    out = apply_mom_shift(out, 1.0, a);
    return apply_shift(out, 1.0, seq::ParamSeq::finite(std::vector<double>(h)));
}

// ---------------------------------------------------------------------------
// Averaging pairings
// ---------------------------------------------------------------------------

namespace {

// Product of heat or Gaussian-multiplier factors over block edges with
// certified tails. deriv/moment maps mark the finitely many coordinates
// paired through derivative or x-moment kernels.
struct OpPairing {
    const DiagOp& d;
    const Block& q;
    const Block& w;
    double time;

    blocks::BlockPairTail bt;
    seq::ParamSeq sqrt_eigs;

    OpPairing(const DiagOp& dd, const Block& qq, const Block& ww, double tt)
        : d(dd), q(qq), w(ww), time(tt), bt(qq, ww), sqrt_eigs(seq::pow_seq(dd.eigs, 0.5)) {
        if (!dd.nuclear) throw std::invalid_argument("operators: D must be nuclear");
        if (!(tt >= 0.0)) throw std::invalid_argument("operators: t must be >= 0");
    }

    // |heat factor - 1| <= block deviation + smearing loss 2 sigma_k
    // sqrt(2/pi), sigma_k = sqrt(t d_k)
    cert::LogTail heat_log_tail(int T) const {
        const double smear = 2.0 * kSqrt2OverPi * std::sqrt(time);
        const double u = bt.width_dev_sum(T) + bt.center_dev_sum(T) +
                         smear * seq::tail_abs_sum(sqrt_eigs, T).hi_or_inf();
        const double e = bt.width_dev_term(T) + bt.center_dev_term(T) +
                         smear * sqrt_eigs.term_abs_bound_beyond(T);
        return cert::first_order_tail(u, e);
    }

    // |multiplier factor - 1| <= block deviation + (t d_k / 2) xcap^2 (1+ew)
    cert::LogTail multiplier_log_tail(int T) const {
        const double xcap = std::max(blocks::edge_abs_bound(q, T), blocks::edge_abs_bound(w, T));
        const double ew =
            q.tail_delta().term_abs_bound_beyond(T) + w.tail_delta().term_abs_bound_beyond(T);
        const double scale = 0.5 * time * xcap * xcap * (1.0 + ew);
        const double u = bt.width_dev_sum(T) + bt.center_dev_sum(T) +
                         scale * seq::tail_abs_sum(d.eigs, T).hi_or_inf();
        const double e = bt.width_dev_term(T) + bt.center_dev_term(T) +
                         scale * d.eigs.term_abs_bound_beyond(T);
        return cert::first_order_tail(u, e);
    }

    // When sqrt(D) is not nuclear the heat product is exactly zero: beyond a
    // truncation with width deviations <= 1/4 and sigma_k <= 3/8, each
    // factor satisfies ln f_k <= width_dev_k - 0.3 sigma_k, and the sigma
    // series diverges while the width deviations stay summable.
    bool heat_product_vanishes() const {
        if (d.sqrt_nuclear || time == 0.0) return false;
        for (int T = std::max(bt.min_start(), 8); T <= (1 << 22); T *= 2) {
            const double ew = bt.width_dev_term(T);
            const double sigma = std::sqrt(time) * sqrt_eigs.term_abs_bound_beyond(T);
            if (ew <= 0.25 && sigma <= 0.375) return true;
        }
        return false;
    }
};

CertifiedValue heat_product(double s, const DiagOp& d, const Block& q, const Block& w,
                            const std::map<int, int>& deriv_orders, double eps) {
    if (s == 0.0 && deriv_orders.empty()) {
        if (!d.nuclear) throw std::invalid_argument("operators: D must be nuclear");
        return blocks::pair_plain(q, w, eps);
    }
    OpPairing op(d, q, w, s);
    if (op.heat_product_vanishes()) return CertifiedValue::exact_zero();
    if (op.bt.divergent()) return CertifiedValue::exact_zero();

    int start = op.bt.min_start();
    if (!deriv_orders.empty()) start = std::max(start, deriv_orders.rbegin()->first);
    auto factor = [&](int k) -> std::complex<double> {
        const double v = s * d.eig(k);
        auto it = deriv_orders.find(k);
        if (it != deriv_orders.end() && it->second > 0)
            return kernels::heat_deriv_kernel(q.edge(k), w.edge(k), v, it->second);
        return kernels::heat_pair_kernel(q.edge(k), w.edge(k), v);
    };
    auto tail = [&](int T) { return op.heat_log_tail(T); };
    return cert::product(eps, start, kTmaxOps, factor, kErfFactorErr, tail);
}

CertifiedValue multiplier_product(double s, const DiagOp& d, const Block& q, const Block& w,
                                  const std::map<int, int>& moments, double eps) {
    OpPairing op(d, q, w, s);
    if (op.bt.divergent()) return CertifiedValue::exact_zero();

    int start = op.bt.min_start();
    if (!moments.empty()) start = std::max(start, moments.rbegin()->first);
    auto factor = [&](int k) -> std::complex<double> {
        const double u = s * d.eig(k);
        auto it = moments.find(k);
        const int m = it == moments.end() ? 0 : it->second;
        return kernels::multiplier_kernel(q.edge(k), w.edge(k), u, m);
    };
    auto tail = [&](int T) { return op.multiplier_log_tail(T); };
    return cert::product(eps, start, kTmaxOps, factor, kErfFactorErr, tail);
}

} // namespace

CertifiedValue pair_U(double t, const DiagOp& d, const Block& q, const Block& w, double eps) {
    return heat_product(t, d, q, w, {}, eps);
}

CertifiedValue pair_Uhat(double t, const DiagOp& d, const Block& q, const Block& w, double eps) {
    if (t == 0.0) {
        if (!d.nuclear) throw std::invalid_argument("operators: D must be nuclear");
        return blocks::pair_plain(q, w, eps);
    }
    return multiplier_product(t, d, q, w, {}, eps);
}

CertifiedValue pair_Fn(int n, const Block& q, const Block& w, double eps) {
    if (n < 0) throw std::invalid_argument("operators: pair_Fn needs n >= 0");
    if (n == 0) return blocks::pair_plain(q, w, eps);
    blocks::BlockPairTail bt(q, w);
    if (bt.divergent()) return CertifiedValue::exact_zero();

    auto factor = [&](int k) -> std::complex<double> {
        if (k <= n) return kernels::fourier_pair_kernel(q.edge(k), w.edge(k));
        return kernels::overlap_kernel(q.edge(k), w.edge(k));
    };
    auto tail = [&](int T) { return bt.overlap_log_tail(T); };
    return cert::product(eps, std::max(n, bt.min_start()), kTmaxOps, factor, 5e-12, tail);
}

// ---------------------------------------------------------------------------
// Taylor engines
// ---------------------------------------------------------------------------

namespace {

std::vector<int> active_coords(const FiniteVec& h) {
    std::vector<int> idx;
    for (size_t i = 0; i < h.size(); ++i)
        if (h[i] != 0.0) idx.push_back(static_cast<int>(i) + 1);
    return idx;
}

void enumerate_multi(const std::vector<int>& coords, int order, size_t pos, std::map<int, int>& cur,
                     const std::function<void(const std::map<int, int>&)>& visit) {
    if (pos == coords.size()) {
        if (order == 0) visit(cur);
        return;
    }
    for (int take = 0; take <= order; ++take) {
        if (take > 0)
            cur[coords[pos]] = take;
        else
            cur.erase(coords[pos]);
        enumerate_multi(coords, order - take, pos + 1, cur, visit);
    }
    cur.erase(coords[pos]);
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

using TermProduct = std::function<CertifiedValue(const std::map<int, int>&, double)>;

// sum_{k<=n} coeff(k) sum_{|alpha|=k} (prod_m weights_m^alpha_m / alpha_m!)
// * term(alpha)
CertifiedValue taylor_driver(const FiniteVec& weights, int n,
                             const std::function<std::complex<double>(int)>& order_coeff,
                             const TermProduct& term, double eps) {
    if (n < 0 || n > 4) throw std::invalid_argument("operators: taylor order must be 0..4");
    const std::vector<int> coords = active_coords(weights);
    if (coords.size() > 4)
        throw std::invalid_argument("operators: at most 4 active coordinates supported");

    CertifiedValue acc;
    for (int k = 0; k <= n; ++k) {
        const std::complex<double> ck = order_coeff(k);
        std::map<int, int> cur;
        enumerate_multi(coords, k, 0, cur, [&](const std::map<int, int>& alpha) {
            double wprod = 1.0, fct = 1.0;
            for (const auto& [coord, m] : alpha) {
                wprod *= std::pow(weights[static_cast<size_t>(coord) - 1], m);
                fct *= factorial(m);
            }
            const std::complex<double> scale = ck * wprod / fct;
            if (scale == std::complex<double>(0.0, 0.0)) return;
            const CertifiedValue piece = term(alpha, eps);
            acc.mid += piece.mid * scale;
            acc.rad += piece.rad * std::abs(scale);
            acc.trunc_index = std::max(acc.trunc_index, piece.trunc_index);
        });
    }
    return acc;
}

} // namespace

CertifiedValue taylor_sum(double s, const DiagOp& d, const Block& q, const Block& w,
                          const FiniteVec& h, double t, int n, double eps) {
    if (!(s > 0.0)) throw std::invalid_argument("operators: taylor_sum needs s > 0");
    // expansion of <S_{th} U_{sD} chi_Q, chi_W> under S_h f(x) = f(x-h):
    // f(x - th) = sum_alpha ((-t)^|alpha| / alpha!) h^alpha d^alpha f(x);
    // the per-multi-index weight already carries the 1/alpha! factor
    auto coeff = [&](int k) { return std::complex<double>(std::pow(-t, k), 0.0); };
    auto term = [&](const std::map<int, int>& alpha, double piece_eps) {
        return heat_product(s, d, q, w, alpha, piece_eps);
    };
    return taylor_driver(h, n, coeff, term, eps);
}

CertifiedValue mom_taylor_sum(double s, const DiagOp& d, const Block& q, const Block& w,
                              const FiniteVec& a, double t, int n, double eps) {
    if (!(s > 0.0)) throw std::invalid_argument("operators: mom_taylor_sum needs s > 0");
    // <Shat_{ta} Uhat_{sD} chi_Q, chi_W>: exp(it(a,x)) expands to
    // sum_alpha ((it)^|alpha| / alpha!) a^alpha x^alpha
    auto coeff = [&](int k) {
        std::complex<double> ik(1.0, 0.0);
        for (int i = 0; i < k % 4; ++i) ik *= std::complex<double>(0.0, 1.0);
        return ik * std::complex<double>(std::pow(t, k), 0.0);
    };
    auto term = [&](const std::map<int, int>& alpha, double piece_eps) {
        return multiplier_product(s, d, q, w, alpha, piece_eps);
    };
    return taylor_driver(a, n, coeff, term, eps);
}

double taylor_remainder_bound(double s, const DiagOp& d, const seq::ParamSeq& h, double t, int n,
                              double u_norm) {
    const seq::ParamSeq weighted = seq::ratio_seq(h.abs(), seq::pow_seq(d.eigs, 0.5));
    const auto norm1 = seq::tail_abs_sum(weighted, 0);
    if (norm1.infinite) throw std::invalid_argument("operators: D^{-1/2} h is not summable");
    return std::pow(std::fabs(t), n + 1) / (std::pow(s, 0.5 * (n + 1)) * factorial(n + 1)) *
           std::pow(norm1.value.hi, n + 1) * u_norm;
}

// ---------------------------------------------------------------------------
// Bound checks and hypothesis report
// ---------------------------------------------------------------------------

BoundCheck bound_check_xexp(double t, const DiagOp& d, int j, const Block& q, double eps) {
    if (!(d.eig(j) > 0.0)) throw std::invalid_argument("operators: d_j must be > 0");
    // ||x_j Uhat_{tD} chi_Q||^2 = <x_j^2 exp(-t (Dx,x)) chi_Q, chi_Q>
    CertifiedValue sq = multiplier_product(2.0 * t, d, q, q, {{j, 2}}, eps);
    const double lhs = std::sqrt(std::max(0.0, sq.mid.real() + sq.rad));
    CertifiedValue m = blocks::measure(q, eps);
    const double rhs = std::sqrt(std::max(0.0, m.mid.real() + m.rad)) / std::sqrt(kE * t * d.eig(j));
    return {lhs, rhs};
}

BoundCheck bound_check_trace(double t, const DiagOp& d, const DiagOp& b, const Block& q,
                             double eps) {
    // lhs^2 = sum_{j,k} d_j d_k <x_j^2 x_k^2 exp(-2t(Bx,x)) chi_Q, chi_Q>
    const seq::ParamSeq ratio = seq::ratio_seq(d.eigs, b.eigs);
    const auto trace = seq::tail_abs_sum(ratio, 0);
    if (trace.infinite) throw std::invalid_argument("operators: D B^{-1} must be nuclear");

    const int J = 48;
    double lhs_sq = 0.0, rad = 0.0;
    for (int j = 1; j <= J; ++j) {
        if (d.eig(j) == 0.0) continue;
        for (int k = 1; k <= J; ++k) {
            if (d.eig(k) == 0.0) continue;
            std::map<int, int> moments;
            moments[j] += 2;
            moments[k] += 2;
            CertifiedValue term = multiplier_product(2.0 * t, b, q, q, moments, eps);
            lhs_sq += d.eig(j) * d.eig(k) * term.mid.real();
            rad += d.eig(j) * d.eig(k) * term.rad;
        }
    }
    // indices beyond J: x^2 exp(-2 t b x^2) <= 1/(2 e t b) per coordinate,
    // so the remaining mass is controlled by the D B^{-1} tail
    const double full = trace.value.hi / (2.0 * kE * t);
    const double rest = seq::tail_abs_sum(ratio, J).value.hi / (2.0 * kE * t);
    const double msr = blocks::measure(q, eps).mid.real();
    rad += (2.0 * full * rest + rest * rest) * (msr + 1.0);

    const double lhs = std::sqrt(std::max(0.0, lhs_sq + rad));
    const double rhs = trace.value.hi / (kE * t) * std::sqrt(std::max(msr, 0.0) + 1e-15);
    return {lhs, rhs};
}

bool HypothesisReport::all_pass() const {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return true;
}

std::string HypothesisReport::first_failure() const {
    for (const auto& e : entries)
        if (!e.pass) return e.name;
    return {};
}

HypothesisReport hypothesis_check(const DiagOp& dx, const DiagOp& dp, const DiagOp& b,
                                  DistMoment dist) {
    HypothesisReport rep;
    auto add_tail = [&](const std::string& name, const seq::ParamSeq& s) {
        const auto ts = seq::tail_abs_sum(s, 0);
        rep.entries.push_back({name, !ts.infinite, interval_str(ts)});
    };
    auto add_ratio = [&](const std::string& name, const seq::ParamSeq& num,
                         const seq::ParamSeq& den, bool take_sqrt) {
        try {
            seq::ParamSeq r = seq::ratio_seq(num, den);
            if (take_sqrt) r = seq::pow_seq(r, 0.5);
            add_tail(name, r);
        } catch (const std::invalid_argument& ex) {
            rep.entries.push_back({name, false, std::string("not representable: ") + ex.what()});
        }
    };

    add_tail(dx.label + " nuclear", dx.eigs);
    add_tail(dx.label + "^{1/2} nuclear", seq::pow_seq(dx.eigs, 0.5));
    add_tail(dp.label + " nuclear", dp.eigs);
    add_tail(b.label + "^{1/2} nuclear", seq::pow_seq(b.eigs, 0.5));
    add_ratio(dx.label + " " + b.label + "^{-1} nuclear", dx.eigs, b.eigs, false);
    add_ratio(dp.label + " " + b.label + "^{-1} nuclear", dp.eigs, b.eigs, false);

    const char* which = dist == DistMoment::Gaussian     ? "Gaussian"
                        : dist == DistMoment::Rademacher ? "Rademacher"
                                                         : "Uniform";
    add_ratio(std::string("E||") + b.label + "^{-1/2} h||^3 finite (" + which + ")", dx.eigs,
              b.eigs, true);
    add_ratio(std::string("E||") + b.label + "^{-1/2} a||^3 finite (" + which + ")", dp.eigs,
              b.eigs, true);
    return rep;
}

} // namespace weylwalk::operators
