#include "weylwalk/walks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace weylwalk::walks {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535587989211986876373;
constexpr int kTmaxWalk = 1 << 17;

void check_spec(const WalkSpec& spec) {
    if (!(spec.t > 0.0)) throw std::invalid_argument("walks: t must be > 0");
    if (spec.m < 1) throw std::invalid_argument("walks: m must be >= 1");
    if (spec.dist_x.trunc_dim < 0 || spec.dist_p.trunc_dim < 0)
        throw std::invalid_argument("walks: truncation dimension must be >= 0");
    if (spec.mode == WalkMode::PMix && !(spec.p_coin > 0.0 && spec.p_coin < 1.0))
        throw std::invalid_argument("walks: p must lie in (0,1)");
}

} // namespace

FiniteVec IncrementDist::sample(rng::Stream& st) const {
    FiniteVec out(static_cast<size_t>(trunc_dim), 0.0);
    for (int k = 1; k <= trunc_dim; ++k) {
        const double dk = d.eig(k);
        double v = 0.0;
        switch (kind) {
            case DistKind::GaussianDiag: v = std::sqrt(dk) * st.normal(); break;
            case DistKind::RademacherDiag: v = st.coin(0.5) ? std::sqrt(dk) : -std::sqrt(dk); break;
            case DistKind::UniformDiag: v = std::sqrt(3.0 * dk) * (2.0 * st.u01() - 1.0); break;
        }
        out[static_cast<size_t>(k) - 1] = v;
    }
    return out;
}

operators::DistMoment IncrementDist::moment() const {
    switch (kind) {
        case DistKind::GaussianDiag: return operators::DistMoment::Gaussian;
        case DistKind::RademacherDiag: return operators::DistMoment::Rademacher;
        default: return operators::DistMoment::Uniform;
    }
}

SimpleFn sample_walk(const WalkSpec& spec, rng::Stream& st) {
    check_spec(spec);
    const double step = std::sqrt(spec.t / spec.m);
    const int nx = spec.dist_x.trunc_dim, np = spec.dist_p.trunc_dim;
    const int n = std::max(nx, np);

    // run the step algebra on flat accumulators; the loop mirrors applying
    // Shat (freq += step a_i) then S (phase -= step (freq, h_i); block += step h_i)
    std::vector<double> shift(static_cast<size_t>(n), 0.0);
    std::vector<double> freq(static_cast<size_t>(n), 0.0);
    double phase = 0.0;

    for (int i = 0; i < spec.m; ++i) {
        bool do_momentum = false, do_coordinate = false;
        switch (spec.mode) {
            case WalkMode::Coordinate: do_coordinate = true; break;
            case WalkMode::Momentum: do_momentum = true; break;
            case WalkMode::Alternating: do_momentum = do_coordinate = true; break;
            case WalkMode::PMix:
                if (st.coin(spec.p_coin))
                    do_coordinate = true;
                else
                    do_momentum = true;
                break;
        }
        if (do_momentum) {
            const FiniteVec a = spec.dist_p.sample(st);
            for (size_t j = 0; j < a.size(); ++j) freq[j] += step * a[j];
        }
        if (do_coordinate) {
            const FiniteVec h = spec.dist_x.sample(st);
            for (size_t j = 0; j < h.size(); ++j) {
                phase -= step * freq[j] * h[j];
                shift[j] += step * h[j];
            }
        }
    }

    blocks::ModulatedBlock mb{std::polar(1.0, phase), std::move(freq),
                              spec.q.shifted(1.0, seq::ParamSeq::finite(std::move(shift)))};
    while (!mb.freq.empty() && mb.freq.back() == 0.0) mb.freq.pop_back();
    return SimpleFn{{std::move(mb)}};
}

namespace {

// index-ordered pairwise reduction: deterministic and thread-agnostic
std::complex<double> pairwise_sum(const std::vector<std::complex<double>>& v, size_t lo,
                                  size_t hi) {
    if (hi - lo == 1) return v[lo];
    const size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

double pairwise_sum_d(const std::vector<double>& v, size_t lo, size_t hi) {
    if (hi - lo == 1) return v[lo];
    const size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum_d(v, lo, mid) + pairwise_sum_d(v, mid, hi);
}

} // namespace

Estimate mc_pairing(const WalkSpec& spec, long M, uint64_t seed) {
    check_spec(spec);
    if (M < 2) throw std::invalid_argument("walks: need at least two samples");
    const blocks::SimpleFn target = SimpleFn::indicator(spec.w);

    std::vector<std::complex<double>> vals(static_cast<size_t>(M));
    const uint64_t stream_id = 0x77616c6bULL ^ (static_cast<uint64_t>(spec.m) << 32);

    auto worker = [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            rng::Stream st(seed, stream_id, static_cast<uint64_t>(i));
            const SimpleFn fn = sample_walk(spec, st);
            vals[static_cast<size_t>(i)] = blocks::inner(fn, target, 1e-9).mid;
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads = static_cast<unsigned>(std::min<long>(hw, std::max<long>(1, M / 4096)));
    if (n_threads <= 1) {
        worker(0, M);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (M + n_threads - 1) / n_threads;
        for (unsigned th = 0; th < n_threads; ++th) {
            const long lo = th * chunk, hi = std::min<long>(M, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    Estimate est;
    est.samples = M;
    est.seed = seed;
    est.mean = pairwise_sum(vals, 0, vals.size()) / static_cast<double>(M);
    std::vector<double> dev2(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) dev2[i] = std::norm(vals[i] - est.mean);
    const double var = pairwise_sum_d(dev2, 0, dev2.size()) / static_cast<double>(M - 1);
    est.std_err = std::sqrt(var / static_cast<double>(M));
    return est;
}

CertifiedValue enum_pairing(const WalkSpec& spec, double eps) {
    check_spec(spec);
    if (spec.mode != WalkMode::Coordinate && spec.mode != WalkMode::Momentum)
        throw std::invalid_argument("walks: exact enumeration needs coordinate or momentum mode");
    const IncrementDist& dist = spec.mode == WalkMode::Coordinate ? spec.dist_x : spec.dist_p;
    if (dist.kind != DistKind::RademacherDiag)
        throw std::invalid_argument("walks: exact enumeration needs Rademacher increments");
    const int n = dist.trunc_dim, m = spec.m;
    if (static_cast<long>(n) * (m + 1) > 10'000'000)
        throw std::invalid_argument("walks: enumeration state bound exceeded");

    // per-coordinate binomial collapse of the m sign choices
    std::vector<double> weights(static_cast<size_t>(m) + 1);
    weights[0] = std::pow(0.5, m);
    for (int j = 0; j < m; ++j)
        weights[static_cast<size_t>(j) + 1] = weights[static_cast<size_t>(j)] *
                                              static_cast<double>(m - j) / static_cast<double>(j + 1);

    const double step = std::sqrt(spec.t / m);
    blocks::BlockPairTail bt(spec.q, spec.w);
    if (bt.divergent()) return CertifiedValue::exact_zero();

    auto factor = [&](int k) -> std::complex<double> {
        if (k > n) return kernels::overlap_kernel(spec.q.edge(k), spec.w.edge(k));
        const double root = std::sqrt(dist.d.eig(k));
        std::complex<double> acc{0.0, 0.0};
        for (int j = 0; j <= m; ++j) {
            const double offset = step * root * (2.0 * j - m);
            if (spec.mode == WalkMode::Coordinate) {
                const kernels::Interval1D e = spec.q.edge(k);
                acc += weights[static_cast<size_t>(j)] *
                       kernels::overlap_kernel({e.lo + offset, e.hi + offset}, spec.w.edge(k));
            } else {
                acc += weights[static_cast<size_t>(j)] *
                       kernels::osc_kernel(spec.q.edge(k), spec.w.edge(k), offset);
            }
        }
        return acc;
    };
    auto tail = [&](int T) { return bt.overlap_log_tail(T); };
    return cert::product(eps, std::max(n, bt.min_start()), kTmaxWalk, factor, 1e-13, tail);
}

CertifiedValue target_pairing(const WalkSpec& spec, double eps) {
    check_spec(spec);
    auto truncated = [](const IncrementDist& dist) {
        std::vector<double> head;
        head.reserve(static_cast<size_t>(dist.trunc_dim));
        for (int k = 1; k <= dist.trunc_dim; ++k) head.push_back(dist.d.eig(k));
        return DiagOp(seq::ParamSeq::finite(std::move(head)), dist.d.label);
    };

    switch (spec.mode) {
        case WalkMode::Coordinate:
            return operators::pair_U(spec.t, truncated(spec.dist_x), spec.q, spec.w, eps);
        case WalkMode::Momentum:
            return operators::pair_Uhat(spec.t, truncated(spec.dist_p), spec.q, spec.w, eps);
        case WalkMode::Alternating:
        case WalkMode::PMix:
            break;
    }

    // oscillator / p-mix limit: Mehler factors with (scaled) coefficients
    const double cx = spec.mode == WalkMode::PMix ? spec.p_coin : 1.0;
    const double cp = spec.mode == WalkMode::PMix ? 1.0 - spec.p_coin : 1.0;
    const int n = std::max(spec.dist_x.trunc_dim, spec.dist_p.trunc_dim);
    blocks::BlockPairTail bt(spec.q, spec.w);
    if (bt.divergent()) return CertifiedValue::exact_zero();

    auto factor = [&](int k) -> std::complex<double> {
        if (k > n) return kernels::overlap_kernel(spec.q.edge(k), spec.w.edge(k));
        const double dx = k <= spec.dist_x.trunc_dim ? cx * spec.dist_x.d.eig(k) : 0.0;
        const double dp = k <= spec.dist_p.trunc_dim ? cp * spec.dist_p.d.eig(k) : 0.0;
        if (dx > 0.0 && dp > 0.0)
            return kernels::mehler_pair_kernel(spec.q.edge(k), spec.w.edge(k), dx, dp, spec.t);
        if (dx > 0.0) return kernels::heat_pair_kernel(spec.q.edge(k), spec.w.edge(k), spec.t * dx);
        return kernels::multiplier_kernel(spec.q.edge(k), spec.w.edge(k), spec.t * dp, 0);
    };
    auto tail = [&](int T) { return bt.overlap_log_tail(T); };
    return cert::product(eps, std::max(n, bt.min_start()), kTmaxWalk, factor, 1e-8, tail);
}

double truncation_bound(const WalkSpec& spec) {
    // smearing each un-sampled coordinate k > N by the full increment costs
    // at most 2 sqrt(2/pi) sqrt(t d_k) of pairing mass
    auto part = [&](const IncrementDist& dist) {
        const auto tail =
            seq::tail_abs_sum(seq::pow_seq(dist.d.eigs, 0.5), dist.trunc_dim);
        return 2.0 * kSqrt2OverPi * std::sqrt(spec.t) * tail.hi_or_inf();
    };
    double b = 0.0;
    if (spec.mode != WalkMode::Momentum) b += part(spec.dist_x);
    if (spec.mode != WalkMode::Coordinate) b += part(spec.dist_p);
    return std::expm1(b);
}

std::vector<StudyRow> convergence_study(WalkSpec spec, const std::vector<int>& m_list, long M,
                                        uint64_t seed) {
    if (m_list.empty()) throw std::invalid_argument("walks: m_list must be nonempty");
    std::vector<StudyRow> rows;
    rows.reserve(m_list.size());
    const CertifiedValue target = target_pairing(spec, 1e-9);
    for (int m : m_list) {
        spec.m = m;
        StudyRow row;
        row.m = m;
        row.target = target.mid;
        if (M > 0) {
            const Estimate est = mc_pairing(spec, M, seed);
            row.estimate = est.mean;
            row.std_err = est.std_err;
        } else {
            row.estimate = enum_pairing(spec, 1e-11).mid;
            row.std_err = 0.0;
        }
        row.gap = std::abs(row.estimate - row.target);
        rows.push_back(row);
    }
    return rows;
}

} // namespace weylwalk::walks
