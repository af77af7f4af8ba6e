#ifndef WEYLWALK_WALKS_HPP
#define WEYLWALK_WALKS_HPP

#include <cstdint>
#include <vector>

#include "weylwalk/operators.hpp"
#include "weylwalk/rng.hpp"

namespace weylwalk::walks {

using blocks::Block;
using blocks::SimpleFn;
using operators::DiagOp;
using operators::FiniteVec;

enum class DistKind { GaussianDiag, RademacherDiag, UniformDiag };

/// Truncated random increment: exactly trunc_dim nonzero coordinates, each
/// with mean 0 and variance d_k.
struct IncrementDist {
    DistKind kind;
    DiagOp d;
    int trunc_dim;

    FiniteVec sample(rng::Stream& st) const;
    operators::DistMoment moment() const;
};

enum class WalkMode { Coordinate, Momentum, Alternating, PMix };

struct WalkSpec {
    WalkMode mode;
    double t;
    int m; // Chernoff steps
    IncrementDist dist_x;
    IncrementDist dist_p;
    double p_coin; // PMix probability of a coordinate step
    Block q;
    Block w;
};

struct Estimate {
    std::complex<double> mean{0.0, 0.0};
    double std_err = 0.0;
    long samples = 0;
    uint64_t seed = 0;
};

/// One sampled composition of m random step operators applied to chi_Q.
/// The result is a single modulated block; the norm equals measure(Q)
/// exactly.
SimpleFn sample_walk(const WalkSpec& spec, rng::Stream& st);

/// Monte-Carlo mean/std-error of <sample_walk, chi_W> over M walks,
/// deterministic in (spec, M, seed) and independent of thread count.
Estimate mc_pairing(const WalkSpec& spec, long M, uint64_t seed);

/// Exact expectation for Rademacher increments in coordinate or momentum
/// mode, collapsing the per-coordinate sign sums to binomial weights.
CertifiedValue enum_pairing(const WalkSpec& spec, double eps);

/// The Chernoff-limit pairing the walk converges to (heat, multiplier, or
/// Mehler factors on the truncated coordinates, plain overlaps beyond).
CertifiedValue target_pairing(const WalkSpec& spec, double eps);

/// Analytic bound on how much the untruncated-increment pairing can differ
/// from the trunc_dim-truncated one.
double truncation_bound(const WalkSpec& spec);

struct StudyRow {
    int m = 0;
    double gap = 0.0;
    double std_err = 0.0;
    std::complex<double> estimate{0.0, 0.0};
    std::complex<double> target{0.0, 0.0};
};

/// One row per m: |estimate - target| and the estimator error. M <= 0
/// selects exact enumeration (Rademacher specs only).
std::vector<StudyRow> convergence_study(WalkSpec spec, const std::vector<int>& m_list, long M,
                                        uint64_t seed);

} // namespace weylwalk::walks

#endif
