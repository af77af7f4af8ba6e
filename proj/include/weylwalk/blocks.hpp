#ifndef WEYLWALK_BLOCKS_HPP
#define WEYLWALK_BLOCKS_HPP

#include <complex>
#include <vector>

#include "weylwalk/certified.hpp"
#include "weylwalk/kernels.hpp"
#include "weylwalk/seq.hpp"

namespace weylwalk::blocks {

using kernels::Interval1D;

// Infinite-dimensional rectangle: explicitly listed edges for the first
// prefix_len coordinates, then parametric edges
//   [c_k - (1+delta_k)/2,  c_k + (1+delta_k)/2)
// with centers c_k from tail_shift and width perturbations delta_k from
// tail_delta. Construction validates width positivity and absolute
// measurability (finite l1 tail of delta).
class Block {
public:
    Block(std::vector<Interval1D> prefix, seq::ParamSeq tail_shift, seq::ParamSeq tail_delta);

    /// The block with every edge [-1/2, 1/2).
    static Block unit();

    Interval1D edge(int k) const;
    int prefix_len() const { return static_cast<int>(prefix_.size()); }
    const seq::ParamSeq& tail_shift() const { return tail_shift_; }
    const seq::ParamSeq& tail_delta() const { return tail_delta_; }

    /// True iff sum |width_k - 1| < infinity, i.e. the measure is positive.
    bool positive_measure() const;

    /// Every edge translated by t * h_k. The parametric tail absorbs t*h;
    /// throws if h's tail family cannot be combined with the current one.
    Block shifted(double t, const seq::ParamSeq& h) const;

    bool same_tail_as(const Block& other) const;

private:
    std::vector<Interval1D> prefix_;
    seq::ParamSeq tail_shift_;
    seq::ParamSeq tail_delta_;
};

/// amp * exp(i (freq, x)) * indicator(block); freq has finite support
/// (freq[i] is the frequency of coordinate i+1).
struct ModulatedBlock {
    std::complex<double> amp{1.0, 0.0};
    std::vector<double> freq;
    Block block;

    double freq_at(int k) const {
        return (k >= 1 && k <= static_cast<int>(freq.size())) ? freq[static_cast<size_t>(k) - 1]
                                                              : 0.0;
    }
};

/// Finite linear combination of modulated blocks.
struct SimpleFn {
    std::vector<ModulatedBlock> terms;

    static SimpleFn indicator(Block b) { return SimpleFn{{ModulatedBlock{{1.0, 0.0}, {}, std::move(b)}}}; }
};

/// Certified bookkeeping for the tails of a pairing of two blocks: l1
/// budgets for relative center offsets and width deviations beyond a
/// truncation index, plus detection of certified divergence (pairing exactly
/// zero). Shared by the plain pairings here and the operator pairings.
class BlockPairTail {
public:
    BlockPairTail(const Block& q, const Block& w);

    /// Sum |center_W(k) - center_Q(k)| over k > T diverges: the pairing is 0.
    bool divergent() const { return divergent_; }
    int min_start() const;

    double center_dev_sum(int T) const;
    double center_dev_term(int T) const;
    double width_dev_sum(int T) const;
    double width_dev_term(int T) const;

    /// Log-tail enclosure for plain overlap factors beyond T.
    cert::LogTail overlap_log_tail(int T) const;

    bool same_tail = false;

private:
    const Block* q_;
    const Block* w_;
    bool diff_exact_ = false;
    seq::ParamSeq diff_abs_;
    bool divergent_ = false;
};

/// sup over k > T of max(|lo|, |hi|) of the parametric edges.
double edge_abs_bound(const Block& b, int T);

/// Enclosure of the product of edge lengths (the block's measure).
CertifiedValue measure(const Block& q, double eps);

/// Enclosure of <chi_Q, chi_W> = prod_k |edge_k(Q) ∩ edge_k(W)|. Exact zero
/// when a factor vanishes or the deviation series certifiably diverges.
CertifiedValue pair_plain(const Block& q, const Block& w, double eps);

/// Enclosure of <f, chi_W> for a single phase-modulated block.
CertifiedValue pair_modulated(const ModulatedBlock& f, const Block& w, double eps);

/// Sesquilinear pairing <f, g>, conjugate-linear in g.
CertifiedValue inner(const SimpleFn& f, const SimpleFn& g, double eps);

/// <f, f> with the (numerically exact) imaginary part clamped to zero.
CertifiedValue norm_sq(const SimpleFn& f, double eps);

} // namespace weylwalk::blocks

#endif
