#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "weylwalk/operators.hpp"

using namespace weylwalk;
using blocks::Block;
using blocks::SimpleFn;
using operators::DiagOp;
using operators::FiniteVec;
using seq::ParamSeq;

namespace {

std::mt19937_64 g_rng(23);
double urand(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(g_rng);
}

const Block kPi0 = Block::unit();

bool same_blocks(const Block& a, const Block& b, int upto = 12) {
    for (int k = 1; k <= upto; ++k) {
        if (std::fabs(a.edge(k).lo - b.edge(k).lo) > 1e-12) return false;
        if (std::fabs(a.edge(k).hi - b.edge(k).hi) > 1e-12) return false;
    }
    return true;
}

} // namespace

TEST_CASE("diag op flags") {
    CHECK(DiagOp(ParamSeq::geometric(0.1, 0.25)).nuclear);
    CHECK(DiagOp(ParamSeq::geometric(0.1, 0.25)).sqrt_nuclear);
    const DiagOp slow(ParamSeq::power(0.1, 2.0));
    CHECK(slow.nuclear);
    CHECK(!slow.sqrt_nuclear);
    CHECK(DiagOp(ParamSeq::power(0.1, 4.0)).sqrt_nuclear);
    CHECK_THROWS_AS(DiagOp(ParamSeq::finite({-1.0})), std::invalid_argument);
}

TEST_CASE("shift operators on simple functions") {
    const SimpleFn chi = SimpleFn::indicator(kPi0);

    // t = 0 is the identity
    const SimpleFn id = operators::apply_shift(chi, 0.0, ParamSeq::finite({1.0}));
    CHECK(same_blocks(id.terms[0].block, kPi0));
    CHECK(id.terms[0].amp == std::complex<double>(1.0, 0.0));

    // group law, structurally
    const ParamSeq h = ParamSeq::geometric(0.7, 0.5);
    const SimpleFn two = operators::apply_shift(operators::apply_shift(chi, 0.3, h), 0.45, h);
    const SimpleFn one = operators::apply_shift(chi, 0.75, h);
    CHECK(same_blocks(two.terms[0].block, one.terms[0].block));

    // phase pickup on a modulated term: theta = pi e1, h = e1, t = 1
    SimpleFn mod = operators::apply_mom_shift(chi, 1.0, {oracles::kPi});
    const SimpleFn shifted = operators::apply_shift(mod, 1.0, ParamSeq::finite({1.0}));
    CHECK(shifted.terms[0].amp.real() == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::fabs(shifted.terms[0].amp.imag()) < 1e-14);

    // momentum shifts: unitary, additive in the frequency
    SimpleFn m1 = operators::apply_mom_shift(chi, 0.5, {1.0, -2.0});
    SimpleFn m2 = operators::apply_mom_shift(m1, 1.0, {0.25, 2.0});
    CHECK(m2.terms[0].freq[0] == doctest::Approx(0.75));
    CHECK(m2.terms[0].freq[1] == doctest::Approx(1.0));
    CHECK(blocks::norm_sq(m2, 1e-9).mid.real() ==
          doctest::Approx(blocks::norm_sq(chi, 1e-9).mid.real()).epsilon(1e-14));
}

TEST_CASE("weyl relations") {
    const SimpleFn chi = SimpleFn::indicator(kPi0);

    // degenerate cases
    {
        const SimpleFn w = operators::apply_weyl(chi, {0.25}, {});
        const SimpleFn s = operators::apply_shift(chi, 1.0, ParamSeq::finite({0.25}));
        CHECK(same_blocks(w.terms[0].block, s.terms[0].block));
        CHECK(std::abs(w.terms[0].amp - s.terms[0].amp) < 1e-15);
    }
    {
        const SimpleFn w = operators::apply_weyl(chi, {}, {0.7});
        const SimpleFn s = operators::apply_mom_shift(chi, 1.0, {0.7});
        CHECK(w.terms[0].freq == s.terms[0].freq);
        CHECK(std::abs(w.terms[0].amp - s.terms[0].amp) < 1e-15);
    }

    // CCR: W_{z1} W_{z2} = exp(i omega(z1, z2)) W_{z1+z2} with
    // omega = -(1/2)[(h1,a2) - (h2,a1)]
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t dim = 1 + g_rng() % 4;
        FiniteVec h1(dim), a1(dim), h2(dim), a2(dim);
        for (size_t i = 0; i < dim; ++i) {
            h1[i] = urand(-1, 1);
            a1[i] = urand(-3, 3);
            h2[i] = urand(-1, 1);
            a2[i] = urand(-3, 3);
        }
        const SimpleFn lhs = operators::apply_weyl(operators::apply_weyl(chi, h2, a2), h1, a1);
        FiniteVec hs(dim), as(dim);
        for (size_t i = 0; i < dim; ++i) {
            hs[i] = h1[i] + h2[i];
            as[i] = a1[i] + a2[i];
        }
        const double omega = -0.5 * (operators::dot(h1, a2) - operators::dot(h2, a1));
        SimpleFn rhs = operators::apply_weyl(chi, hs, as);
        for (auto& term : rhs.terms) term.amp *= std::polar(1.0, omega);

        REQUIRE(lhs.terms.size() == 1);
        CHECK(std::abs(lhs.terms[0].amp - rhs.terms[0].amp) <= 1e-12);
        CHECK(same_blocks(lhs.terms[0].block, rhs.terms[0].block));
        for (size_t i = 0; i < dim; ++i)
            CHECK(lhs.terms[0].freq[i] == doctest::Approx(rhs.terms[0].freq[i]).epsilon(1e-14));
    }
}

TEST_CASE("pair_U basics") {
    const DiagOp d1(ParamSeq::finite({0.1}));
    auto v = operators::pair_U(1.0, d1, kPi0, kPi0, 1e-10);
    CHECK(v.mid.real() ==
          doctest::Approx(kernels::heat_pair_kernel({-0.5, 0.5}, {-0.5, 0.5}, 0.1)).epsilon(1e-12));
    CHECK(v.mid.real() == doctest::Approx(0.749).epsilon(2e-3));

    // small-t limit approaches the plain pairing
    const DiagOp g(ParamSeq::geometric(0.2, 0.5));
    auto p0 = blocks::pair_plain(kPi0, kPi0, 1e-10);
    auto pt = operators::pair_U(1e-10, g, kPi0, kPi0, 1e-10);
    CHECK(std::abs(pt.mid - p0.mid) < 1e-4);

    // sqrt(D) not nuclear: exactly zero
    const DiagOp trivial(ParamSeq::power(0.1, 2.0));
    for (double t : {1.0, 0.25, 3.0}) {
        auto z = operators::pair_U(t, trivial, kPi0, kPi0, 1e-9);
        CHECK(z.is_exact_zero());
    }

    // sqrt-nuclear power spectrum stays positive
    const DiagOp fine(ParamSeq::power(0.1, 4.0));
    auto pos = operators::pair_U(1.0, fine, kPi0, kPi0, 1e-6);
    CHECK(pos.mid.real() > 0.1);
    CHECK(!pos.is_exact_zero());

    CHECK_THROWS_AS((void)operators::pair_U(1.0, DiagOp(ParamSeq::power(1.0, 0.5)), kPi0, kPi0,
                                            1e-9),
                    std::invalid_argument);
}

TEST_CASE("pair_Uhat basics and triviality contrast") {
    const DiagOp d1(ParamSeq::finite({1.0}));
    auto v = operators::pair_Uhat(1.0, d1, kPi0, kPi0, 1e-10);
    CHECK(v.mid.real() == doctest::Approx(0.9598504379).epsilon(1e-10));

    auto p0 = operators::pair_Uhat(1e-12, DiagOp(ParamSeq::geometric(0.3, 0.5)), kPi0, kPi0, 1e-10);
    CHECK(std::abs(p0.mid - std::complex<double>(1.0, 0.0)) < 1e-6);

    // the same D that kills pair_U leaves pair_Uhat strictly positive
    const DiagOp trivial(ParamSeq::power(0.1, 2.0));
    auto pos = operators::pair_Uhat(1.0, trivial, kPi0, kPi0, 1e-8);
    CHECK(pos.mid.real() > 0.5);

    // ||Uhat_{tD} chi - chi|| -> 0 as t -> 0 while pair_U stays 0
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1.0, 0.1, 0.01, 0.001}) {
        const double a = operators::pair_Uhat(2.0 * t, trivial, kPi0, kPi0, 1e-10).mid.real();
        const double b = operators::pair_Uhat(t, trivial, kPi0, kPi0, 1e-10).mid.real();
        const double dist = std::sqrt(std::max(0.0, a + 1.0 - 2.0 * b));
        CHECK(dist < prev);
        prev = dist;
        CHECK(operators::pair_U(t, trivial, kPi0, kPi0, 1e-9).is_exact_zero());
    }
    CHECK(prev < 0.05);
}

TEST_CASE("pairing self-adjointness") {
    const DiagOp d(ParamSeq::geometric(0.2, 0.5));
    for (int i = 0; i < 20; ++i) {
        std::vector<kernels::Interval1D> pf;
        const double lo = urand(-0.5, 0.0);
        pf.push_back({lo, lo + urand(0.5, 1.5)});
        const Block q(pf, ParamSeq::geometric(urand(-0.2, 0.2), 0.5),
                      ParamSeq::geometric(urand(-0.1, 0.3), 0.5));
        const Block w = kPi0;
        const double t = urand(0.05, 1.0);
        auto a = operators::pair_U(t, d, q, w, 1e-9);
        auto b = operators::pair_U(t, d, w, q, 1e-9);
        CHECK(std::abs(a.mid - b.mid) <= 1e-12 * (1.0 + std::abs(a.mid)));
        auto c = operators::pair_Uhat(t, d, q, w, 1e-9);
        auto e = operators::pair_Uhat(t, d, w, q, 1e-9);
        CHECK(std::abs(c.mid - e.mid) <= 1e-12 * (1.0 + std::abs(c.mid)));
    }
}

TEST_CASE("partial fourier pairing decays geometrically") {
    auto p0 = operators::pair_Fn(0, kPi0, kPi0, 1e-10);
    CHECK(p0.mid.real() == 1.0);

    auto p1 = operators::pair_Fn(1, kPi0, kPi0, 1e-10);
    CHECK(p1.mid.real() == doctest::Approx(0.39756).epsilon(2e-4));

    double prev = 1.0;
    const double c = p1.mid.real();
    for (int n = 1; n <= 10; ++n) {
        const double pn = std::abs(operators::pair_Fn(n, kPi0, kPi0, 1e-11).mid);
        CHECK(pn == doctest::Approx(prev * c).epsilon(1e-10));
        prev = pn;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("taylor expansion against the exact shifted pairing") {
    const DiagOp d(ParamSeq::finite({1.0, 0.64, 0.49, 0.25}));
    const double s = 1.0;
    const FiniteVec h{0.1, 0.08, 0.0, 0.02};
    const ParamSeq h_seq = ParamSeq::finite({0.1, 0.08, 0.0, 0.02});

    auto exact = [&](double t) {
        // S_{th} U_{sD} chi_Q = U_{sD} chi_{Q + th}
        return operators::pair_U(s, d, kPi0.shifted(t, h_seq), kPi0, 1e-12).mid;
    };

    // n = 0 reduces to pair_U; t = 0 reduces to the same for any n
    CHECK(std::abs(operators::taylor_sum(s, d, kPi0, kPi0, h, 0.7, 0, 1e-10).mid -
                   operators::pair_U(s, d, kPi0, kPi0, 1e-10).mid) < 1e-12);
    CHECK(std::abs(operators::taylor_sum(s, d, kPi0, kPi0, h, 0.0, 3, 1e-10).mid -
                   operators::pair_U(s, d, kPi0, kPi0, 1e-10).mid) < 1e-12);

    for (double t : {0.1, 0.5, 1.0}) {
        for (int n = 0; n <= 3; ++n) {
            const auto approx = operators::taylor_sum(s, d, kPi0, kPi0, h, t, n, 1e-12);
            const double rem = std::abs(exact(t) - approx.mid);
            const double bound = operators::taylor_remainder_bound(s, d, h_seq, t, n, 1.0);
            CHECK(rem <= bound + approx.rad + 1e-12);
        }
    }
}

TEST_CASE("taylor remainder bound closed form") {
    const DiagOp d(ParamSeq::finite({1.0}));
    const ParamSeq h = ParamSeq::finite({0.1});
    CHECK(operators::taylor_remainder_bound(1.0, d, h, 0.0, 2, 1.0) == 0.0);
    CHECK(operators::taylor_remainder_bound(1.0, d, h, 1.0, 2, 1.0) ==
          doctest::Approx(1.0 / 6.0 * 1e-3).epsilon(1e-12));
    // monotone in t, antitone in s
    double prev = 0.0;
    for (double t : {0.1, 0.2, 0.5, 1.0, 2.0}) {
        const double b = operators::taylor_remainder_bound(1.0, d, h, t, 2, 1.0);
        CHECK(b > prev);
        prev = b;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double s : {0.25, 0.5, 1.0, 2.0}) {
        const double b = operators::taylor_remainder_bound(s, d, h, 1.0, 2, 1.0);
        CHECK(b < prev);
        prev = b;
    }
    CHECK_THROWS_AS((void)operators::taylor_remainder_bound(
                        1.0, DiagOp(ParamSeq::power(0.1, 2.0)), ParamSeq::geometric(1.0, 0.9), 1.0,
                        2, 1.0),
                    std::invalid_argument);
}

TEST_CASE("momentum taylor expansion") {
    const DiagOp d(ParamSeq::finite({1.0, 0.64}));
    const double s = 1.0;
    const FiniteVec a{0.1, 0.05};
    const ParamSeq a_seq = ParamSeq::finite({0.1, 0.05});

    CHECK(std::abs(operators::mom_taylor_sum(s, d, kPi0, kPi0, a, 0.4, 0, 1e-10).mid -
                   operators::pair_Uhat(s, d, kPi0, kPi0, 1e-10).mid) < 1e-12);
    CHECK(std::abs(operators::mom_taylor_sum(s, d, kPi0, kPi0, a, 0.0, 3, 1e-10).mid -
                   operators::pair_Uhat(s, d, kPi0, kPi0, 1e-10).mid) < 1e-12);

    auto exact = [&](double t) {
        // <Shat_{ta} Uhat_{sD} chi, chi> = prod_k int exp(i t a_k x - s d_k x^2/2)
        std::complex<double> prod(1.0, 0.0);
        for (int k = 1; k <= 2; ++k) {
            const double ak = a[static_cast<size_t>(k) - 1], dk = d.eig(k);
            prod *= oracles::quad_complex(
                [&](double x) {
                    return std::polar(std::exp(-0.5 * s * dk * x * x), t * ak * x);
                },
                -0.5, 0.5, 1e-13);
        }
        return prod;
    };

    for (double t : {0.1, 0.5, 1.0}) {
        for (int n = 0; n <= 3; ++n) {
            const auto approx = operators::mom_taylor_sum(s, d, kPi0, kPi0, a, t, n, 1e-12);
            const double rem = std::abs(exact(t) - approx.mid);
            const double bound = operators::taylor_remainder_bound(s, d, a_seq, t, n, 1.0);
            CHECK(rem <= bound + approx.rad + 1e-10);
        }
    }
}

TEST_CASE("x-multiplication bound check") {
    const DiagOp d1(ParamSeq::finite({1.0}));
    auto bc = operators::bound_check_xexp(1.0, d1, 1, kPi0, 1e-10);
    const double lhs_oracle = std::sqrt(
        oracles::quad([](double x) { return x * x * std::exp(-x * x); }, -0.5, 0.5, 1e-13));
    CHECK(bc.lhs == doctest::Approx(lhs_oracle).epsilon(1e-7));
    CHECK(bc.rhs == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(bc.lhs <= bc.rhs);

    for (int i = 0; i < 200; ++i) {
        const double t = urand(0.05, 4.0), dj = urand(0.05, 4.0);
        auto r = operators::bound_check_xexp(t, DiagOp(ParamSeq::finite({dj})), 1, kPi0, 1e-9);
        CHECK(r.lhs <= r.rhs + 1e-12);
    }

    // dominated decay for large t
    auto late = operators::bound_check_xexp(1e4, d1, 1, kPi0, 1e-9);
    CHECK(late.lhs < 1e-2);
}

TEST_CASE("trace bound check") {
    const DiagOp d(ParamSeq::geometric(0.1, 0.25));
    const DiagOp b(ParamSeq::geometric(1.0, 0.5));
    for (double t : {0.5, 1.0, 2.0}) {
        auto r = operators::bound_check_trace(t, d, b, kPi0, 1e-9);
        CHECK(r.lhs <= r.rhs + 1e-12);
    }
}

TEST_CASE("hypothesis reports") {
    const DiagOp dx(ParamSeq::geometric(0.1, 0.25), "Dx");
    const DiagOp dp(ParamSeq::geometric(0.1, 0.25), "Dp");
    const DiagOp b(ParamSeq::geometric(1.0, 0.5), "B");
    const auto ok = operators::hypothesis_check(dx, dp, b, operators::DistMoment::Gaussian);
    CHECK(ok.all_pass());

    const DiagOp slow(ParamSeq::power(0.1, 2.0), "Dx");
    const auto bad = operators::hypothesis_check(slow, dp, b, operators::DistMoment::Gaussian);
    CHECK(!bad.all_pass());
    CHECK(bad.first_failure() == "Dx^{1/2} nuclear");

    // B = Dx makes D B^{-1} the identity sequence
    const auto ident = operators::hypothesis_check(dx, dp, DiagOp(dx.eigs, "B"),
                                                   operators::DistMoment::Gaussian);
    CHECK(!ident.all_pass());
    bool ratio_failed = false;
    for (const auto& e : ident.entries)
        if (e.name == "Dx B^{-1} nuclear" && !e.pass) ratio_failed = true;
    CHECK(ratio_failed);
}

TEST_CASE("shift isometry of the sesquilinear pairing") {
    // inner(S_h f, S_h g) = inner(f, g): the phases cancel exactly and the
    // overlap factors translate
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        SimpleFn f, g;
        f.terms.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}, kPi0});
        f.terms.push_back({{u(rng), u(rng)}, {u(rng)}, kPi0.shifted(0.3, ParamSeq::finite({u(rng)}))});
        g.terms.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}, kPi0.shifted(-0.2, ParamSeq::finite({u(rng)}))});
        const ParamSeq h = ParamSeq::finite({u(rng), u(rng), u(rng)});
        const double t = u(rng);
        auto before = blocks::inner(f, g, 1e-10);
        auto after = blocks::inner(operators::apply_shift(f, t, h), operators::apply_shift(g, t, h),
                                   1e-10);
        CHECK(std::abs(before.mid - after.mid) <= 1e-13 + before.rad + after.rad);
    }
}

TEST_CASE("taylor engine limits") {
    const DiagOp d(ParamSeq::finite({1.0, 1.0, 1.0, 1.0, 1.0}));
    const FiniteVec too_many{0.1, 0.1, 0.1, 0.1, 0.1};
    CHECK_THROWS_AS((void)operators::taylor_sum(1.0, d, kPi0, kPi0, too_many, 0.5, 2, 1e-9),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)operators::taylor_sum(1.0, d, kPi0, kPi0, {0.1}, 0.5, 5, 1e-9),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)operators::taylor_sum(0.0, d, kPi0, kPi0, {0.1}, 0.5, 2, 1e-9),
                    std::invalid_argument);
}
