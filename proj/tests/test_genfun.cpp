// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <bpve/genfun.hpp>

namespace {

using bpve::Count;
using bpve::OffspringLaw;
using bpve::ParamFunction;
using bpve::Schedule;

// Smallest fixed point of a pgf by bisection on Phi(q) - q over [0, 1 - 1e-9].
double smallest_fixed_point(OffspringLaw const& law)
{
    double lo = 0.0;
    double hi = 1.0 - 1e-9;
    if (law.pgf(hi) - hi >= 0.0) {
        return 1.0;
    }
    for (int i = 0; i < 200; ++i) {
        double const mid = 0.5 * (lo + hi);
        (law.pgf(mid) - mid > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

OffspringLaw random_law(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> support(1, 8);
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    int const top = support(rng);
    std::vector<double> w(top + 1);
    double total = 0.0;
    for (auto& x : w) {
        x = weight(rng);
        total += x;
    }
    std::vector<std::pair<Count, double>> pmf;
    double acc = 0.0;
    for (int i = 0; i < top; ++i) {
        pmf.emplace_back(i, w[i] / total);
        acc += w[i] / total;
    }
    pmf.emplace_back(top, 1.0 - acc);
    return OffspringLaw::explicit_pmf(pmf);
}

Schedule squares()
{
    return Schedule::geometric(ParamFunction::power(1.0, 2.0, 1.0));
}

TEST(ExtinctionCurve, UnitOffspringNeverDies)
{
    auto const c = bpve::extinction_curve(Schedule::constant(OffspringLaw::explicit_pmf({{1, 1.0}})), 50);
    EXPECT_EQ(c.values.front(), 0.0);
    EXPECT_EQ(c.gap, 0.0);
}

TEST(ExtinctionCurve, ConvergesToSmallestFixedPoint)
{
    auto const law = OffspringLaw::explicit_pmf({{0, 0.25}, {2, 0.75}});
    double const oracle = smallest_fixed_point(law);
    EXPECT_NEAR(oracle, 1.0 / 3.0, 1e-9);
    auto const c = bpve::extinction_curve(Schedule::constant(law), 200);
    EXPECT_NEAR(c.values.front(), oracle, 1e-6);
    EXPECT_LE(c.values.front(), oracle + 1e-15);
}

TEST(ExtinctionCurve, BernoulliProductOracle)
{
    auto const s = Schedule::bernoulli_failure(ParamFunction::power(1.0, -2.0, 2.0));
    for (std::size_t n : {10u, 100u, 1000u}) {
        double survive = 1.0;
        for (std::size_t k = 2; k <= n + 1; ++k) {
            survive *= 1.0 - 1.0 / static_cast<double>(k * k);
        }
        EXPECT_NEAR(bpve::extinction_curve(s, n).values.front(), 1.0 - survive, 1e-12) << n;
    }
}

TEST(ExtinctionCurve, BackwardRecursionIdentity)
{
    auto const s = squares();
    auto const c = bpve::extinction_curve(s, 300);
    EXPECT_EQ(c.values.back(), 0.0);
    for (std::size_t j = 0; j < 300; ++j) {
        ASSERT_EQ(c.values[j], s.law(j).pgf(c.values[j + 1]));
        ASSERT_GE(c.values[j], 0.0);
        ASSERT_LT(c.values[j], 1.0);
    }
}

TEST(ExtinctionCurve, NondecreasingInHorizon)
{
    auto const s = Schedule::constant(OffspringLaw::poisson(1.3));
    double prev = 0.0;
    for (std::size_t n = 1; n < 200; n += 7) {
        double const e = bpve::extinction_curve(s, n).values.front();
        ASSERT_GE(e, prev);
        prev = e;
    }
}

TEST(ExtinctionCurve, PgfDominationOrdersExtinction)
{
    std::mt19937_64 rng{17};
    for (int trial = 0; trial < 200; ++trial) {
        OffspringLaw const a = random_law(rng);
        // Moving mass from i to i+1 makes the pgf pointwise smaller.
        auto const& pmf = std::get<OffspringLaw::Explicit>(a.variant()).pmf;
        std::vector<std::pair<Count, double>> shifted;
        double carry = 0.0;
        for (auto const& [i, r] : pmf) {
            shifted.emplace_back(i, 0.5 * r + carry);
            carry = 0.5 * r;
        }
        shifted.emplace_back(pmf.back().first + 1, carry);
        OffspringLaw const b = OffspringLaw::explicit_pmf(shifted);
        for (int g = 0; g <= 100; ++g) {
            ASSERT_GE(a.pgf(g / 100.0), b.pgf(g / 100.0) - 1e-15);
        }
        for (std::size_t n : {1u, 5u, 50u}) {
            ASSERT_GE(bpve::extinction_curve(Schedule::constant(a), n).values.front(),
                      bpve::extinction_curve(Schedule::constant(b), n).values.front() - 1e-15);
        }
    }
}

TEST(Agresti, DominatesPgf)
{
    std::mt19937_64 rng{99};
    std::vector<OffspringLaw> laws;
    for (int i = 0; i < 1000; ++i) {
        laws.push_back(random_law(rng));
    }
    laws.push_back(OffspringLaw::geometric(3.0));
    laws.push_back(OffspringLaw::poisson(0.4));
    laws.push_back(OffspringLaw::binomial(9, 0.2));
    double worst = 0.0;
    for (auto const& law : laws) {
        auto const f = bpve::agresti_bound(law);
        EXPECT_NEAR(bpve::agresti_eval(f, 1.0), 1.0, 1e-15);
        for (int g = 0; g < 100; ++g) {
            double const x = g / 99.0;
            worst = std::max(worst, law.pgf(x) - bpve::agresti_eval(f, x));
        }
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Agresti, Examples)
{
    double const m = 1.7;
    auto const g = bpve::agresti_bound(OffspringLaw::geometric(m));
    EXPECT_NEAR(g.c, 2.0 * m / (2.0 * m + 1.0), 1e-14);
    auto const law = OffspringLaw::explicit_pmf({{0, 0.5}, {3, 0.5}});
    EXPECT_NEAR(law.pgf(0.9), 0.8645, 1e-12);
    EXPECT_GE(bpve::agresti_eval(bpve::agresti_bound(law), 0.9), 0.8645);
}

TEST(Agresti, XiRepresentation)
{
    auto const law = OffspringLaw::poisson(2.5);
    auto const f = bpve::agresti_bound(law);
    for (double x : {0.0, 0.2, 0.5, 0.9}) {
        EXPECT_NEAR(bpve::agresti_eval(f, x), 1.0 - 1.0 / bpve::xi(law, 1.0 / (1.0 - x)), 1e-13);
    }
}

TEST(Beta, LengthZeroIsSecondRatio)
{
    auto const s = squares();
    auto const b = bpve::beta_sequence(s, 4, 0);
    auto const law = s.law(4);
    EXPECT_NEAR(b.beta.front(), law.second_moment() / (law.mean() * law.mean()), 1e-13);
}

TEST(Beta, ConstantLawGeometricSeries)
{
    auto const s = Schedule::constant(OffspringLaw::poisson(2.0));
    auto const b = bpve::beta_sequence(s, 0, 60);
    for (std::size_t l = 0; l <= 60; ++l) {
        EXPECT_NEAR(b.beta[l], 2.0 - std::ldexp(1.0, -static_cast<int>(l) - 1), 1e-13);
    }
}

TEST(Beta, MatchesDirectSums)
{
    auto const s = squares();
    auto const b = bpve::beta_sequence(s, 0, 30);
    double prod = 1.0;  // prod_{i<j} m_i
    double sum = 0.0;
    for (std::size_t j = 0; j <= 30; ++j) {
        auto const law = s.law(j);
        double const m = law.mean();
        sum += (law.second_moment() - m) / m / (prod * m);
        prod *= m;
        EXPECT_NEAR(b.partial_sums[j], sum, 1e-13 * sum);
        EXPECT_NEAR(b.beta[j], sum + 1.0 / prod, 1e-13 * (sum + 1.0 / prod));
    }
}

TEST(Beta, MonotoneAndAboveSums)
{
    for (auto const& s : {squares(), Schedule::constant(OffspringLaw::geometric(0.8)),
                          Schedule::bernoulli_failure(ParamFunction::power(1.0, -1.0, 2.0))}) {
        auto const b = bpve::beta_sequence(s, 3, 400);
        for (std::size_t t = 0; t < b.beta.size(); ++t) {
            ASSERT_GE(b.beta[t], b.partial_sums[t]);
            if (t > 0) {
                ASSERT_GE(b.beta[t], b.beta[t - 1] * (1.0 - 1e-15));
                ASSERT_GE(b.partial_sums[t], b.partial_sums[t - 1]);
            }
        }
    }
}

TEST(Beta, DoublyExponentialProductsStayInLogSpace)
{
    auto const s = Schedule::geometric(ParamFunction::doubling(3.0));
    // prod_{i<=10} k_i = 3^1024 is beyond the double range
    auto const b = bpve::beta_sequence(s, 0, 10);
    EXPECT_NEAR(b.log_product.back(), 1024.0 * std::log(3.0), 1e-9);
}

TEST(Certificate, SquaresIsValid)
{
    auto const s = squares();
    auto const cert = bpve::build_survival_certificate(s, 0);
    EXPECT_TRUE(cert.valid);
    EXPECT_EQ(cert.horizon, 200u);
    EXPECT_GE(cert.worst_slack(), 0.0);
    auto const check = bpve::verify_certificate(s, cert);
    EXPECT_TRUE(check.ok);
    EXPECT_NEAR(check.worst_slack, cert.worst_slack(), 1e-15);
    for (std::size_t t = 0; t < cert.b.size(); ++t) {
        auto const law = s.law(t);
        EXPECT_GE(cert.b[t], std::exp(law.log_second_ratio()) * (1.0 - 1e-15));
        EXPECT_GE(cert.b[t], 1.0);
        if (t + 1 < cert.b.size()) {
            EXPECT_NEAR(bpve::xi(law, cert.b[t + 1]), cert.b[t], 1e-12 * cert.b[t]);
        }
    }
}

TEST(Certificate, SubcriticalIsInvalid)
{
    auto const s = Schedule::constant(OffspringLaw::geometric(0.9));
    auto const cert = bpve::build_survival_certificate(s, 0);
    EXPECT_FALSE(cert.valid);
    EXPECT_GT(cert.q.front(), 0.999);
}

TEST(Certificate, DominatesTrueExtinction)
{
    auto const law = OffspringLaw::explicit_pmf({{0, 0.25}, {2, 0.75}});
    auto const s = Schedule::constant(law);
    auto const cert = bpve::build_survival_certificate(s, 0);
    ASSERT_TRUE(cert.valid);
    EXPECT_GE(cert.q.front(), smallest_fixed_point(law));
}

TEST(Certificate, DominatesExtinctionCurves)
{
    for (auto const& s : {squares(), Schedule::constant(OffspringLaw::explicit_pmf({{0, 0.25}, {2, 0.75}})),
                          Schedule::constant(OffspringLaw::poisson(1.4))}) {
        auto const cert = bpve::build_survival_certificate(s, 0, 0, 1e-10);
        if (!cert.valid) {
            continue;
        }
        // q_K >= rho_K(0) by Cauchy-Schwarz, so the bound holds for N <= K + 1
        for (std::size_t n : {std::size_t{10}, std::size_t{100}, cert.horizon + 1}) {
            auto const c = bpve::extinction_curve(s, n);
            for (std::size_t j = 0; j <= std::min(n, cert.horizon); ++j) {
                ASSERT_GE(cert.q[j], c.values[j] - 1e-12) << "N = " << n << " j = " << j;
            }
        }
    }
}

TEST(Certificate, HandBuiltCertificatesAreChecked)
{
    auto const s = Schedule::constant(OffspringLaw::explicit_pmf({{0, 0.5}, {2, 0.5}}));
    bpve::SurvivalCertificate half;
    half.n0 = 0;
    half.horizon = 5;
    half.q.assign(6, 0.5);
    auto const a = bpve::verify_certificate(s, half);
    EXPECT_FALSE(a.ok);
    EXPECT_NEAR(a.worst_slack, 0.5 - 0.625, 1e-15);

    bpve::SurvivalCertificate ones;
    ones.n0 = 0;
    ones.horizon = 5;
    ones.q.assign(6, 1.0);
    EXPECT_FALSE(bpve::verify_certificate(s, ones).ok);
}

}  // namespace
