// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include <bpve/rng.hpp>
#include <bpve/variates.hpp>

namespace {

using bpve::Philox4x32;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswers)
{
    EXPECT_EQ(Philox4x32::block({0, 0, 0, 0}, {0, 0}),
              (Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Stream, SameKeySameSequence)
{
    bpve::Stream a{42};
    bpve::Stream b{42};
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a.next_u64(), b.next_u64());
    }
    EXPECT_EQ(a.position(), 1000u);
}

TEST(Stream, UniformIsOpenInterval)
{
    bpve::Stream s{7};
    double sum = 0.0;
    int const n = 100000;
    for (int i = 0; i < n; ++i) {
        double const u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Stream, SplitKeysAreDistinct)
{
    bpve::Stream const root{123};
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        keys.insert(root.split(i).key());
    }
    EXPECT_EQ(keys.size(), 10000u);
    EXPECT_EQ(root.split(5).key(), bpve::derive_key(123, 5));
}

TEST(Stream, ReplicaStreamsDependOnSeedAndIndex)
{
    EXPECT_NE(bpve::replica_stream(1, 0).key(), bpve::replica_stream(1, 1).key());
    EXPECT_NE(bpve::replica_stream(1, 0).key(), bpve::replica_stream(2, 0).key());
    EXPECT_EQ(bpve::replica_stream(9, 3).key(), bpve::replica_stream(9, 3).key());
}

TEST(Variates, BinomialInverseIsMonotoneInProbability)
{
    for (double u : {0.01, 0.3, 0.5, 0.77, 0.999}) {
        bpve::Count prev = 0;
        for (double p = 0.0; p <= 1.0; p += 0.01) {
            bpve::Count const k = bpve::binomial_inverse(500, std::min(p, 1.0), u);
            ASSERT_GE(k, prev) << "u = " << u << " p = " << p;
            ASSERT_LE(k, 500u);
            prev = k;
        }
    }
}

TEST(Variates, BinomialInverseMatchesCdf)
{
    // P(K <= k) for Binomial(10, 0.3), accumulated directly.
    double pmf = std::pow(0.7, 10);
    double cdf = pmf;
    for (bpve::Count k = 0; k < 10; ++k) {
        double const below = cdf - 1e-9;
        double const above = std::min(cdf + 1e-9, 1.0 - 1e-12);
        EXPECT_EQ(bpve::binomial_inverse(10, 0.3, below), k);
        if (k < 9) {
            EXPECT_EQ(bpve::binomial_inverse(10, 0.3, above), k + 1);
        }
        pmf *= (10.0 - static_cast<double>(k)) / (static_cast<double>(k) + 1.0) * 0.3 / 0.7;
        cdf += pmf;
    }
}

TEST(Variates, HugeBinomialUsesNormalBand)
{
    bpve::Count const trials = bpve::Count{1} << 50;
    double const p = 0.25;
    double const mean = static_cast<double>(trials) * p;
    double const sd = std::sqrt(mean * (1.0 - p));
    auto const mid = static_cast<double>(bpve::binomial_inverse(trials, p, 0.5));
    EXPECT_NEAR(mid, mean, 1.0 + 1e-12 * mean);
    auto const hi = static_cast<double>(bpve::binomial_inverse(trials, p, 0.975));
    EXPECT_NEAR((hi - mean) / sd, 1.959964, 1e-3);
}

TEST(Variates, PoissonMomentsBothRegimes)
{
    for (double mean : {3.0, 250.0}) {
        bpve::Stream s{11};
        int const n = 200000;
        double sum = 0.0;
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            auto const x = static_cast<double>(bpve::poisson_variate(mean, s));
            sum += x;
            sq += x * x;
        }
        double const m = sum / n;
        EXPECT_NEAR(m, mean, 5.0 * std::sqrt(mean / n)) << mean;
        EXPECT_NEAR(sq / n - m * m, mean, 0.03 * mean) << mean;
    }
}

TEST(Variates, NormalQuantile)
{
    EXPECT_NEAR(bpve::normal_quantile(0.5), 0.0, 1e-9);
    EXPECT_NEAR(bpve::normal_quantile(0.975), 1.959963985, 1e-8);
    EXPECT_NEAR(bpve::normal_quantile(1e-6), -4.753424309, 1e-7);
}

}  // namespace
