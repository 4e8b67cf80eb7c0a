// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <bpve/criteria.hpp>
#include <bpve/genfun.hpp>

namespace {

using bpve::OffspringLaw;
using bpve::Outcome;
using bpve::ParamFunction;
using bpve::Qualifier;
using bpve::Schedule;
using bpve::TailModel;
using D = TailModel::Direction;

Schedule squares()
{
    return Schedule::geometric(ParamFunction::power(1.0, 2.0, 1.0));
}

Schedule largem()
{
    return Schedule::two_point_mean(ParamFunction::constant(2.0), ParamFunction::doubling(4.0));
}

bpve::CriteriaOptions horizon(std::size_t h)
{
    bpve::CriteriaOptions o;
    o.horizon = h;
    return o;
}

std::string describe(bpve::Verdict const& v)
{
    std::string s = v.criterion + " " + bpve::to_string(v.outcome) + "/" + bpve::to_string(v.qualifier);
    for (auto const& n : v.evidence.notes) {
        s += "; " + n;
    }
    return s;
}

// --- product of means ------------------------------------------------------

TEST(ProdmExtinction, SubcriticalConstant)
{
    auto const law = OffspringLaw::geometric(0.9);
    auto const v = bpve::check_prodm_extinction(Schedule::constant(law), horizon(2000),
                                                bpve::constant_schedule_tails(law).prodm);
    EXPECT_EQ(v.outcome, Outcome::extinct) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::certified);
}

TEST(ProdmExtinction, SubcriticalWithoutTailIsAtHorizon)
{
    auto const v = bpve::check_prodm_extinction(Schedule::constant(OffspringLaw::geometric(0.9)), horizon(10000));
    EXPECT_EQ(v.outcome, Outcome::extinct);
    EXPECT_EQ(v.qualifier, Qualifier::at_horizon);
    EXPECT_LT(v.evidence.values.at("running_min"), -700.0);
}

TEST(ProdmExtinction, HarmonicFailures)
{
    auto const s = Schedule::bernoulli_failure(ParamFunction::power(1.0, -1.0, 2.0));
    auto const v = bpve::check_prodm_extinction(s, horizon(2000), TailModel::monotone(0, D::nondecreasing, 1.0));
    EXPECT_EQ(v.outcome, Outcome::extinct) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::certified);
    // prod_{n=0}^{N} (1 - 1/(n+2)) = 1/(N+2)
    EXPECT_NEAR(v.evidence.values.at("log_product"), -std::log(2002.0), 1e-9);
}

TEST(ProdmExtinction, SupercriticalIsInconclusive)
{
    auto const v = bpve::check_prodm_extinction(Schedule::constant(OffspringLaw::poisson(2.0)), horizon(500));
    EXPECT_EQ(v.outcome, Outcome::inconclusive);
}

TEST(ProdmExtinction, WrongTailClaimIsNotTrusted)
{
    // claim -log m_n nondecreasing with exponent 0 for a supercritical law
    auto const v = bpve::check_prodm_extinction(Schedule::constant(OffspringLaw::poisson(2.0)), horizon(500),
                                                TailModel::monotone(0, D::nondecreasing, 0.0));
    EXPECT_EQ(v.outcome, Outcome::inconclusive);
}

// --- beta sequence criterion -------------------------------------------------

TEST(Main0, SquaresSurvive)
{
    auto const s = squares();
    auto const v = bpve::check_main0(s, 0, horizon(1000), TailModel::geometric(1, 0.25));
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::certified);
    ASSERT_TRUE(v.evidence.certificate.has_value());
    EXPECT_TRUE(v.evidence.certificate->valid);
    EXPECT_TRUE(bpve::verify_certificate(s, *v.evidence.certificate).ok);
}

TEST(Main0, StabilizationWithoutTail)
{
    auto const v = bpve::check_main0(squares(), 0, horizon(1000));
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::at_horizon);
}

TEST(Main0, SubcriticalIsInconclusive)
{
    auto const v = bpve::check_main0(Schedule::constant(OffspringLaw::geometric(0.9)), 0, horizon(1000));
    EXPECT_EQ(v.outcome, Outcome::inconclusive);
}

TEST(Main0, DoublyExponentialAtomIsInconclusive)
{
    auto const v = bpve::detail::guarded("thm_main0", bpve::Process::bpve, 200,
                                 [] { return bpve::check_main0(largem(), 0, horizon(200)); });
    EXPECT_EQ(v.outcome, Outcome::inconclusive) << describe(v);
}

TEST(Main0, SlowlyConvergingBetaGetsLongerCertificate)
{
    auto const s = Schedule::bernoulli_failure(ParamFunction::power(1.0, -2.0, 2.0));
    auto const v = bpve::check_main0(s, 0, horizon(10000), TailModel::monotone(8, D::nonincreasing, 1.5));
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::certified);
    ASSERT_TRUE(v.evidence.certificate.has_value());
    EXPECT_GT(v.evidence.certificate->horizon, 10000u);
    EXPECT_NEAR(v.evidence.certificate->q.front(), 0.5, 1e-4);
}

// --- corollary variants --------------------------------------------------------

TEST(CorMain0, VariantOneWithQuadraticAtoms)
{
    // m_n = 2 and m2_n = 2 (n+2)^2
    auto const s = Schedule::two_point_mean(ParamFunction::constant(2.0), ParamFunction::power(1.0, 2.0, 2.0));
    auto const v = bpve::check_cor_main0(s, 1, {}, 0, horizon(400), TailModel::geometric(4, 0.75));
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::certified);
}

TEST(CorMain0, VariantThreeWithConstantComparison)
{
    bpve::RootTestParams p;
    p.g = ParamFunction::constant(3.0);
    auto const v = bpve::check_cor_main0(squares(), 3, p, 0, horizon(400));
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
}

TEST(CorMain0, VariantFourNeedsGrowingMeans)
{
    bpve::RootTestParams p;
    p.M = 1.0;
    p.k = 1.0;
    auto const v = bpve::check_cor_main0(Schedule::constant(OffspringLaw::poisson(2.0)), 4, p, 0, horizon(400));
    EXPECT_EQ(v.outcome, Outcome::inconclusive) << describe(v);
}

// --- selection: extinction ---------------------------------------------------

TEST(BpwsExtinction, SqrtMeans)
{
    auto const s = Schedule::geometric(ParamFunction::power(1.0, 0.5, 1.0));
    auto const v = bpve::check_bpws_extinction(s, 0, horizon(2000), TailModel::monotone(0, D::nondecreasing, 0.0));
    EXPECT_EQ(v.outcome, Outcome::extinct) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::certified);
    EXPECT_EQ(v.process, bpve::Process::bpws);
}

TEST(BpwsExtinction, ConstantFiveCrossesThreshold)
{
    auto const v = bpve::check_bpws_extinction(Schedule::constant(OffspringLaw::poisson(5.0)), 0, horizon(1000));
    EXPECT_EQ(v.outcome, Outcome::extinct) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::at_horizon);
}

TEST(BpwsExtinction, SquaresIsInconclusive)
{
    auto const v = bpve::check_bpws_extinction(squares(), 0, horizon(1000));
    EXPECT_EQ(v.outcome, Outcome::inconclusive);
}

TEST(BpwsExtinction, LargerShiftLowersTheRatio)
{
    auto const s = Schedule::constant(OffspringLaw::poisson(5.0));
    auto const a = bpve::check_bpws_extinction(s, 0, horizon(300));
    auto const b = bpve::check_bpws_extinction(s, 50, horizon(300));
    EXPECT_GE(a.evidence.values.at("running_min"), b.evidence.values.at("running_min"));
}

// --- selection: local survival -----------------------------------------------

bpve::Main1Tails power_tails(double alpha)
{
    bpve::Main1Tails t;
    t.witness_series = TailModel::monotone(0, D::nonincreasing, alpha);
    t.dispersion_series = TailModel::geometric(1, 0.9);
    t.growth = TailModel::monotone(0, D::nondecreasing);
    return t;
}

TEST(Main1, SquaresSurviveLocally)
{
    auto const v = bpve::check_main1(squares(), {ParamFunction::constant(1.0), 2.0}, 0, horizon(2000),
                                     power_tails(2.0));
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
    EXPECT_EQ(v.qualifier, Qualifier::certified);
}

TEST(Main1, DyadicExample)
{
    auto const s = Schedule::geometric(
        ParamFunction::dyadic(ParamFunction::power(1.0, 1.0, 1.0), ParamFunction::power(1.0, 2.0, 1.0)));
    ParamFunction const c =
        ParamFunction::dyadic(ParamFunction::power(1.0, -1.0, 1.0), ParamFunction::constant(2.0));
    bpve::Main1Tails t;
    t.witness_series = TailModel::monotone(3, D::nonincreasing, 2.0).blocks();
    t.dispersion_series = TailModel::geometric(3, 0.75).blocks();
    auto const v = bpve::check_main1_search(s, c, bpve::default_C_search, 0, horizon(4096), t);
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
    // sum 1/m_n diverges, so the constant witness cannot work
    auto const plain = bpve::check_main1_search(s, ParamFunction::constant(1.0), bpve::default_C_search, 0,
                                                horizon(4096), {});
    EXPECT_NE(plain.outcome, Outcome::survives) << describe(plain);
}

TEST(Main1, SqrtMeansIsInconclusive)
{
    auto const s = Schedule::geometric(ParamFunction::power(1.0, 0.5, 1.0));
    auto const v = bpve::check_main1(s, {ParamFunction::constant(1.0), 2.0}, 0, horizon(2000), {});
    EXPECT_EQ(v.outcome, Outcome::inconclusive) << describe(v);
}

TEST(Main1, SearchStopsAtFirstSuccess)
{
    auto const v = bpve::check_main1_search(squares(), ParamFunction::constant(1.0), bpve::default_C_search, 0,
                                            horizon(2000), power_tails(2.0));
    EXPECT_EQ(v.outcome, Outcome::survives);
    EXPECT_EQ(v.evidence.values.at("C"), 1.5);
}

TEST(CorMain1, PoissonSquaresVariantOne)
{
    auto const s = Schedule::poisson(ParamFunction::power(1.0, 2.0, 1.0));
    auto const v = bpve::check_cor_main1(s, {ParamFunction::constant(1.0), 2.0}, 1, {}, 0, horizon(2000),
                                         TailModel::monotone(0, D::nonincreasing, 2.0),
                                         TailModel::geometric(1, 0.9));
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
}

TEST(CorMain1, ExponentialMeansWithGrowingWitness)
{
    // m_n = 4^n with geometric laws; witness c_i = 2 * 2^i and C = 1
    auto const s = Schedule::geometric(ParamFunction::exponential(1.0, 4.0));
    bpve::Main1Witness w{ParamFunction::exponential(2.0, 2.0), 1.0};
    auto const v = bpve::check_cor_main1(s, w, 1, {}, 0, horizon(300), TailModel::geometric(0, 0.5),
                                         TailModel::geometric(1, 0.9));
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
}

TEST(CorMain1, VariantFourWithGrowingWitness)
{
    bpve::RootTestParams p;
    p.M = 2.0;
    p.k = 2.0;
    // c_i / m_i = (i+1)^(-3/2)
    bpve::Main1Witness w{ParamFunction::power(1.0, 0.5, 1.0), 1.0};
    auto const v = bpve::check_cor_main1(squares(), w, 4, p, 0, horizon(400),
                                         TailModel::monotone(0, D::nonincreasing, 1.5), {});
    EXPECT_EQ(v.outcome, Outcome::survives) << describe(v);
}

// --- battery -------------------------------------------------------------------

TEST(Battery, FixedOrder)
{
    bpve::BatteryOptions o;
    o.criteria.horizon = 300;
    o.root.g = ParamFunction::constant(3.0);
    o.has_Mk = true;
    o.bpws_n0 = {0, 2};
    auto const vs = bpve::run_battery(squares(), o);
    std::vector<std::string> names;
    for (auto const& v : vs) {
        names.push_back(v.criterion);
    }
    std::vector<std::string> const want{"prop_main0ext", "thm_main0", "cor_main0_1", "cor_main0_2",
                                        "cor_main0_3", "cor_main0_4", "prop_bpws_extinction",
                                        "prop_bpws_extinction", "thm_main1", "cor_main1_1",
                                        "cor_main1_2", "cor_main1_3", "cor_main1_4"};
    EXPECT_EQ(names, want);
}

TEST(Battery, Squares)
{
    bpve::BatteryOptions o;
    o.criteria.horizon = 1000;
    auto const vs = bpve::run_battery(squares(), o);
    bool main0 = false;
    bool inconclusive = false;
    for (auto const& v : vs) {
        main0 = main0 || (v.criterion == "thm_main0" && v.outcome == Outcome::survives);
        inconclusive = inconclusive || v.outcome == Outcome::inconclusive;
    }
    EXPECT_TRUE(main0);
    EXPECT_TRUE(inconclusive);
}

TEST(Battery, Subcritical)
{
    auto const vs = bpve::run_battery(Schedule::constant(OffspringLaw::geometric(0.9)));
    ASSERT_FALSE(vs.empty());
    EXPECT_EQ(vs.front().criterion, "prop_main0ext");
    EXPECT_EQ(vs.front().outcome, Outcome::extinct);
    EXPECT_EQ(vs.front().qualifier, Qualifier::certified);
}

TEST(Battery, DoublyExponentialAtomHasNoSurvives)
{
    bpve::BatteryOptions o;
    o.criteria.horizon = 500;
    for (auto const& v : bpve::run_battery(largem(), o)) {
        EXPECT_NE(v.outcome, Outcome::survives) << describe(v);
    }
}

TEST(Battery, ContradictionsAreDetected)
{
    bpve::Verdict e;
    e.criterion = "prop_main0ext";
    e.outcome = Outcome::extinct;
    e.qualifier = Qualifier::certified;
    bpve::Verdict s;
    s.criterion = "thm_main1";
    s.process = bpve::Process::bpws;
    s.outcome = Outcome::survives;
    s.qualifier = Qualifier::certified;
    EXPECT_THROW(bpve::check_consistency({e, s}), bpve::ContradictionError);

    // extinction with selection is compatible with survival without it
    bpve::Verdict we = e;
    we.process = bpve::Process::bpws;
    bpve::Verdict bs = s;
    bs.process = bpve::Process::bpve;
    EXPECT_NO_THROW(bpve::check_consistency({we, bs}));
    // AtHorizon verdicts never conflict
    s.qualifier = Qualifier::at_horizon;
    EXPECT_NO_THROW(bpve::check_consistency({e, s}));
}

TEST(Battery, DominationNeverFlipsSurvivalToExtinction)
{
    std::vector<Schedule> pairs_low{Schedule::geometric(ParamFunction::power(1.0, 1.5, 1.0)),
                                    Schedule::constant(OffspringLaw::poisson(1.2))};
    std::vector<Schedule> pairs_high{Schedule::geometric(ParamFunction::power(1.0, 2.0, 1.0)),
                                     Schedule::constant(OffspringLaw::poisson(2.4))};
    bpve::BatteryOptions o;
    o.criteria.horizon = 800;
    for (std::size_t i = 0; i < pairs_low.size(); ++i) {
        auto const low = bpve::run_battery(pairs_low[i], o);
        auto const high = bpve::run_battery(pairs_high[i], o);
        for (std::size_t j = 0; j < low.size(); ++j) {
            if (low[j].outcome == Outcome::survives && low[j].qualifier == Qualifier::certified
                && low[j].process == bpve::Process::bpve) {
                EXPECT_NE(high[j].outcome, Outcome::extinct) << describe(high[j]);
            }
        }
    }
}

}  // namespace
