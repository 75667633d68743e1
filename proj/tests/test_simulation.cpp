#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "forestrot/optimizer.hpp"
#include "forestrot/simulation.hpp"
#include "oracles.hpp"

using namespace forestrot;
using fixture::Species;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

SimulationConfig config(std::int64_t n, std::uint64_t seed = 1234)
{
    SimulationConfig c;
    c.n_paths = n;
    c.rng_seed = seed;
    return c;
}

} // namespace

TEST(RotationChain, NoDamageHarvestsAtT)
{
    const auto p = fixture::problem(Species::pine, 0.0, 0.0);
    const auto chain = sample_rotation_chain(p, 80.0, config(1), 0);
    ASSERT_EQ(chain.size(), 125u); // starts 0, 80, ..., 9920
    for (std::size_t i = 0; i < chain.size(); ++i) {
        EXPECT_EQ(chain[i].end, RotationEnd::harvest);
        EXPECT_EQ(chain[i].age, 80.0);
        EXPECT_EQ(chain[i].start, 80.0 * static_cast<double>(i));
    }
}

TEST(RotationChain, NeverHarvestedStandEndsInDamage)
{
    const auto p = fixture::problem(Species::spruce, 0.0, 0.01);
    auto c = config(1);
    c.stock_horizon = 1000.0;
    double total = 0.0;
    long count = 0;
    for (std::uint64_t path = 0; path < 10000; ++path) {
        for (const auto& r : sample_rotation_chain(p, inf, c, path)) {
            ASSERT_EQ(r.end, RotationEnd::damage);
            total += r.age;
            ++count;
        }
    }
    EXPECT_NEAR(total / count, 100.0, 5.0);
}

TEST(RotationChain, HarvestProbabilityIsSurvival)
{
    const auto p = fixture::problem(Species::pine, 0.0, 0.005);
    auto c = config(1);
    c.stock_horizon = 1.0; // one rotation per path
    const int n = 20000;
    int harvested = 0;
    for (int path = 0; path < n; ++path)
        harvested += sample_rotation_chain(p, 70.0, c, path).front().end == RotationEnd::harvest;
    const double q = std::exp(-0.005 * 70.0);
    EXPECT_NEAR(q, 0.7047, 1e-4);
    EXPECT_NEAR(static_cast<double>(harvested) / n, q, 3 * std::sqrt(q * (1 - q) / n));
}

TEST(RotationChain, UndisturbedUnharvestedStandIsOneCensoredRotation)
{
    const auto chain = sample_rotation_chain(fixture::problem(Species::pine, 0.0, 0.0), inf, config(1), 3);
    ASSERT_EQ(chain.size(), 1u);
    EXPECT_EQ(chain[0].end, RotationEnd::censored);
    EXPECT_TRUE(std::isinf(chain[0].age));
}

TEST(RotationChain, DeterministicPerPath)
{
    const auto p = fixture::problem(Species::pine, 0.0, 0.008);
    const auto a = sample_rotation_chain(p, 60.0, config(1, 77), 12);
    const auto b = sample_rotation_chain(p, 60.0, config(1, 77), 12);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].age, b[i].age);
    EXPECT_THROW(sample_rotation_chain(p, 0.0, config(1), 0), DomainError);
}

TEST(NpvStatistics, NoDamageIsDeterministicAndMatchesLandValue)
{
    for (double pc : {0.0, 50.0}) {
        const auto p = fixture::problem(Species::pine, pc, 0.0);
        const auto s = npv_statistics(p, 70.0, config(50));
        EXPECT_EQ(s.rel_std, 0.0);
        EXPECT_LT(std::abs(s.mean - land_value(p, 70.0)) / land_value(p, 70.0), 1e-4);
        EXPECT_TRUE(s.warnings.empty());
    }
}

TEST(NpvStatistics, ShortHorizonWarns)
{
    auto c = config(10);
    c.npv_horizon = 100.0;
    const auto s = npv_statistics(fixture::problem(Species::pine, 0.0, 0.0), 60.0, c);
    ASSERT_EQ(s.warnings.size(), 1u);
}

TEST(NpvStatistics, MeanConvergesToLandValueForRandomProblems)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> upc(0.0, 100.0), ul(0.0, 0.01), ut(30.0, 150.0);
    for (int i = 0; i < 10; ++i) {
        auto p = fixture::problem(i % 2 ? Species::spruce : Species::pine, upc(rng), ul(rng),
                                  i % 3 ? DamageType::fire : DamageType::storm);
        const double T = ut(rng);
        const auto s = npv_statistics(p, T, config(100000, 500 + i));
        EXPECT_LT(std::abs(s.mean - land_value(p, T)), 3 * s.ci_halfwidth + 1e-9 * std::abs(s.mean))
            << "problem " << i << " mean " << s.mean << " lev " << land_value(p, T);
    }
}

TEST(NpvStatistics, SameSeedSameBitsAnyWorkerCount)
{
    const auto p = fixture::problem(Species::spruce, 40.0, 0.01);
    auto c = config(3000, 99);
    const auto a = npv_statistics(p, 70.0, c);
    c.workers = 3;
    const auto b = npv_statistics(p, 70.0, c);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std, b.std);
}

TEST(AverageHarvest, NoDamageLimit)
{
    const auto p = fixture::problem(Species::pine, 0.0, 0.0);
    EXPECT_DOUBLE_EQ(average_harvest_analytic(p, 80.0), stem_volume(p.growth, 80.0) / 80.0);
}

TEST(AverageHarvest, VanishesForFrequentDamageOrNoHarvest)
{
    EXPECT_EQ(average_harvest_analytic(fixture::problem(Species::pine, 0.0, 50.0), 80.0), 0.0);
    EXPECT_EQ(average_harvest_analytic(fixture::problem(Species::pine, 0.0, 0.01), inf), 0.0);
    EXPECT_THROW(average_harvest_analytic(fixture::problem(Species::pine, 0.0, 0.01), 0.0), DomainError);
}

TEST(AverageHarvest, MatchesSingleRotationYieldForm)
{
    for (double l : {1e-4, 0.003, 0.02}) {
        const auto p = fixture::problem(Species::spruce, 0.0, l);
        const double T = 75.0, q = std::exp(-l * T);
        const double expected = q * oracle::volume(p.growth, T) / ((1.0 - q * (1.0 + l * T)) / l + q * T);
        EXPECT_NEAR(average_harvest_analytic(p, T), expected, 1e-9 * expected);
    }
}

TEST(AverageHarvest, MatchesMonteCarlo)
{
    const auto p = fixture::problem(Species::spruce, 0.0, 0.005);
    const auto lr = long_run_averages(p, 90.0, config(100000, 31));
    EXPECT_LE(std::abs(lr.harvest.value - average_harvest_analytic(p, 90.0)), lr.harvest.ci_halfwidth);
    EXPECT_NEAR(lr.harvest_fraction, std::exp(-0.005 * 90.0), 0.01);
}

TEST(CarbonStock, UndisturbedStandAverageOverHorizon)
{
    const auto p = fixture::problem(Species::pine, 0.0, 0.0);
    auto c = config(3);
    const double avg = long_term_carbon_stock(p, inf, c);
    const double expected = p.carbon.alpha * oracle::gk([&](double t) { return oracle::volume(p.growth, t); }, 0.0,
                                                         c.stock_horizon)
                          / c.stock_horizon;
    EXPECT_NEAR(avg, expected, 1e-8 * expected);
    // with no events the stock approaches alpha v(inf)
    EXPECT_NEAR(avg, p.carbon.alpha * p.growth.integration_constant(), 0.02 * avg);
}

TEST(CarbonStock, ImmediateReleaseLeavesOnlyLiveStock)
{
    auto p = fixture::problem(Species::pine, 0.0, 0.0);
    p.carbon.harvest_profile = EventCarbonProfile{EventKind::harvest, {CarbonPool::immediate(1.0)}};
    const double T = 64.0;
    const double expected = p.carbon.alpha / T * oracle::gk([&](double t) { return oracle::volume(p.growth, t); }, 0.0, T);
    EXPECT_NEAR(long_term_carbon_stock(p, T, config(2)), expected, 1e-9 * expected);
}

TEST(CarbonStock, NeedsProfiles)
{
    auto p = fixture::problem(Species::pine, 0.0, 0.01);
    p.carbon.damage_profile.reset();
    EXPECT_THROW(long_term_carbon_stock(p, 60.0, config(2)), DomainError);
    const auto s = simulate(p, 60.0, config(20));
    EXPECT_FALSE(s.warnings.empty());
}

TEST(CarbonStock, TrajectoryAverageAgreesWithRenewalEstimate)
{
    const auto p = fixture::problem(Species::spruce, 30.0, 0.006);
    auto c = config(200, 5);
    c.stock_horizon = 20000.0;
    const double renewal = long_term_carbon_stock(p, 70.0, c);
    double sum = 0.0;
    long n = 0;
    for (std::uint64_t path = 0; path < 10; ++path) {
        const auto traj = stock_trajectory(p, 70.0, c, path);
        // skip the first 2000 yr while pools build up
        for (std::size_t k = 2000; k < traj.size(); ++k) sum += traj[k], ++n;
    }
    EXPECT_NEAR(sum / n, renewal, 0.02 * renewal);
}

TEST(CarbonStock, TrajectoryStartsBareAndStaysNonNegative)
{
    const auto p = fixture::problem(Species::pine, 0.0, 0.01);
    auto c = config(1);
    c.stock_horizon = 3000.0;
    c.time_step = 0.5;
    const auto traj = stock_trajectory(p, 60.0, c, 0);
    ASSERT_EQ(traj.size(), 6001u);
    EXPECT_EQ(traj.front(), 0.0);
    for (double x : traj) EXPECT_GE(x, 0.0);
}

TEST(Simulate, RiskHalvesUnderCarbonPricing)
{
    for (auto sp : {Species::pine, Species::spruce}) {
        const auto lo = fixture::problem(sp, 0.0, 0.01);
        const auto hi = fixture::problem(sp, 100.0, 0.01);
        const auto a = simulate(lo, solve_optimal_rotation(lo).t_star, config(100000, 8));
        const auto b = simulate(hi, solve_optimal_rotation(hi).t_star, config(100000, 8));
        const double ratio = b.rel_std_npv / a.rel_std_npv;
        EXPECT_GT(ratio, 0.35) << fixture::name(sp);
        EXPECT_LT(ratio, 0.65) << fixture::name(sp);
    }
}

TEST(Simulate, SummaryInvariants)
{
    const auto p = fixture::problem(Species::pine, 20.0, 0.004);
    const auto s = simulate(p, 65.0, config(2000));
    EXPECT_GE(s.rel_std_npv, 0.0);
    EXPECT_GE(s.avg_carbon_stock, 0.0);
    EXPECT_GE(s.avg_harvest, 0.0);
    EXPECT_GT(s.ci_mean_npv, 0.0);
    EXPECT_EQ(s.n_paths, 2000);
    EXPECT_EQ(s.rng_seed, 1234u);
}

TEST(Simulate, ConfigValidation)
{
    auto c = config(0);
    EXPECT_THROW(c.validate(), DomainError);
    c = config(1);
    c.time_step = 0.0;
    EXPECT_THROW(c.validate(), DomainError);
    c = config(1);
    c.npv_horizon = -1.0;
    EXPECT_THROW(c.validate(), DomainError);
}
