#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "freeknot/errors.hpp"
#include "freeknot/paths.hpp"
#include "freeknot/random.hpp"
#include "freeknot/schemes.hpp"
#include "freeknot/sde.hpp"
#include "oracles.hpp"

namespace fk = freeknot;
namespace ft = freeknot::testing;

namespace {

fk::ScalarSde constant_sde(double a, double s, double x0) {
    fk::ScalarSde sde;
    sde.name = "constant";
    sde.drift = [a](double, double) { return a; };
    sde.diffusion = [s](double, double) { return s; };
    sde.diffusion_dx = [](double, double) { return 0.0; };
    sde.x0 = x0;
    return sde;
}

fk::GridPath random_path(std::size_t n, std::uint64_t seed, std::uint64_t index = 0) {
    fk::RandomStream rng = fk::RandomStream::derive(seed, fk::StreamTag::method_paths, index);
    return fk::sample_grid_path(n, rng);
}

double max_knot_error(const fk::GridPath& path, double eps, double mu, double sigma0) {
    const fk::KnotPath k = fk::detect_knots_on_grid(path, eps);
    const std::vector<double> m = fk::run_milstein_knots(fk::make_gbm(mu, sigma0, 1.0), k);
    const std::vector<double> x = fk::exact_gbm(mu, sigma0, 1.0, k.knot_times, k.knot_values);
    double worst = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) worst = std::max(worst, std::abs(m[j] - x[j]));
    return worst;
}

}  // namespace

TEST(MilsteinStep, AdditiveNoiseEqualsEuler) {
    const fk::ScalarSde ou = fk::make_ou(1.5, 0.2, 0.7, 0.0);
    const double x = 0.3;
    const double dt = 0.01;
    const double dw = 0.13;
    const double euler = x + ou.drift(0.0, x) * dt + ou.diffusion(0.0, x) * dw;
    EXPECT_EQ(fk::milstein_step(ou, 0.0, x, dt, dw), euler);
}

TEST(MilsteinStep, GbmHandArithmetic) {
    const fk::ScalarSde g = fk::make_gbm(0.05, 0.2, 1.0);
    EXPECT_NEAR(fk::milstein_step(g, 0.0, 1.0, 0.01, 0.1), 1.0205, 1e-15);
    EXPECT_NEAR(fk::milstein_step(g, 0.0, 1.0, 0.01, 0.2), 1.0411, 1e-15);
}

TEST(MilsteinStep, Errors) {
    const fk::ScalarSde g = fk::make_gbm(0.05, 0.2, 1.0);
    EXPECT_THROW(fk::milstein_step(g, 0.0, 1.0, 0.0, 0.1), fk::DomainError);
    EXPECT_THROW(fk::milstein_step(g, 0.0, 1.0, -0.1, 0.1), fk::DomainError);
    EXPECT_THROW(fk::milstein_step(g, 0.0, std::nan(""), 0.01, 0.1), fk::NumericError);
    EXPECT_THROW(fk::milstein_step(g, 0.0, 1.0, 0.01, std::numeric_limits<double>::infinity()), fk::NumericError);
    EXPECT_THROW(fk::milstein_step(g, 0.0, 1e300, 0.01, 1e10), fk::NumericError);
}

TEST(RunMilsteinKnots, DegenerateSdeStaysAtX0) {
    const fk::GridPath p = random_path(10000, 1);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const std::vector<double> m = fk::run_milstein_knots(constant_sde(0.0, 0.0, 2.5), k);
    ASSERT_EQ(m.size(), k.knot_times.size());
    for (double v : m) EXPECT_EQ(v, 2.5);
}

TEST(RunMilsteinKnots, SingleIntervalIsOneStep) {
    const fk::GridPath p({0.0, 0.3, -0.4});
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 10.0, fk::ResolutionGuard::waive);
    ASSERT_EQ(k.n_knots(), 0u);
    const fk::ScalarSde g = fk::make_gbm(0.1, 0.5, 1.0);
    const std::vector<double> m = fk::run_milstein_knots(g, k);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m[0], 1.0);
    EXPECT_EQ(m[1], fk::milstein_step(g, 0.0, 1.0, 1.0, -0.4));
    EXPECT_EQ(fk::run_milstein_knots(g, k, 3.0)[1], fk::milstein_step(g, 0.0, 3.0, 1.0, -0.4));
}

TEST(RunMilsteinKnots, OuTrajectoryEqualsEulerBitwise) {
    const fk::GridPath p = random_path(20000, 2);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const fk::ScalarSde ou = fk::make_ou(1.0, 0.5, 0.8, 0.2);
    const std::vector<double> m = fk::run_milstein_knots(ou, k);
    std::vector<double> e{ou.x0};
    for (std::size_t j = 1; j < k.knot_times.size(); ++j) {
        const double t = k.knot_times[j - 1];
        const double x = e.back();
        e.push_back(x + ou.drift(t, x) * k.interval_length(j) + ou.diffusion(t, x) * (k.knot_values[j] - k.knot_values[j - 1]));
    }
    EXPECT_EQ(m, e);
}

TEST(RunMilsteinKnots, MaxKnotErrorShrinksByFactorThreeToFiveAndAHalf) {
    const std::size_t reps = 200;
    double coarse = 0.0;
    double fine = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
        const fk::GridPath p = random_path(100000, 7, i);
        coarse += max_knot_error(p, 0.1, 0.1, 0.5);
        fine += max_knot_error(p, 0.05, 0.1, 0.5);
    }
    const double factor = coarse / fine;
    EXPECT_GE(factor, 3.0);
    EXPECT_LE(factor, 5.5);
}

TEST(BuildXtilde, ZeroDiffusionIsContinuousWithDriftSlope) {
    const fk::GridPath p = random_path(20000, 3);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const fk::SplinePath s = fk::build_xtilde(constant_sde(0.7, 0.0, 1.0), k);
    EXPECT_TRUE(s.is_continuous());
    ASSERT_EQ(s.size(), k.intervals());
    for (const fk::Segment& g : s.segments())
        EXPECT_NEAR((g.y_end - g.y_start) / (g.t_end - g.t_start), 0.7, 1e-12);
}

TEST(BuildXtilde, AdditiveNoiseHasNoJumps) {
    const fk::GridPath p = random_path(20000, 4);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const fk::ScalarSde ou = fk::make_ou(1.0, 0.0, 1.0, 0.5);
    const fk::SplinePath s = fk::build_xtilde(ou, k);
    const std::vector<double> m = fk::run_milstein_knots(ou, k);
    EXPECT_TRUE(s.is_continuous());
    for (std::size_t j = 0; j < s.size(); ++j) EXPECT_EQ(s.segments()[j].y_end, m[j + 1]);
}

TEST(BuildXtilde, GbmJumpsEqualMilsteinCorrection) {
    const fk::GridPath p = random_path(20000, 5);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const fk::ScalarSde g = fk::make_gbm(0.1, 0.5, 1.0);
    const fk::SplinePath s = fk::build_xtilde(g, k);
    const std::vector<double> m = fk::run_milstein_knots(g, k);
    for (std::size_t j = 1; j < k.knot_times.size(); ++j) {
        const fk::Segment& seg = s.segments()[j - 1];
        EXPECT_EQ(seg.y_start, m[j - 1]);
        EXPECT_EQ(seg.t_start, k.knot_times[j - 1]);
        EXPECT_EQ(seg.t_end, k.knot_times[j]);
        const double dw = k.knot_values[j] - k.knot_values[j - 1];
        const double dt = k.interval_length(j);
        const double x = m[j - 1];
        EXPECT_NEAR(m[j] - seg.y_end, 0.5 * g.diffusion(0, x) * g.diffusion_dx(0, x) * (dw * dw - dt), 1e-14);
    }
}

TEST(BuildXtilde, SegmentMidpointIsMeanOfEndpoints) {
    const fk::GridPath p = random_path(20000, 6);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const fk::SplinePath s = fk::build_xtilde(fk::make_gbm(0.1, 0.5, 1.0), k);
    for (const fk::Segment& g : s.segments()) {
        const double mid = 0.5 * (g.t_start + g.t_end);
        const double scale = std::max(std::abs(g.y_start), std::abs(g.y_end));
        EXPECT_NEAR(s(mid), 0.5 * (g.y_start + g.y_end), 8.0 * std::numeric_limits<double>::epsilon() * scale);
    }
}

TEST(BuildXtilde, FollowsInterpolatedBrownianPathInsideSegments) {
    const fk::GridPath p = random_path(20000, 8);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const fk::ScalarSde g = fk::make_gbm(0.1, 0.5, 1.0);
    const fk::SplinePath s = fk::build_xtilde(g, k);
    const std::vector<double> m = fk::run_milstein_knots(g, k);
    for (std::size_t j = 1; j < k.knot_times.size(); ++j) {
        const double t0 = k.knot_times[j - 1];
        const double t = t0 + 0.3 * k.interval_length(j);
        const double x = m[j - 1];
        const double expect = x + g.drift(t0, x) * (t - t0) +
                              g.diffusion(t0, x) * (fk::interpolate_brownian(k, t) - k.knot_values[j - 1]);
        EXPECT_NEAR(s(t), expect, 1e-13);
    }
}

TEST(BuildXtilde, RejectsMismatchedMilsteinValues) {
    const fk::GridPath p = random_path(20000, 9);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const std::vector<double> wrong(k.knot_times.size() + 1, 1.0);
    EXPECT_THROW(fk::build_xtilde(fk::make_gbm(0.1, 0.5, 1.0), k, wrong), fk::ConfigError);
}

TEST(RunMilsteinContinuous, CoincidesWithKnotSchemeAtKnots) {
    const fk::ScalarSde g = fk::make_gbm(0.1, 0.5, 1.0);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const fk::GridPath p = random_path(20000, 10, s);
        const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
        const std::vector<double> c = fk::run_milstein_continuous(g, k, p);
        const std::vector<double> m = fk::run_milstein_knots(g, k);
        ASSERT_EQ(c.size(), p.steps() + 1);
        for (std::size_t j = 0; j < k.grid_indices.size(); ++j) EXPECT_EQ(c[k.grid_indices[j]], m[j]);
    }
}

TEST(RunMilsteinContinuous, DegenerateSdeIsConstant) {
    const fk::GridPath p = random_path(5000, 11);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.2);
    for (double v : fk::run_milstein_continuous(constant_sde(0.0, 0.0, -1.5), k, p)) EXPECT_EQ(v, -1.5);
}

TEST(RunMilsteinContinuous, RegimeAndPathMismatchAreConfigErrors) {
    const fk::ScalarSde g = fk::make_gbm(0.1, 0.5, 1.0);
    const fk::GridPath p = random_path(5000, 12);
    fk::RandomStream rng(1);
    EXPECT_THROW(fk::run_milstein_continuous(g, fk::sample_knot_sequence(0.2, rng), p), fk::ConfigError);
    const fk::GridPath other = random_path(5000, 13);
    EXPECT_THROW(fk::run_milstein_continuous(g, fk::detect_knots_on_grid(other, 0.2), p), fk::ConfigError);
    const fk::GridPath longer = random_path(8000, 12);
    EXPECT_THROW(fk::run_milstein_continuous(g, fk::detect_knots_on_grid(longer, 0.2), p), fk::ConfigError);
}

TEST(RunMilsteinContinuous, SupErrorAgainstExactGbmBelowHalfEps) {
    const double eps = 0.05;
    const fk::ScalarSde g = fk::make_gbm(0.1, 0.5, 1.0);
    double total = 0.0;
    const std::size_t reps = 40;
    for (std::size_t i = 0; i < reps; ++i) {
        const fk::GridPath p = random_path(100000, 14, i);
        const fk::KnotPath k = fk::detect_knots_on_grid(p, eps);
        const std::vector<double> c = fk::run_milstein_continuous(g, k, p);
        const std::vector<double> x = fk::exact_gbm(0.1, 0.5, 1.0, p);
        double worst = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) worst = std::max(worst, std::abs(c[j] - x[j]));
        total += worst;
    }
    EXPECT_LT(total / static_cast<double>(reps), eps / 2.0);
}

TEST(EulerFixedInterpolated, SingleStepUnitDiffusion) {
    const fk::GridPath p = random_path(64, 15);
    const fk::SplinePath s = fk::euler_fixed_interpolated(constant_sde(0.0, 1.0, 0.4), 1, p);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.segments()[0].y_start, 0.4);
    EXPECT_EQ(s.segments()[0].y_end, 0.4 + p[64]);
    EXPECT_EQ(s(0.0), 0.4);
}

TEST(EulerFixedInterpolated, DeterministicOdeExactAtNodes) {
    const fk::GridPath p = random_path(1000, 16);
    const fk::SplinePath s = fk::euler_fixed_interpolated(constant_sde(1.0, 0.0, 2.0), 10, p);
    EXPECT_TRUE(s.is_continuous());
    for (int i = 0; i <= 10; ++i) EXPECT_NEAR(s(i / 10.0), 2.0 + i / 10.0, 1e-14);
    EXPECT_NEAR(s(0.55), 2.55, 1e-14);
}

TEST(EulerFixedInterpolated, KMustDivideGrid) {
    const fk::GridPath p = random_path(1000, 17);
    EXPECT_THROW(fk::euler_fixed_interpolated(constant_sde(1.0, 0.0, 2.0), 3, p), fk::ConfigError);
    EXPECT_THROW(fk::euler_fixed_interpolated(constant_sde(1.0, 0.0, 2.0), 0, p), fk::ConfigError);
    EXPECT_NO_THROW(fk::euler_fixed_interpolated(constant_sde(1.0, 0.0, 2.0), 1000, p));
}

TEST(ExactGbm, ClosedFormSpecialCases) {
    const fk::GridPath p = random_path(1000, 18);
    const std::vector<double> a = fk::exact_gbm(0.1, 0.5, 2.0, p);
    EXPECT_EQ(a[0], 2.0);
    const std::vector<double> b = fk::exact_gbm(0.3, 0.0, 2.0, p);
    for (std::size_t i = 0; i <= 1000; ++i) EXPECT_NEAR(b[i], 2.0 * std::exp(0.3 * p.time(i)), 1e-14);
    const std::vector<double> c = fk::exact_gbm(0.125, 0.5, 1.0, p);
    for (std::size_t i = 0; i <= 1000; ++i) EXPECT_NEAR(c[i], std::exp(0.5 * p[i]), 1e-13);
}

TEST(ExactGbm, KnotOverloadMatchesGrid) {
    const fk::GridPath p = random_path(20000, 19);
    const fk::KnotPath k = fk::detect_knots_on_grid(p, 0.1);
    const std::vector<double> grid = fk::exact_gbm(0.1, 0.5, 1.0, p);
    const std::vector<double> knots = fk::exact_gbm(0.1, 0.5, 1.0, k.knot_times, k.knot_values);
    for (std::size_t j = 0; j < knots.size(); ++j) EXPECT_EQ(knots[j], grid[k.grid_indices[j]]);
    EXPECT_THROW(fk::exact_gbm(0.1, 0.5, 1.0, k.knot_times, std::vector<double>{0.0}), fk::ConfigError);
}

TEST(ExactOu, MatchesFineMilsteinAndMoments) {
    const fk::ScalarSde ou = fk::make_ou(2.0, 0.5, 0.7, 1.0);
    std::vector<double> terminal;
    double gap = 0.0;
    for (std::size_t i = 0; i < 4000; ++i) {
        const fk::GridPath p = random_path(2000, 20, i);
        const std::vector<double> x = fk::exact_ou(2.0, 0.5, 0.7, 1.0, p);
        if (i < 20) {
            const std::vector<double> m = fk::milstein_on_grid(ou, p);
            for (std::size_t j = 0; j < x.size(); ++j) gap = std::max(gap, std::abs(x[j] - m[j]));
        }
        terminal.push_back(x.back());
    }
    EXPECT_LT(gap, 5e-3);
    // X(1) ~ N(mean + (x0 - mean) e^-theta, sigma^2 (1 - e^-2theta) / (2 theta)).
    const double m = 0.5 + 0.5 * std::exp(-2.0);
    const double v = 0.49 * (1.0 - std::exp(-4.0)) / 4.0;
    EXPECT_NEAR(ft::sample_mean(terminal), m, 3.0 * std::sqrt(v / 4000.0));
    EXPECT_NEAR(ft::sample_variance(terminal), v, 3.0 * v * std::sqrt(2.0 / 3999.0));
}

TEST(ReferenceSolution, ClosedFormOrFineMilstein) {
    const fk::GridPath p = random_path(1000, 21);
    fk::SdeSpec spec;
    EXPECT_EQ(fk::reference_solution(spec, p), fk::exact_gbm(spec.mu, spec.sigma0, spec.x0, p));
    spec.name = "sin-diffusion";
    EXPECT_EQ(fk::reference_solution(spec, p), fk::milstein_on_grid(fk::make_sde(spec), p));
}
