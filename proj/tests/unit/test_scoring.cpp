#include "test_helpers.hpp"

#include <robpred/oracle/quadrature.hpp>
#include <robpred/oracle/statistics.hpp>
#include <robpred/predictor/predictor.hpp>
#include <robpred/scoring/decomposition.hpp>
#include <robpred/scoring/expected.hpp>

namespace robpred::scoring {
namespace {

using testing::kHalfLog2Pi;

ScoreTrace trace_at(double cum, ScoringOptions opt = {}) {
  ScoreTrace t(opt);
  t.add(cum);
  return t;
}

TEST(Accumulate, FiniteSteps) {
  const auto t = accumulate(trace_at(-5), -3);
  EXPECT_DOUBLE_EQ(t.cumulative(), -8);
  EXPECT_FALSE(t.diverged());
  EXPECT_EQ(t.per_step(), (std::vector<double>{-5, -3}));
}

TEST(Accumulate, NegativeInfinityDiverges) {
  const auto t = accumulate(trace_at(-5), kNegInf);
  EXPECT_EQ(t.cumulative(), kNegInf);
  ASSERT_TRUE(t.diverged_at());
  EXPECT_EQ(*t.diverged_at(), 2u);
}

TEST(Accumulate, FloorRule) {
  const auto t = accumulate(trace_at(-8, {.floor = -10}), -5);
  EXPECT_EQ(t.cumulative(), kNegInf);
  EXPECT_EQ(*t.diverged_at(), 2u);
}

TEST(Accumulate, NanCountedAsNegativeInfinity) {
  const auto t = accumulate(trace_at(-1), kNaN);
  EXPECT_EQ(t.nan_count(), 1u);
  EXPECT_EQ(t.per_step().back(), kNegInf);
  EXPECT_TRUE(t.diverged());
}

TEST(Accumulate, UnrepresentableStepDensityIsNegativeInfinity) {
  const auto t = accumulate(trace_at(-1), -800.0);
  EXPECT_TRUE(t.diverged());
  const auto u = accumulate(trace_at(-1, {.floor = -1e9, .step_floor = kNegInf}), -800.0);
  EXPECT_FALSE(u.diverged());
  EXPECT_DOUBLE_EQ(u.cumulative(), -801.0);
}

TEST(Accumulate, NeverUndiverges) {
  RandomStream rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    ScoreTrace t;
    bool seen = false;
    for (int k = 0; k < 50; ++k) {
      const double u = rng.uniform_open();
      const double step = u < 0.05 ? kNegInf : (u < 0.07 ? kNaN : -10.0 * rng.uniform_open() + 5.0);
      t.add(step);
      seen = seen || u < 0.07;
      if (seen) {
        ASSERT_EQ(t.cumulative(), kNegInf);
      }
      ASSERT_EQ(t.cumulative_history().back(), t.cumulative());
    }
  }
}

TEST(Accumulate, CumulativeIsSumOfSteps) {
  RandomStream rng(4);
  ScoreTrace t;
  double sum = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double s = -rng.uniform_open() * 10.0;
    t.add(s);
    sum += s;
  }
  EXPECT_DOUBLE_EQ(t.cumulative(), sum);
}

TEST(ExpectedGaussian1d, MatchedPredictor) {
  EXPECT_NEAR(expected_ll_gaussian_predictor_1d(0, 1, 0, 1), -kHalfLog2Pi - 0.5, 1e-15);
  EXPECT_NEAR(expected_ll_gaussian_predictor_1d(0, 1, 0, 1), -1.418939, 1e-6);
}

TEST(ExpectedGaussian1d, CollapseUnderHugeTrueVariance) {
  EXPECT_LE(expected_ll_gaussian_predictor_1d(0, 1e12, 0, 1), -5e11);
}

TEST(ExpectedGaussian1d, MeanShiftPenalty) {
  EXPECT_NEAR(expected_ll_gaussian_predictor_1d(0, 1, 1, 1), -kHalfLog2Pi - 1.0, 1e-15);
  EXPECT_NEAR(expected_ll_gaussian_predictor_1d(0, 1, 1, 1), -1.918939, 1e-6);
}

TEST(ExpectedGaussian1d, RejectsNonPositiveVariance) {
  EXPECT_THROW(expected_ll_gaussian_predictor_1d(0, 1, 0, 0), DomainError);
  EXPECT_THROW(expected_ll_gaussian_predictor_1d(0, 1, 0, -2), DomainError);
}

TEST(ExpectedGaussian1d, AgreesWithQuadrature) {
  RandomStream rng(5);
  for (int i = 0; i < 10; ++i) {
    const double z = rng.normal(), zh = rng.normal();
    const double s2 = 0.2 + rng.uniform_open() * 3, s2h = 0.2 + rng.uniform_open() * 3;
    const auto pred = dist::fit_order2(Vector::Constant(1, zh), Matrix::Constant(1, 1, s2h));
    const double q = oracle::quad_expected_score(
        [&](double s) { return std::exp(-0.5 * (s - z) * (s - z) / s2) / std::sqrt(2 * std::numbers::pi * s2); },
        pred, oracle::QuadratureSpec::around(z, 40.0 * std::sqrt(s2)));
    EXPECT_NEAR(q, expected_ll_gaussian_predictor_1d(z, s2, zh, s2h), 1e-8);
  }
}

Vector v1(double x) { return Vector::Constant(1, x); }
Matrix m1(double x) { return Matrix::Constant(1, 1, x); }

TEST(GaussianKl, IdenticalIsZero) {
  RandomStream rng(6);
  const Matrix c = testing::random_spd(rng, 3);
  const Vector m = testing::random_vector(rng, 3);
  EXPECT_NEAR(gaussian_kl(m, c, m, c), 0.0, 1e-13);
}

TEST(GaussianKl, UnitMeanShift) { EXPECT_NEAR(gaussian_kl(v1(0), m1(1), v1(1), m1(1)), 0.5, 1e-15); }

TEST(GaussianKl, VarianceRatioAgreesWithQuadrature) {
  const double closed = gaussian_kl(v1(0), m1(2), v1(0), m1(1));
  EXPECT_NEAR(closed, 0.5 * (2.0 - std::log(2.0) - 1.0), 1e-15);
  EXPECT_NEAR(closed, 0.153426, 1e-6);
  const auto p = [](double s) { return std::exp(-0.25 * s * s) / std::sqrt(4 * std::numbers::pi); };
  const auto log_ratio = [](double s) { return 0.25 * s * s - 0.5 * std::log(2.0); };
  const double quad = oracle::adaptive_simpson(
      [&](double s) { return p(s) == 0.0 ? 0.0 : p(s) * log_ratio(s); },
      oracle::QuadratureSpec::around(0.0, 60.0));
  EXPECT_NEAR(quad, closed, 1e-9);
}

TEST(GaussianKl, RejectsNonSpd) { EXPECT_THROW(gaussian_kl(v1(0), m1(-1), v1(0), m1(1)), DomainError); }

model::LinearSds phi2_random_x0() {
  return model::make_phi(model::PhiVariant::phi2).with_initial_covariance(Matrix::Identity(2, 2));
}

kalman::PriorBeliefs exact(const model::LinearSds& s) {
  return kalman::PriorBeliefs(Matrix::Identity(2, 2), Matrix::Identity(2, 2), s.x0(), *s.x0_cov());
}

TEST(ExpectedKf, ExactBeliefsReduceToKnownNoiseForm) {
  const auto s = phi2_random_x0();
  for (std::size_t n : {1u, 10u, 100u}) {
    EXPECT_NEAR(expected_ll_kf_gaussian(s, exact(s), n), expected_ll_kf_known_gaussian(s, n), 1e-9) << n;
  }
}

TEST(ExpectedKf, MatchingInitialMeanGivesZeroBias) {
  const auto s = phi2_random_x0();
  kalman::PriorBeliefs b(2.0 * Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2), s.x0(),
                         3.0 * Matrix::Identity(2, 2));
  for (const auto& t : kf_gaussian_terms(s, b, 20)) EXPECT_EQ(t.e.norm(), 0.0);
  kalman::PriorBeliefs off(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector::Zero(2),
                           Matrix::Identity(2, 2));
  EXPECT_GT(kf_gaussian_terms(s, off, 5).front().e.norm(), 0.0);
}

TEST(ExpectedKf, RejectsNonGaussianSystem) {
  const auto s = model::make_phi(model::PhiVariant::phi1).with_initial_covariance(Matrix::Identity(2, 2));
  EXPECT_THROW(expected_ll_kf_gaussian(s, exact(s), 10), DomainError);
  EXPECT_THROW(expected_ll_kf_innovation(s, exact(s), 10), DomainError);
}

oracle::MeanEstimate monte_carlo_score(const model::LinearSds& s, const kalman::PriorBeliefs& b, std::size_t n,
                                       std::size_t trials, std::uint64_t seed) {
  const auto policy = predictor::PredictorPolicy::single({predictor::Family::order2});
  std::vector<double> finals;
  for (std::size_t i = 0; i < trials; ++i) {
    RandomStream rng = RandomStream::for_trajectory(seed, i);
    const auto traj = model::simulate_trajectory(s, n, rng);
    finals.push_back(predictor::run_predictor(b, policy, traj, s, false).trace.cumulative());
  }
  return oracle::mean_and_se(finals);
}

TEST(ExpectedKf, InnovationFormMatchesMonteCarloExactBeliefs) {
  const auto s = phi2_random_x0();
  for (std::size_t n : {10u, 100u}) {
    const double want = expected_ll_kf_innovation(s, exact(s), n);
    const auto mc = monte_carlo_score(s, exact(s), n, 2000, 100 + n);
    EXPECT_TRUE(mc.within(want, 3.0)) << "n=" << n << " mc=" << mc.mean << " se=" << mc.std_error
                                      << " closed=" << want;
  }
}

TEST(ExpectedKf, InnovationFormMatchesMonteCarloWrongBeliefs) {
  auto p = phi2_random_x0().params();
  p.process_noise = model::GaussianNoise((Vector(2) << 0.1, 0.0).finished(), 0.5 * Matrix::Identity(2, 2));
  const model::LinearSds s(p);
  const kalman::PriorBeliefs b(2.0 * Matrix::Identity(2, 2), 0.7 * Matrix::Identity(2, 2),
                               (Vector(2) << 0.0, 1.0).finished(), 4.0 * Matrix::Identity(2, 2));
  const double want = expected_ll_kf_innovation(s, b, 30);
  const auto mc = monte_carlo_score(s, b, 30, 4000, 9);
  EXPECT_TRUE(mc.within(want, 3.0)) << mc.mean << " +- " << mc.std_error << " vs " << want;
}

TEST(ExpectedKf, InnovationFormEqualsKnownNoiseEntropyOnlyAtFirstStep) {
  // With exact beliefs the first innovation is N(0, Sigma_1), so its expected
  // score is -1/2 (d ln 2 pi + ln|Sigma_1| + d).
  const auto s = phi2_random_x0();
  const Matrix P = s.F() * *s.x0_cov() * s.F().transpose() + Matrix::Identity(2, 2);
  const Matrix Sigma = P + Matrix::Identity(2, 2);
  const double want = -0.5 * (2 * std::log(2 * std::numbers::pi) + std::log(Sigma.determinant()) + 2);
  EXPECT_NEAR(kf_innovation_terms(s, exact(s), 1).front(), want, 1e-12);
}

TEST(Decomposition, MatchedNormalHasZeroDivergence) {
  const auto c = expected_ll_decomposition_check(gaussian_truth(0, 1), dist::fit_order2(v1(0), m1(1)));
  EXPECT_NEAR(c.direct, -kHalfLog2Pi - 0.5, 1e-8);
  EXPECT_NEAR(c.decomposed, -kHalfLog2Pi - 0.5, 1e-8);
  EXPECT_NEAR(c.kl, 0.0, 1e-10);
}

TEST(Decomposition, ShiftedNormalPredictor) {
  const auto c = expected_ll_decomposition_check(gaussian_truth(0, 1), dist::fit_order2(v1(1), m1(2)));
  EXPECT_LT(std::abs(c.direct - c.decomposed), 1e-8);
  EXPECT_NEAR(c.kl, gaussian_kl(v1(0), m1(1), v1(1), m1(2)), 1e-9);
}

TEST(Decomposition, HeavyTailTruth) {
  const auto c = expected_ll_decomposition_check(student_t_truth(3, 0, 1), dist::fit_order2(v1(0), m1(3)));
  EXPECT_LT(std::abs(c.direct - c.decomposed), 1e-6);
}

TEST(Decomposition, LaplaceAndStudentPredictors) {
  const auto a = expected_ll_decomposition_check(gaussian_truth(0.5, 2), dist::fit_laplace(v1(0), v1(1)));
  EXPECT_LT(std::abs(a.direct - a.decomposed), 1e-8);
  const auto b = expected_ll_decomposition_check(student_t_truth(2, 0, 1), dist::fit_student_t(1, v1(0), m1(1)));
  EXPECT_LT(std::abs(b.direct - b.decomposed), 1e-6);
}

TEST(Decomposition, TruthIsBestPredictor) {
  const auto truth = gaussian_truth(0.3, 1.5);
  const double best = expected_ll_decomposition_check(truth, dist::fit_order2(v1(0.3), m1(1.5))).direct;
  RandomStream rng(8);
  for (int i = 0; i < 20; ++i) {
    const double loc = 0.3 + rng.normal();
    const double sc = 0.3 + 2 * rng.uniform_open();
    const std::vector<dist::PredictiveDistribution> preds = {
        dist::fit_order2(v1(loc), m1(sc)), dist::fit_laplace(v1(loc), v1(sc)),
        dist::fit_student_t(1 + 4 * rng.uniform_open(), v1(loc), m1(sc))};
    for (const auto& p : preds) {
      EXPECT_LE(expected_ll_decomposition_check(truth, p).direct, best + 1e-8) << dist::family_tag(p);
    }
  }
}

TEST(TwoPoint, ScoreAndSymmetry) {
  EXPECT_NEAR(two_point_score(1), -1.418939, 1e-6);
  EXPECT_EQ(two_point_score(-1), two_point_score(1));
  EXPECT_THROW(two_point_score(0.5), DomainError);
}

TEST(TwoPoint, NormalTruthScoresAtLeastAsWellOnUnitInterval) {
  const dist::GaussianPred g(v1(0), m1(1));
  for (double y = -1.0; y <= 1.0; y += 0.01) EXPECT_GE(g.log_density(v1(y)), two_point_score(1) - 1e-15);
  // The unit interval holds about 68% of a standard normal.
  oracle::QuadratureSpec spec;
  spec.domain = {{-1.0, 1.0}};
  const double cover = oracle::adaptive_simpson([&](double s) { return std::exp(g.log_density(v1(s))); }, spec);
  EXPECT_NEAR(cover, std::erf(1.0 / std::sqrt(2.0)), 1e-10);
  EXPECT_GT(cover, 0.68);
  EXPECT_LT(cover, 0.70);
}

TEST(SensitivityGamma, DivergesNearZero) {
  double prev = kInf;
  for (int k = 1; k <= 12; ++k) {
    const double g = sensitivity_gamma(-std::pow(10.0, -k), 1.0, 0.0);
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_LT(prev, -27.0);
  EXPECT_THROW(sensitivity_gamma(0.0, 1.0, 0.0), DomainError);
}

TEST(SensitivityGamma, MaximizedAtReciprocalGap) {
  // d/dx [x (z - lower) + log(-x)] = 0 at x = -1 / (z - lower).
  const double gap = 2.0;
  const double at = sensitivity_gamma(-1.0 / gap, gap, 0.0);
  for (double x : {-0.4, -0.6, -0.1, -2.0}) EXPECT_LT(sensitivity_gamma(x, gap, 0.0), at);
}

}  // namespace
}  // namespace robpred::scoring
