#include "test_helpers.hpp"

#include <robpred/model/linear_sds.hpp>

#include <algorithm>

namespace robpred::model {
namespace {

using testing::sample_mean;
using testing::sample_var;

TEST(GaussianNoise, RejectsNonSpdCovariance) {
  Matrix c(2, 2);
  c << 1, 0, 0, -1;
  EXPECT_THROW(GaussianNoise(Vector::Zero(2), c), DomainError);
}

TEST(GaussianNoise, EmpiricalMeanNearZero) {
  RandomStream rng(11);
  const NoiseSpec spec = GaussianNoise::standard(2);
  const int n = 100000;
  Vector sum = Vector::Zero(2);
  for (int i = 0; i < n; ++i) sum += sample_noise(spec, rng);
  const Vector mean = sum / n;
  for (Index i = 0; i < 2; ++i) EXPECT_LT(std::abs(mean(i)), 3.0 / std::sqrt(n));
}

TEST(TwoPointNoise, OnlyTwoValuesAtHalfFrequency) {
  RandomStream rng(12);
  const NoiseSpec spec = TwoPointNoise(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0), 0.5);
  const int n = 100000;
  int plus = 0;
  for (int i = 0; i < n; ++i) {
    const double v = sample_noise(spec, rng)(0);
    ASSERT_TRUE(v == -1.0 || v == 1.0);
    plus += v == 1.0;
  }
  EXPECT_LT(std::abs(plus / double(n) - 0.5), 3.0 * 0.5 / std::sqrt(n));
}

TEST(TwoPointNoise, RejectsBadProbability) {
  EXPECT_THROW(TwoPointNoise(Vector::Zero(1), Vector::Ones(1), 1.5), DomainError);
}

TEST(StudentTNoise, RejectsNonPositiveDof) {
  EXPECT_THROW(StudentTNoise(0.0, Vector::Zero(1), Matrix::Identity(1, 1)), DomainError);
}

TEST(StudentTNoise, CauchyMedianNearZero) {
  RandomStream rng(13);
  const NoiseSpec spec = StudentTNoise::standard(1, 1.0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_noise(spec, rng)(0);
  std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
  // Median SE for a Cauchy: pi / (2 sqrt(n)).
  EXPECT_LT(std::abs(xs[xs.size() / 2]), 3.0 * std::numbers::pi / (2.0 * std::sqrt(xs.size())));
}

TEST(StudentTNoise, CauchyVarianceDoesNotSettle) {
  std::vector<double> small_vars, large_vars;
  for (std::uint64_t seed = 0; seed < 21; ++seed) {
    RandomStream rng(1000 + seed);
    const NoiseSpec spec = StudentTNoise::standard(1, 1.0);
    std::vector<double> small(1000), large(100000);
    for (auto& x : small) x = sample_noise(spec, rng)(0);
    for (auto& x : large) x = sample_noise(spec, rng)(0);
    small_vars.push_back(sample_var(small));
    large_vars.push_back(sample_var(large));
  }
  std::nth_element(small_vars.begin(), small_vars.begin() + 10, small_vars.end());
  std::nth_element(large_vars.begin(), large_vars.begin() + 10, large_vars.end());
  EXPECT_GT(large_vars[10], 10.0 * small_vars[10]);
}

TEST(StudentTNoise, Dof3VarianceIsThree) {
  RandomStream rng(14);
  const NoiseSpec spec = StudentTNoise::standard(1, 3.0);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = sample_noise(spec, rng)(0);
  EXPECT_NEAR(sample_var(xs), 3.0, 0.15);
}

LinearSds noiseless_identity() {
  return LinearSds({.F = Matrix::Identity(2, 2),
                    .G = Matrix::Zero(2, 0),
                    .H = Matrix::Identity(2, 2),
                    .process_noise = GaussianNoise::degenerate(Vector::Zero(2)),
                    .observation_noise = GaussianNoise::degenerate(Vector::Zero(2)),
                    .x0 = (Vector(2) << 1, 2).finished(),
                    .x0_cov = std::nullopt,
                    .inputs = {}});
}

TEST(SimulateTrajectory, NoiselessFixedPoint) {
  RandomStream rng(1);
  const auto t = simulate_trajectory(noiseless_identity(), 3, rng);
  ASSERT_EQ(t.size(), 3u);
  ASSERT_EQ(t.states.size(), 3u);
  for (const auto& y : t.observations) {
    EXPECT_EQ(y(0), 1.0);
    EXPECT_EQ(y(1), 2.0);
  }
}

TEST(SimulateTrajectory, InputsDriveTheState) {
  auto p = noiseless_identity().params();
  p.G = Matrix::Identity(2, 2);
  p.inputs = {Vector::Ones(2), Vector::Ones(2)};
  RandomStream rng(1);
  const auto t = simulate_trajectory(LinearSds(p), 2, rng);
  EXPECT_EQ(t.observations[0](0), 2.0);
  EXPECT_EQ(t.observations[1](1), 4.0);
}

TEST(SimulateTrajectory, ShortInputSequenceRejected) {
  auto p = noiseless_identity().params();
  p.G = Matrix::Identity(2, 2);
  p.inputs = {Vector::Ones(2)};
  RandomStream rng(1);
  EXPECT_THROW(simulate_trajectory(LinearSds(p), 5, rng), Error);
}

TEST(LinearSds, DimensionMismatchRejected) {
  auto p = noiseless_identity().params();
  p.H = Matrix::Identity(3, 3);
  EXPECT_THROW(LinearSds{p}, DimensionError);
}

TEST(SimulateTrajectory, SameSeedBitIdentical) {
  const auto sds = make_phi(PhiVariant::phi1);
  RandomStream a(99), b(99);
  const auto ta = simulate_trajectory(sds, 50, a);
  const auto tb = simulate_trajectory(sds, 50, b);
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_EQ(ta.observations[k], tb.observations[k]);
    EXPECT_EQ(ta.states[k], tb.states[k]);
  }
  EXPECT_EQ(ta.seed, 99u);
}

TEST(SimulateTrajectory, MeanFollowsPowersOfF) {
  const auto sds = make_phi(PhiVariant::phi2);
  const int trials = 10000;
  std::vector<std::vector<double>> comp(10);
  for (int i = 0; i < trials; ++i) {
    RandomStream rng = RandomStream::for_trajectory(5, static_cast<std::uint64_t>(i));
    const auto t = simulate_trajectory(sds, 5, rng);
    for (int k = 0; k < 5; ++k)
      for (int d = 0; d < 2; ++d) comp[2 * k + d].push_back(t.observations[k](d));
  }
  Vector x = sds.x0();
  for (int k = 0; k < 5; ++k) {
    x = sds.F() * x;
    const Vector want = sds.H() * x;
    for (int d = 0; d < 2; ++d) {
      const auto& xs = comp[2 * k + d];
      const double se = std::sqrt(sample_var(xs) / xs.size());
      EXPECT_LT(std::abs(sample_mean(xs) - want(d)), 3.0 * se) << "k=" << k + 1 << " d=" << d;
    }
  }
  EXPECT_DOUBLE_EQ(sds.H().row(0) * sds.F() * sds.x0(), 3.0);
}

TEST(MakePhi, SharedStructure) {
  for (auto v : {PhiVariant::phi1, PhiVariant::phi2}) {
    const auto s = make_phi(v);
    EXPECT_EQ(s.F(), (Matrix(2, 2) << 1, 1, 0, 1).finished());
    EXPECT_EQ(s.H(), Matrix::Identity(2, 2));
    EXPECT_EQ(s.x0(), (Vector(2) << 1, 2).finished());
    EXPECT_TRUE(is_gaussian(s.observation_noise()));
  }
}

TEST(MakePhi, NoiseFamilies) {
  const auto p1 = make_phi(PhiVariant::phi1);
  ASSERT_TRUE(std::holds_alternative<StudentTNoise>(p1.process_noise()));
  EXPECT_EQ(std::get<StudentTNoise>(p1.process_noise()).dof(), 1.0);
  const auto p2 = make_phi(PhiVariant::phi2);
  ASSERT_TRUE(is_gaussian(p2.process_noise()));
  EXPECT_EQ(std::get<GaussianNoise>(p2.process_noise()).cov(), Matrix::Identity(2, 2));
}

TEST(LinearSds, InitialCovarianceSampling) {
  const auto s = make_phi(PhiVariant::phi2).with_initial_covariance(4.0 * Matrix::Identity(2, 2));
  RandomStream rng(3);
  std::vector<double> xs;
  for (int i = 0; i < 50000; ++i) xs.push_back(s.sample_initial_state(rng)(0));
  EXPECT_NEAR(sample_var(xs), 4.0, 0.15);
  EXPECT_NEAR(sample_mean(xs), 1.0, 0.05);
}

}  // namespace
}  // namespace robpred::model
