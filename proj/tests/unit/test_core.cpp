#include "test_helpers.hpp"

#include <robpred/core/linalg.hpp>

namespace robpred {
namespace {

TEST(SaturatingAdd, FiniteValuesAdd) { EXPECT_DOUBLE_EQ(saturating_add(-5.0, -3.0), -8.0); }

TEST(SaturatingAdd, NegativeInfinityAbsorbs) {
  EXPECT_EQ(saturating_add(-5.0, kNegInf), kNegInf);
  EXPECT_EQ(saturating_add(kNegInf, 1e308), kNegInf);
}

TEST(SaturatingAdd, NanBecomesNegativeInfinity) {
  EXPECT_EQ(saturating_add(kNaN, 1.0), kNegInf);
  EXPECT_EQ(saturating_add(kInf, kNegInf), kNegInf);
}

TEST(FactorSpd, RejectsIndefinite) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_THROW(factor_spd(m, "m"), DomainError);
}

TEST(FactorSpd, LogDetAndWhiten) {
  Matrix m(2, 2);
  m << 4, 0, 0, 9;
  const auto f = factor_spd(m, "m");
  EXPECT_NEAR(f.log_det(), std::log(36.0), 1e-14);
  Vector r(2);
  r << 2, 3;
  EXPECT_NEAR(f.whiten(r).squaredNorm(), 2.0, 1e-14);
}

TEST(FactorSpd, JitterRescuesSingular) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  const auto f = factor_spd_with_jitter(m, 1e-9, "m");
  EXPECT_GT(f.jitter, 0.0);
}

TEST(Asymmetry, MeasuresMaxDeviation) {
  Matrix m(2, 2);
  m << 1, 2, 2.5, 1;
  EXPECT_DOUBLE_EQ(asymmetry(m), 0.5);
  EXPECT_DOUBLE_EQ(asymmetry(symmetrize(m)), 0.0);
}

TEST(RandomStream, SameSeedSameSequence) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(RandomStream, TrajectoryStreamsDiffer) {
  EXPECT_NE(derive_stream_seed(1, 0), derive_stream_seed(1, 1));
  EXPECT_NE(derive_stream_seed(1, 0), derive_stream_seed(2, 0));
  EXPECT_EQ(RandomStream::for_trajectory(7, 3).seed(), derive_stream_seed(7, 3));
}

TEST(RandomStream, UniformOpenStaysInside) {
  RandomStream rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform_open();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace robpred
