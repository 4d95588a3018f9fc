#include "generators.hpp"

#include "hdpower/alternatives.hpp"
#include "hdpower/analytic.hpp"
#include "hdpower/error.hpp"
#include "hdpower/kernels.hpp"
#include "hdpower/statistics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace hdpower {
namespace {

using testing::for_each_case;
using testing::normal_matrix;
using testing::Rng;

/// Gram matrices of the kernel induced by the L2 distance: 0.5 (|x| + |y| - |x - y|).
Eigen::MatrixXd induced_gram(const DataMatrix& x, const DataMatrix& y) {
  Eigen::MatrixXd k(x.n(), y.n());
  for (Index i = 0; i < x.n(); ++i) {
    for (Index j = 0; j < y.n(); ++j) {
      const Eigen::Map<const Eigen::VectorXd> a(x.row(i).data(), x.d());
      const Eigen::Map<const Eigen::VectorXd> b(y.row(j).data(), y.d());
      k(i, j) = 0.5 * (a.norm() + b.norm() - (a - b).norm());
    }
  }
  return k;
}

TEST(Mmd2Biased, IdenticalSamplesGiveZero) {
  Rng rng(1);
  const auto x = normal_matrix(rng, 12, 3);
  EXPECT_NEAR(mmd2_biased(x, x, KernelSpec::gaussian(1.0)), 0.0, 1e-15);
}

TEST(Mmd2Biased, SinglePoints) {
  const auto v = mmd2_biased(DataMatrix::column({0.0}), DataMatrix::column({1.0}),
                             KernelSpec::gaussian(1.0));
  EXPECT_NEAR(v, 1.2642411176571153, 1e-15);
}

TEST(Mmd2Biased, NeverNegative) {
  for_each_case(100, 21, [](Rng& rng) {
    const Index d = testing::uniform_index(rng, 1, 4);
    const auto x = normal_matrix(rng, testing::uniform_index(rng, 1, 10), d);
    const auto y = normal_matrix(rng, testing::uniform_index(rng, 1, 10), d, 0.5);
    for (auto family : {KernelFamily::Gaussian, KernelFamily::Laplace}) {
      EXPECT_GE(mmd2_biased(x, y, KernelSpec{family, testing::uniform_real(rng, 0.2, 3.0)}), 0.0);
    }
  });
}

TEST(Mmd2Unbiased, ConstantSamplesGiveZero) {
  const auto z = DataMatrix::column({0.0, 0.0});
  EXPECT_EQ(mmd2_unbiased(z, z, KernelSpec::gaussian(1.0)), 0.0);
  EXPECT_EQ(mmd2_unbiased(z, z, KernelSpec::laplace(3.0)), 0.0);
}

TEST(Mmd2Unbiased, HandExampleIsNegative) {
  const auto v = mmd2_unbiased(DataMatrix::column({0.0, 2.0}), DataMatrix::column({1.0, 3.0}),
                               KernelSpec::gaussian(2.0));
  EXPECT_NEAR(v, -0.48514190454515483, 1e-14);
}

TEST(Mmd2Unbiased, NeedsTwoPointsPerGroup) {
  EXPECT_THROW(mmd2_unbiased(DataMatrix::column({0.0}), DataMatrix::column({1.0, 2.0}),
                             KernelSpec::gaussian(1.0)),
               InsufficientSampleError);
}

TEST(Mmd2Unbiased, UnbiasedUnderTheNull) {
  Rng rng(22);
  std::vector<double> values;
  for (int r = 0; r < 1000; ++r) {
    values.push_back(mmd2_unbiased(normal_matrix(rng, 20, 1), normal_matrix(rng, 20, 1),
                                   KernelSpec::gaussian(1.0)));
  }
  const auto s = testing::summarize(values);
  EXPECT_LT(std::abs(s.mean), 3.0 * s.se) << "mean " << s.mean << " se " << s.se;
}

TEST(Mmd2Unbiased, BiasedMinusUnbiasedVanishesForLargeSamples) {
  Rng rng(23);
  const auto x = normal_matrix(rng, 5000, 2);
  const auto y = normal_matrix(rng, 5000, 2);
  const auto spec = KernelSpec::gaussian(1.5);
  EXPECT_LT(std::abs(mmd2_biased(x, y, spec) - mmd2_unbiased(x, y, spec)), 0.01);
}

TEST(Mmd2UnbiasedStreaming, MatchesDenseEstimator) {
  for_each_case(12, 24, [](Rng& rng) {
    const Index d = testing::uniform_index(rng, 1, 40);
    const auto x = normal_matrix(rng, testing::uniform_index(rng, 2, 700), d);
    const auto y = normal_matrix(rng, testing::uniform_index(rng, 2, 700), d, 1.3);
    for (auto family : {KernelFamily::Gaussian, KernelFamily::Laplace}) {
      const KernelSpec spec{family, std::sqrt(double(d)) * (family == KernelFamily::Laplace ? 3 : 1)};
      const double dense = mmd2_unbiased(x, y, spec);
      EXPECT_NEAR(mmd2_unbiased_streaming(x, y, spec), dense, 1e-10 * (1.0 + std::abs(dense)));
      EXPECT_NEAR(mmd2_unbiased_streaming(x, y, spec, Precision::Single), dense, 2e-5);
    }
  });
}

TEST(EnergyTwoSample, HandValues) {
  Rng rng(25);
  const auto x = normal_matrix(rng, 7, 2);
  EXPECT_NEAR(energy_two_sample(x, x), 0.0, 1e-14);
  EXPECT_DOUBLE_EQ(energy_two_sample(DataMatrix::column({0.0}), DataMatrix::column({1.0})), 2.0);
}

TEST(EnergyTwoSample, EqualsBiasedMmdOfInducedKernel) {
  for_each_case(50, 26, [](Rng& rng) {
    const Index d = testing::uniform_index(rng, 1, 4);
    const auto x = normal_matrix(rng, testing::uniform_index(rng, 1, 10), d);
    const auto y = normal_matrix(rng, testing::uniform_index(rng, 1, 10), d, 2.0);
    const double via_kernel =
        mmd2_biased(induced_gram(x, x), induced_gram(y, y), induced_gram(x, y));
    EXPECT_NEAR(energy_two_sample(x, y), 2.0 * via_kernel, 1e-10);
  });
}

TEST(DoubleCenter, ConstantMatrixVanishes) {
  EXPECT_TRUE(double_center(Eigen::MatrixXd::Constant(5, 5, 3.7)).isZero(1e-14));
}

TEST(DoubleCenter, TwoByTwo) {
  const double a = 2.5;
  Eigen::MatrixXd m(2, 2);
  m << 0, a, a, 0;
  Eigen::MatrixXd expected(2, 2);
  expected << -a / 2, a / 2, a / 2, -a / 2;
  EXPECT_TRUE(double_center(m).isApprox(expected, 1e-15));
}

TEST(DoubleCenter, RowAndColumnSumsVanish) {
  for_each_case(50, 27, [](Rng& rng) {
    const Index n = testing::uniform_index(rng, 1, 20);
    const auto a = testing::uniform_square(rng, n);
    const auto c = double_center(a);
    const double tol = 1e-10 * double(n) * a.cwiseAbs().maxCoeff();
    EXPECT_LE(c.rowwise().sum().cwiseAbs().maxCoeff(), tol);
    EXPECT_LE(c.colwise().sum().cwiseAbs().maxCoeff(), tol);
  });
}

TEST(Dcov2, HandExample) {
  const auto x = DataMatrix::column({0.0, 1.0});
  const auto y = DataMatrix::column({0.0, 2.0});
  EXPECT_NEAR(dcov2(x, y), 0.5, 1e-15);
  EXPECT_NEAR(dcor2(x, y), 1.0, 1e-15);
}

TEST(Dcov2, ConstantSampleGivesZero) {
  Rng rng(28);
  const auto x = normal_matrix(rng, 9, 3);
  const auto y = DataMatrix(RowMatrix::Constant(9, 2, 4.0));
  EXPECT_NEAR(dcov2(x, y), 0.0, 1e-15);
  EXPECT_THROW(dcor2(x, y), DegenerateDataError);
}

TEST(Dcov2, TranslationInvariant) {
  for_each_case(20, 29, [](Rng& rng) {
    const Index n = testing::uniform_index(rng, 2, 15);
    const auto x = normal_matrix(rng, n, 3);
    const auto y = normal_matrix(rng, n, 2);
    RowMatrix shifted = x.values();
    shifted.rowwise() += Eigen::RowVectorXd::Constant(3, testing::uniform_real(rng, -5, 5));
    EXPECT_NEAR(dcov2(DataMatrix(shifted), y), dcov2(x, y), 1e-12);
  });
}

TEST(Dcov2, PairingErrors) {
  const auto x = DataMatrix::column({0.0, 1.0, 2.0});
  const auto y = DataMatrix::column({0.0, 1.0});
  EXPECT_THROW(dcov2(x, y), PairingError);
  EXPECT_THROW(hsic(x, y, KernelSpec::gaussian(1.0), KernelSpec::gaussian(1.0)), PairingError);
}

TEST(Dcor2, SelfIsOneAndRangeHolds) {
  for_each_case(40, 30, [](Rng& rng) {
    const Index n = testing::uniform_index(rng, 3, 25);
    const auto x = normal_matrix(rng, n, testing::uniform_index(rng, 1, 5));
    const auto y = normal_matrix(rng, n, testing::uniform_index(rng, 1, 5));
    EXPECT_NEAR(dcor2(x, x), 1.0, 1e-12);
    const double r = dcor2(x, y);
    EXPECT_GE(r, -1e-12);
    EXPECT_LE(r, 1.0 + 1e-12);
    EXPECT_GE(dcov2(x, y), -1e-12);
    EXPECT_GE(hsic(x, y, KernelSpec::gaussian(1.0), KernelSpec::laplace(2.0)), -1e-12);
  });
}

TEST(UCenter, ConstantMatrixVanishesOffDiagonal) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(6, 6, 1.7);
  a.diagonal().setZero();
  EXPECT_TRUE(u_center(a).isZero(1e-14));
}

TEST(UCenter, ZeroDiagonalAndOffsetInvariance) {
  for_each_case(30, 31, [](Rng& rng) {
    const Index n = testing::uniform_index(rng, 4, 15);
    const auto a = testing::uniform_square(rng, n);
    const auto u = u_center(a);
    EXPECT_TRUE((u.diagonal().array() == 0.0).all());
    const double c = testing::uniform_real(rng, -10, 10);
    const Eigen::MatrixXd offset =
        a + c * (Eigen::MatrixXd::Ones(n, n) - Eigen::MatrixXd::Identity(n, n));
    EXPECT_LE((u_center(offset) - u).cwiseAbs().maxCoeff(), 1e-10);
  });
}

TEST(UCenter, NeedsFourPoints) {
  EXPECT_THROW(u_center(Eigen::MatrixXd::Ones(3, 3)), InsufficientSampleError);
  const auto x = DataMatrix::column({0.0, 1.0, 2.0});
  EXPECT_THROW(udcor2(x, x), InsufficientSampleError);
}

TEST(Udcor2, SelfIsOne) {
  Rng rng(32);
  const auto x = normal_matrix(rng, 10, 3);
  EXPECT_NEAR(udcor2(x, x), 1.0, 1e-10);
}

TEST(Udcor2, UnbiasedUnderIndependence) {
  Rng rng(33);
  std::vector<double> values;
  for (int r = 0; r < 500; ++r) values.push_back(udcor2(normal_matrix(rng, 30, 5), normal_matrix(rng, 30, 5)));
  const auto s = testing::summarize(values);
  EXPECT_LT(std::abs(s.mean), 3.0 * s.se) << "mean " << s.mean << " se " << s.se;
}

TEST(Hsic, ConstantSampleGivesZero) {
  Rng rng(34);
  const auto x = normal_matrix(rng, 8, 2);
  const auto y = DataMatrix(RowMatrix::Constant(8, 1, -2.0));
  EXPECT_NEAR(hsic(x, y, KernelSpec::gaussian(1.0), KernelSpec::gaussian(1.0)), 0.0, 1e-15);
}

TEST(Hsic, InducedKernelsGiveQuarterDcov) {
  for_each_case(50, 35, [](Rng& rng) {
    const Index n = testing::uniform_index(rng, 2, 10);
    const auto x = normal_matrix(rng, n, testing::uniform_index(rng, 1, 4));
    const auto y = normal_matrix(rng, n, testing::uniform_index(rng, 1, 4));
    EXPECT_NEAR(centered_product(induced_gram(x, x), induced_gram(y, y)), dcov2(x, y) / 4.0, 1e-10);
  });
}

TEST(Statistics, InvariantUnderSharedRowPermutation) {
  for_each_case(20, 36, [](Rng& rng) {
    const Index n = testing::uniform_index(rng, 4, 12);
    const auto x = normal_matrix(rng, n, 2);
    const auto y = normal_matrix(rng, n, 3);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    const auto px = x.select_rows(order);
    const auto py = y.select_rows(order);
    const auto g = KernelSpec::gaussian(1.1);
    EXPECT_NEAR(dcov2(px, py), dcov2(x, y), 1e-12);
    EXPECT_NEAR(dcor2(px, py), dcor2(x, y), 1e-12);
    EXPECT_NEAR(udcor2(px, py), udcor2(x, y), 1e-12);
    EXPECT_NEAR(hsic(px, py, g, g), hsic(x, y, g, g), 1e-12);
    const auto y2 = normal_matrix(rng, n, 2);
    const auto py2 = y2.select_rows(order);
    EXPECT_NEAR(mmd2_biased(px, py2, g), mmd2_biased(x, y2, g), 1e-12);
    EXPECT_NEAR(mmd2_unbiased(px, py2, g), mmd2_unbiased(x, y2, g), 1e-12);
    EXPECT_NEAR(energy_two_sample(px, py2), energy_two_sample(x, y2), 1e-12);
  });
}

TEST(BiasContrast, BiasedDcorInflatesInHighDimension) {
  double biased = 0.0;
  double unbiased = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto x = normal_matrix(rng, 30, 1000);
    const auto y = normal_matrix(rng, 30, 1000);
    biased += dcor2(x, y);
    unbiased += udcor2(x, y);
  }
  EXPECT_GT(biased / 100.0, 0.5);
  EXPECT_LT(std::abs(unbiased / 100.0), 0.1);
}

TEST(EstimationBound, HandValues) {
  EXPECT_NEAR(mmd_estimation_bound(1.0, 100, 100, 2.0 / std::exp(1.0)), 0.8, 1e-12);
  EXPECT_EQ(mmd_estimation_bound(0.0, 10, 20, 0.1), 0.0);
  EXPECT_THROW(mmd_estimation_bound(1.0, 10, 10, 1.0), InputError);
  EXPECT_THROW(mmd_estimation_bound(1.0, 10, 10, 0.0), InputError);
}

TEST(EstimationBound, CoversBiasedEstimator) {
  // Truth from the exact Gaussian formula evaluated at the bandwidth matching
  // the library kernel exp(-t^2/g^2): for these parameters that is g/sqrt(2).
  const double gamma = 1.5;
  const double truth = mmd2_gaussian_exact(1.0, 1.0, gamma / std::sqrt(2.0), 1);
  const double bound = mmd_estimation_bound(1.0, 200, 200, 0.05);
  int exceed = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto [x, y] = sample_two_sample(GaussianMeanShift{1, 1.0, 1.0}, 200, 200, seed);
    if (std::abs(mmd2_biased(x, y, KernelSpec::gaussian(gamma)) - truth) > bound) ++exceed;
  }
  EXPECT_EQ(exceed, 0);
}

TEST(ComputeStatistic, ResolvesBandwidthAndReportsIt) {
  const auto x = DataMatrix::column({0.0, 1.0});
  const auto y = DataMatrix::column({3.0});
  StatisticKind kind;
  kind.statistic = Statistic::MMD2Biased;
  const auto v = compute_statistic(kind, x, y);
  EXPECT_DOUBLE_EQ(v.gamma_x, 2.0);
  EXPECT_EQ(v.n, 2);
  EXPECT_EQ(v.m, 1);
  EXPECT_NEAR(v.value, mmd2_biased(x, y, KernelSpec::gaussian(2.0)), 1e-15);
}

TEST(ComputeStatistic, NameRoundTrip) {
  for (const char* name : {"mmd2b", "mmd2u", "energy", "dcov2", "dcor2", "udcor2", "hsic"}) {
    EXPECT_EQ(to_string(parse_statistic(name)), name);
  }
  EXPECT_THROW(parse_statistic("mmd"), InputError);
}

}  // namespace
}  // namespace hdpower
