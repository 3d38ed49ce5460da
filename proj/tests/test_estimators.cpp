#include <doctest.h>

#include <random>

#include "gaussmeta/error.hpp"
#include "gaussmeta/estimators.hpp"
#include "gaussmeta/linalg.hpp"
#include "oracles.hpp"

using namespace gaussmeta;

namespace {

TaskData scalar_task(double x, double y) {
  return TaskData(MatrixXd::Constant(1, 1, x), VectorXd::Constant(1, y));
}

MatrixXd one(double v) { return MatrixXd::Constant(1, 1, v); }

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("posterior hand values") {
    const PosteriorParams p = posterior_params(scalar_task(1, 3), VectorXd::Constant(1, 1.0), 1.0, one(1));
    CHECK(p.Tau(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(p.mu(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(plug_in_theta(VectorXd::Zero(1), scalar_task(1, 3), 1.0, one(1))(0) == doctest::Approx(1.5).epsilon(1e-14));
  }

  TEST_CASE("empty task returns the prior exactly") {
    std::mt19937_64 rng(2);
    const MatrixXd sigma = oracle::random_spd(3, rng);
    const VectorXd alpha = oracle::gaussian(3, 1, rng).col(0);
    const PosteriorParams p = posterior_params(TaskData(MatrixXd(0, 3), VectorXd(0)), alpha, 0.5, sigma);
    CHECK(p.mu == alpha);
    CHECK(p.Tau == sigma);
  }

  TEST_CASE("posterior matches explicit inverses on both solve paths") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 60; ++rep) {
      const Index d = 1 + static_cast<Index>(rng() % 5);
      const Index m = static_cast<Index>(rng() % 9);
      const MatrixXd x = oracle::gaussian(m, d, rng);
      const VectorXd y = oracle::gaussian(m, 1, rng).col(0);
      const MatrixXd sigma = oracle::random_spd(d, rng);
      const VectorXd alpha = oracle::gaussian(d, 1, rng).col(0);
      const double s2 = 0.2 + 0.3 * (rep % 4);
      const PosteriorParams p = posterior_params(TaskData(x, y), alpha, s2, sigma);
      const MatrixXd tau = oracle::dense_tau(x, s2, sigma);
      const VectorXd mu = tau * (sigma.inverse() * alpha + x.transpose() * y / s2);
      CHECK((p.Tau - tau).cwiseAbs().maxCoeff() < 1e-10 * (1 + tau.cwiseAbs().maxCoeff()));
      CHECK((p.mu - mu).cwiseAbs().maxCoeff() < 1e-9 * (1 + mu.cwiseAbs().maxCoeff()));
      // Tau <= Sigma in the PSD order.
      CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(sigma - p.Tau).eigenvalues().minCoeff() > -1e-10);
    }
  }

  TEST_CASE("rank-deficient prior confines the posterior to alpha + range(Sigma)") {
    std::mt19937_64 rng(6);
    const MatrixXd f = oracle::gaussian(4, 2, rng);
    const MatrixXd sigma = f * f.transpose();
    const VectorXd alpha = oracle::gaussian(4, 1, rng).col(0);
    const TaskData t(oracle::gaussian(6, 4, rng), oracle::gaussian(6, 1, rng).col(0));
    const PosteriorParams p = posterior_params(t, alpha, 0.5, sigma);
    const MatrixXd q = linalg::orthonormal_basis(f);
    const VectorXd shift = p.mu - alpha;
    CHECK((shift - q * (q.transpose() * shift)).norm() < 1e-10 * (1 + shift.norm()));
    // The epsilon -> 0 limit of the full-rank formula.
    const MatrixXd reg = sigma + 1e-9 * MatrixXd::Identity(4, 4);
    const PosteriorParams lim = posterior_params(t, alpha, 0.5, reg);
    CHECK((lim.mu - p.mu).norm() < 1e-6);
    CHECK((lim.Tau - p.Tau).norm() < 1e-6);
  }

  TEST_CASE("isotropic design gives the closed-form posterior eigenvalues") {
    std::mt19937_64 rng(8);
    const Index d = 2;
    const Index m = 6;
    const double s2 = 0.7;
    const MatrixXd x = oracle::isotropic_design(m, d, rng);
    MatrixXd sigma(2, 2);
    sigma << 2.0, 0.3, 0.3, 1.0;
    const PosteriorParams p = posterior_params(TaskData(x, VectorXd::Zero(m)), VectorXd::Zero(d), s2, sigma);
    const VectorXd ls = Eigen::SelfAdjointEigenSolver<MatrixXd>(sigma).eigenvalues();
    const VectorXd lt = Eigen::SelfAdjointEigenSolver<MatrixXd>(p.Tau).eigenvalues();
    for (Index j = 0; j < d; ++j) {
      CHECK(lt(j) == doctest::Approx(d * s2 * ls(j) / (d * s2 + m * ls(j))).epsilon(1e-12));
    }
  }

  TEST_CASE("plug-in approaches OLS under a diffuse prior and is affine in a") {
    std::mt19937_64 rng(10);
    const MatrixXd x = oracle::gaussian(8, 3, rng);
    const VectorXd y = oracle::gaussian(8, 1, rng).col(0);
    const TaskData t(x, y);
    const VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    const VectorXd diffuse = plug_in_theta(VectorXd::Zero(3), t, 1.0, 1e6 * MatrixXd::Identity(3, 3));
    CHECK((diffuse - ols).norm() < 1e-3 * ols.norm());

    const MatrixXd sigma = oracle::random_spd(3, rng);
    const VectorXd a1 = oracle::gaussian(3, 1, rng).col(0);
    const VectorXd a2 = oracle::gaussian(3, 1, rng).col(0);
    const VectorXd lhs = plug_in_theta(a1, t, 0.5, sigma) + plug_in_theta(a2, t, 0.5, sigma) -
                         2.0 * plug_in_theta((a1 + a2) / 2.0, t, 0.5, sigma);
    CHECK(lhs.norm() < 1e-10);
    CHECK((plug_in_theta(a1, t, 0.5, sigma) - posterior_params(t, a1, 0.5, sigma).mu).norm() < 1e-14);
  }

  TEST_CASE("MLE hand values and dense oracle") {
    const Dataset two({scalar_task(1, 1), scalar_task(1, 3)});
    CHECK(mle_alpha(two, 1.0, one(1))(0) == doctest::Approx(2.0).epsilon(1e-14));

    const VectorXd y = (VectorXd(3) << 1, -2, 0.5).finished();
    const Dataset eye({TaskData(MatrixXd::Identity(3, 3), y)});
    CHECK((mle_alpha(eye, 1.0, MatrixXd::Identity(3, 3)) - y).norm() < 1e-14);

    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 30; ++rep) {
      const Index d = 1 + static_cast<Index>(rng() % 4);
      std::vector<TaskData> tasks;
      for (int i = 0; i < 4; ++i) {
        const Index m = 1 + static_cast<Index>(rng() % 4);
        tasks.emplace_back(oracle::gaussian(m, d, rng), oracle::gaussian(m, 1, rng).col(0));
      }
      const Dataset ds(std::move(tasks));
      const MatrixXd sigma = oracle::random_spd(d, rng);
      if (linalg::psd_rank(alpha_information(ds.span(), 0.6, sigma)) < d) continue;
      const VectorXd expect = oracle::dense_mle(ds, 0.6, sigma);
      CHECK((mle_alpha(ds, 0.6, sigma) - expect).norm() < 1e-9 * (1 + expect.norm()));
    }
  }

  TEST_CASE("MLE reports a rank-deficient pooled design") {
    MatrixXd x = MatrixXd::Zero(2, 3);
    x(0, 0) = 1.0;
    x(1, 1) = 1.0;
    const Dataset ds({TaskData(x, VectorXd::Ones(2))});
    try {
      mle_alpha(ds, 1.0, MatrixXd::Identity(3, 3));
      FAIL("singular information accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Singular);
      REQUIRE(e.rank.has_value());
      CHECK(*e.rank == 2);
    }
  }

  TEST_CASE("MLE is unbiased with covariance equal to the inverse information") {
    std::mt19937_64 rng(13);
    const Index d = 2;
    const MatrixXd sigma = oracle::random_spd(d, rng);
    const VectorXd alpha = (VectorXd(2) << 1.0, -0.5).finished();
    const double s2 = 0.5;
    std::vector<MatrixXd> xs{oracle::gaussian(3, d, rng), oracle::gaussian(2, d, rng), oracle::gaussian(4, d, rng)};
    const MatrixXd f = linalg::psd_factor(sigma);
    const int trials = 10000;
    std::vector<VectorXd> draws;
    for (int t = 0; t < trials; ++t) {
      std::vector<TaskData> tasks;
      for (const auto& x : xs) {
        const VectorXd theta = alpha + f * oracle::gaussian(f.cols(), 1, rng).col(0);
        tasks.emplace_back(x, x * theta + std::sqrt(s2) * oracle::gaussian(x.rows(), 1, rng).col(0));
      }
      draws.push_back(mle_alpha(Dataset(std::move(tasks)), s2, sigma));
    }
    std::vector<TaskData> shape;
    for (const auto& x : xs) shape.emplace_back(x, VectorXd::Zero(x.rows()));
    const MatrixXd cov = alpha_information(shape, s2, sigma).inverse();
    VectorXd mean = VectorXd::Zero(d);
    for (const auto& v : draws) mean += v;
    mean /= trials;
    MatrixXd emp = MatrixXd::Zero(d, d);
    for (const auto& v : draws) emp += (v - mean) * (v - mean).transpose();
    emp /= trials - 1;
    for (Index i = 0; i < d; ++i) {
      CHECK(std::abs(mean(i) - alpha(i)) < 3.0 * std::sqrt(cov(i, i) / trials));
      for (Index j = 0; j < d; ++j) {
        // Var of a sample covariance entry: (S_ii S_jj + S_ij^2) / N.
        const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / trials);
        CHECK(std::abs(emp(i, j) - cov(i, j)) < 5.0 * se);
      }
    }
  }

  TEST_CASE("WBRLS limits and equivalence with the plug-in") {
    std::mt19937_64 rng(14);
    const MatrixXd x = oracle::gaussian(6, 3, rng);
    const VectorXd y = oracle::gaussian(6, 1, rng).col(0);
    const TaskData t(x, y);
    const VectorXd b = oracle::gaussian(3, 1, rng).col(0);
    const VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    CHECK((wbrls(t, {b, MatrixXd::Identity(3, 3), 0.0}) - ols).norm() < 1e-10);
    CHECK((wbrls(t, {b, MatrixXd::Identity(3, 3), 1e12}) - b).norm() < 1e-3);

    for (int rep = 0; rep < 200; ++rep) {
      const Index d = 1 + static_cast<Index>(rng() % 6);
      const Index m = 1 + static_cast<Index>(rng() % 12);
      const TaskData task(oracle::gaussian(m, d, rng), oracle::gaussian(m, 1, rng).col(0));
      const MatrixXd sigma = oracle::random_spd(d, rng);
      const VectorXd a = oracle::gaussian(d, 1, rng).col(0);
      const double s2 = 0.1 + 0.2 * (rep % 5);
      const VectorXd lhs = wbrls(task, {a, sigma.inverse(), s2});
      const VectorXd rhs = plug_in_theta(a, task, s2, sigma);
      CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
    }
  }

  TEST_CASE("WBRLS rejects a singular system") {
    const TaskData t(MatrixXd::Zero(1, 2), VectorXd::Zero(1));
    CHECK_THROWS_AS(wbrls(t, {VectorXd::Zero(2), MatrixXd::Identity(2, 2), 0.0}), Error);
  }

  TEST_CASE("alpha_for_prediction round trip") {
    std::mt19937_64 rng(15);
    for (int rep = 0; rep < 100; ++rep) {
      const Index d = 1 + static_cast<Index>(rng() % 5);
      const Index m = static_cast<Index>(rng() % 7);
      const TaskData t(oracle::gaussian(m, d, rng), oracle::gaussian(m, 1, rng).col(0));
      MatrixXd sigma = oracle::random_spd(d, rng);
      if (rep % 4 == 0) {
        const MatrixXd f = oracle::gaussian(d, 1, rng);
        sigma = f * f.transpose();
      }
      const VectorXd x = oracle::gaussian(d, 1, rng).col(0);
      const double v = 3.0 * oracle::gaussian(1, 1, rng)(0, 0);
      const VectorXd a = alpha_for_prediction(v, x, t, 0.4, sigma);
      const double scale = std::max(1.0, std::abs(v)) * std::max(1.0, a.norm() * x.norm());
      CHECK(std::abs(predict(plug_in_theta(a, t, 0.4, sigma), x) - v) < 1e-10 * scale);
    }
    const TaskData t(MatrixXd::Ones(1, 2), VectorXd::Ones(1));
    const VectorXd x = (VectorXd(2) << 1, 2).finished();
    const double v = predict(plug_in_theta(VectorXd::Zero(2), t, 1.0, MatrixXd::Identity(2, 2)), x);
    const VectorXd a = alpha_for_prediction(v, x, t, 1.0, MatrixXd::Identity(2, 2));
    CHECK(predict(plug_in_theta(a, t, 1.0, MatrixXd::Identity(2, 2)), x) == doctest::Approx(v).epsilon(1e-12));
    CHECK_THROWS_AS(alpha_for_prediction(1.0, VectorXd::Zero(2), t, 1.0, MatrixXd::Identity(2, 2)), Error);
  }

  TEST_CASE("predict") {
    CHECK(predict((VectorXd(2) << 1, 2).finished(), (VectorXd(2) << 3, 4).finished()) == 11.0);
    CHECK(predict(VectorXd::Zero(3), VectorXd::Ones(3)) == 0.0);
    CHECK_THROWS_AS(predict(VectorXd::Zero(3), VectorXd::Ones(2)), Error);
    std::mt19937_64 rng(16);
    const VectorXd a = oracle::gaussian(7, 1, rng).col(0);
    const VectorXd b = oracle::gaussian(7, 1, rng).col(0);
    double s = 0.0;
    for (Index i = 0; i < 7; ++i) s += a(i) * b(i);
    CHECK(predict(a, b) == doctest::Approx(s).epsilon(1e-14));
  }
}
