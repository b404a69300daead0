#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "folio/error.hpp"
#include "folio/selection.hpp"
#include "test_support.hpp"

using namespace folio;

namespace {

CovarianceEstimate make_cov(const Eigen::MatrixXd& m) {
  CovarianceEstimate c;
  c.matrix = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) c.asset_ids.push_back("S" + std::to_string(i));
  return c;
}

Eigen::MatrixXd random_spd(std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(k, k);
}

}  // namespace

TEST_CASE("min_variance_weights: closed-form examples") {
  SUBCASE("identity") {
    auto r = min_variance_weights(make_cov(Eigen::MatrixXd::Identity(4, 4)));
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(r.weights[i] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(r.variance == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("diag(1, 2)") {
    Eigen::MatrixXd c = Eigen::Vector2d(1.0, 2.0).asDiagonal();
    auto r = min_variance_weights(make_cov(c));
    CHECK(r.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(r.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(r.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("singular matrix") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Ones(3, 3);
    CHECK_THROWS_AS(min_variance_weights(make_cov(c)), NumericalError);
  }
}

TEST_CASE("min_variance_weights: invariants on random SPD matrices") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t k = 2 + rep % 5;
    const Eigen::MatrixXd c = random_spd(k, rng);
    const auto r = min_variance_weights(make_cov(c));
    CHECK(std::abs(r.weights.sum() - 1.0) <= 1e-10);
    CHECK(std::abs(r.variance - r.weights.dot(c * r.weights)) <= 1e-10 * std::max(1.0, r.variance));
    for (int j = 0; j < 200; ++j) {
      Eigen::VectorXd w(k);
      for (auto& v : w) v = n(rng);
      w.array() += (1.0 - w.sum()) / static_cast<double>(k);
      CHECK(w.dot(c * w) >= r.variance - 1e-12);
    }
    const double lambda = 0.5 + rep;
    const auto s = min_variance_weights(make_cov(lambda * c));
    CHECK((s.weights - r.weights).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(s.variance - lambda * r.variance) <= 1e-10 * lambda * r.variance + 1e-14);
  }
}

TEST_CASE("empirical_covariance") {
  SUBCASE("perfectly correlated assets") {
    auto paths = test::random_paths(1, 300, 0.02, 4);
    // Returns of B are exactly 2x returns of A.
    std::vector<double> b(paths[0].size());
    b[0] = 50.0;
    for (std::size_t d = 1; d < b.size(); ++d) {
      const double ra = paths[0][d] / paths[0][d - 1] - 1.0;
      b[d] = b[d - 1] * (1.0 + 2.0 * ra);
    }
    paths.push_back(b);
    auto s = test::series_from_closes(paths);
    CovarianceOptions opt;
    opt.ridge = 1e-12;  // the raw matrix is singular and would be rejected
    const auto c = empirical_covariance(s, {1, 2}, opt);
    CHECK(std::abs(c.matrix(0, 1) - std::sqrt(c.matrix(0, 0) * c.matrix(1, 1))) <= 1e-10);
    CHECK(c.matrix(0, 1) == c.matrix(1, 0));
  }
  SUBCASE("independent white noise decorrelates") {
    auto s = test::series_from_closes(test::random_paths(2, 5001, 0.01, 77));
    const auto c = empirical_covariance(s, {1, 2});
    const double rho = c.matrix(0, 1) / std::sqrt(c.matrix(0, 0) * c.matrix(1, 1));
    CHECK(std::abs(rho) < 0.1);
  }
  SUBCASE("constant series give ridge on the diagonal") {
    auto s = test::series_from_closes({std::vector<double>(4, 10.0), std::vector<double>(4, 3.0)});
    CovarianceOptions opt;
    opt.ridge = 1e-6;
    const auto c = empirical_covariance(s, {1, 2}, opt);
    CHECK(c.matrix(0, 0) == 1e-6);
    CHECK(c.matrix(1, 1) == 1e-6);
    CHECK(c.matrix(0, 1) == 0.0);
    CHECK(c.ridge == 1e-6);
  }
  SUBCASE("preconditions") {
    auto s = test::series_from_closes(test::random_paths(2, 3, 0.01, 1));
    CHECK_THROWS_AS(empirical_covariance(s, {1, 2}), DataError);
    auto ok = test::series_from_closes(test::random_paths(2, 10, 0.01, 1));
    CHECK_THROWS_AS(empirical_covariance(ok, {0, 1}), std::invalid_argument);
  }
}

TEST_CASE("binomial") {
  CHECK(binomial(50, 6) == 15'890'700);
  CHECK(binomial(6, 6) == 1);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(3, 4) == 0);
  CHECK(binomial(10, 3) == 120);
}

TEST_CASE("select_subset on covariance matrices") {
  SUBCASE("k equal to the universe picks everything") {
    std::mt19937_64 rng(2);
    const auto r = select_subset(make_cov(random_spd(6, rng)), 6);
    CHECK(r.combinations_visited == 1);
    CHECK(r.indices == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  }
  SUBCASE("dominated asset is left out") {
    Eigen::MatrixXd c = Eigen::Vector3d(1.0, 1.0, 100.0).asDiagonal();
    const auto r = select_subset(make_cov(c), 2);
    CHECK(r.indices == std::vector<std::size_t>{0, 1});
    CHECK(r.best.subset == std::vector<std::string>{"S0", "S1"});
    CHECK(r.combinations_visited == 3);
  }
  SUBCASE("ties go to the lexicographically smallest subset") {
    const auto r = select_subset(make_cov(Eigen::MatrixXd::Identity(5, 5)), 2);
    CHECK(r.indices == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("cap and bounds") {
    SelectionOptions opt;
    opt.enumeration_cap = 100;
    CHECK_THROWS_AS(select_subset(make_cov(Eigen::MatrixXd::Identity(20, 20)), 5, opt),
                    std::invalid_argument);
    CHECK_THROWS_AS(select_subset(make_cov(Eigen::MatrixXd::Identity(3, 3)), 4),
                    std::invalid_argument);
  }
}

TEST_CASE("select_subset beats random subsets and is thread-count invariant") {
  std::mt19937_64 rng(99);
  const Eigen::MatrixXd c = random_spd(12, rng);
  SelectionOptions one;
  one.threads = 1;
  SelectionOptions three;
  three.threads = 3;
  const auto a = select_subset(make_cov(c), 4, one);
  const auto b = select_subset(make_cov(c), 4, three);
  CHECK(a.indices == b.indices);
  CHECK(a.best.variance == b.best.variance);
  CHECK(a.combinations_visited == binomial(12, 4));
  std::vector<std::size_t> pool(12);
  std::iota(pool.begin(), pool.end(), 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::size_t> pick(pool.begin(), pool.begin() + 4);
    Eigen::MatrixXd sub(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) sub(i, j) = c(pick[i], pick[j]);
    }
    CHECK(a.best.variance <= min_variance_weights(make_cov(sub)).variance + 1e-15);
  }
}

TEST_CASE("select_subset on a price series maps back to series indices") {
  auto paths = test::random_paths(4, 400, 0.02, 31);
  paths[2] = test::random_paths(1, 400, 0.001, 32)[0];
  paths[3] = test::random_paths(1, 400, 0.001, 33)[0];
  auto s = test::series_from_closes(paths);
  const auto r = select_subset(s, 2, {1, 2, 3, 4});
  CHECK(r.indices == std::vector<std::size_t>{3, 4});
  CHECK(r.best.subset == std::vector<std::string>{"A3", "A4"});
}
