#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hdgsc/linalg.hpp"

using namespace hdgsc;

TEST_CASE("dense LU solves a fixed 3x3 system exactly") {
  DenseMatrix a(3, 3);
  a(0, 0) = 2;  a(0, 1) = 1;  a(0, 2) = -1;
  a(1, 0) = -3; a(1, 1) = -1; a(1, 2) = 2;
  a(2, 0) = -2; a(2, 1) = 1;  a(2, 2) = 2;
  // Known solution of this classic system: x = (2, 3, -1).
  const std::vector<double> b = {8, -11, -3};
  const std::vector<double> x = dense_lu_solve(a, b);
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(x[2] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("dense LU residual stays small on random indefinite matrices") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 12;
    DenseMatrix a(n, n);
    std::vector<double> xref(n), b(n, 0.0);
    for (int i = 0; i < n; ++i) {
      xref[i] = dist(rng);
      for (int j = 0; j < n; ++j) a(i, j) = dist(rng);
      a(i, i) += 3.0;  // keep comfortably nonsingular
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b[i] += a(i, j) * xref[j];
    const std::vector<double> x = dense_lu_solve(a, b);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(xref[i]).epsilon(1e-10));
  }
}

TEST_CASE("dense LU reports the singular pivot") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1; a(0, 1) = 2;
  a(1, 0) = 2; a(1, 1) = 4;  // rank 1
  CHECK_THROWS_AS(DenseLU{a}, Error);
  try {
    DenseLU lu(a);
    (void)lu;
  } catch (const Error& e) {
    CHECK(e.module() == "linalg");
  }
}

TEST_CASE("CSR assembly sums duplicate triplets deterministically") {
  std::vector<Triplet> t = {{0, 0, 1.0}, {1, 1, 2.0}, {0, 0, 0.5}, {0, 1, -1.0}, {1, 0, -1.0}};
  const SparseMatrix a = SparseMatrix::from_triplets(2, std::move(t));
  CHECK(a.coeff(0, 0) == doctest::Approx(1.5));
  CHECK(a.coeff(0, 1) == doctest::Approx(-1.0));
  CHECK(a.coeff(1, 0) == doctest::Approx(-1.0));
  CHECK(a.coeff(1, 1) == doctest::Approx(2.0));
  CHECK(a.coeff(1, 2) == 0.0);  // out of pattern
  CHECK(a.asymmetry() == doctest::Approx(0.0));
  const std::vector<double> y = a.multiply({1.0, 1.0});
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(y[1] == doctest::Approx(1.0));
}

TEST_CASE("asymmetry measures the largest |a_ij - a_ji|") {
  std::vector<Triplet> t = {{0, 1, 2.0}, {1, 0, 2.0 + 3e-3}, {0, 0, 1.0}, {1, 1, 1.0}};
  const SparseMatrix a = SparseMatrix::from_triplets(2, std::move(t));
  CHECK(a.asymmetry() == doctest::Approx(3e-3).epsilon(1e-10));
}

TEST_CASE("sparse LU matches the dense solve on a random symmetric indefinite system") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int n = 40;
  DenseMatrix ad(n, n);
  std::vector<Triplet> trip;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = (j == i) ? ((i % 3 == 0) ? -4.0 : 4.0) + dist(rng)
                          : (std::abs(i - j) <= 2 ? dist(rng) : 0.0);
      if (v == 0.0) continue;
      ad(i, j) = v;
      ad(j, i) = v;
      trip.push_back({i, j, v});
      if (i != j) trip.push_back({j, i, v});
    }
  const SparseMatrix as = SparseMatrix::from_triplets(n, std::move(trip));
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = dist(rng);
  const std::vector<double> xs = sparse_lu_solve(as, b);
  const std::vector<double> xd = dense_lu_solve(ad, b);
  for (int i = 0; i < n; ++i) CHECK(xs[i] == doctest::Approx(xd[i]).epsilon(1e-9));
}

TEST_CASE("sparse LU rejects a singular matrix with a module-tagged error") {
  std::vector<Triplet> t = {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
  const SparseMatrix a = SparseMatrix::from_triplets(2, std::move(t));
  CHECK_THROWS_AS(sparse_lu_solve(a, {1.0, 0.0}), Error);
}

TEST_CASE("matrix entries are validated as finite") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(a.check_finite(), Error);
}
