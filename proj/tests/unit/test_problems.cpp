#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <memory>

#include "newtonmr/problems/dataset.hpp"
#include "newtonmr/problems/gmm.hpp"
#include "newtonmr/problems/softmax.hpp"
#include "newtonmr/problems/test_functions.hpp"
#include "oracles.hpp"

using namespace newtonmr;

namespace {

void check_derivatives(const ObjectiveOracle& f, const Vector& center, double spread, int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < points; ++k) {
    const Vector x = center + spread * testsupport::gaussian_vector(f.dim(), rng);
    const Vector v = testsupport::gaussian_vector(f.dim(), rng);
    CHECK(testsupport::rel_error(f.gradient(x), testsupport::fd_gradient(f, x)) <= 1e-5);
    CHECK(testsupport::rel_error(f.hess_vec(x, v), testsupport::fd_hess_vec(f, x, v)) <= 1e-5);
  }
}

double condition_number(const Matrix& s) {
  const Vector e = Eigen::SelfAdjointEigenSolver<Matrix>(s).eigenvalues();
  return e(e.size() - 1) / e(0);
}

}  // namespace

TEST_CASE("softmax at zero equals n log C") {
  auto data = std::make_shared<const Dataset>(make_synthetic_softmax(40, 6, 4, 1));
  SoftmaxOracle f(data);
  CHECK(f.dim() == 3 * 6);
  CHECK(f.value(Vector::Zero(f.dim())) == doctest::Approx(40 * std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("softmax derivatives match finite differences") {
  auto data = std::make_shared<const Dataset>(make_synthetic_softmax(60, 5, 3, 2));
  SoftmaxOracle f(data);
  check_derivatives(f, Vector::Zero(f.dim()), 1.0, 10, 3);
}

TEST_CASE("softmax is stable for huge logits") {
  auto data = std::make_shared<const Dataset>(make_synthetic_softmax(20, 3, 3, 4));
  SoftmaxOracle f(data);
  const Vector x = Vector::Constant(f.dim(), 500.0);
  CHECK(std::isfinite(f.value(x)));
  CHECK(f.gradient(x).allFinite());
}

TEST_CASE("softmax with sparse features matches dense features") {
  const Dataset dense = make_synthetic_softmax(30, 4, 3, 5);
  Dataset sparse = dense;
  sparse.features = SparseMatrix(dense.dense_features().sparseView());
  SoftmaxOracle fd(std::make_shared<const Dataset>(dense)), fs(std::make_shared<const Dataset>(sparse));
  std::mt19937_64 rng(6);
  const Vector x = testsupport::gaussian_vector(fd.dim(), rng), v = testsupport::gaussian_vector(fd.dim(), rng);
  CHECK(fs.value(x) == doctest::Approx(fd.value(x)).epsilon(1e-13));
  CHECK(testsupport::rel_error(fs.gradient(x), fd.gradient(x)) <= 1e-13);
  CHECK(testsupport::rel_error(fs.hess_vec(x, v), fd.hess_vec(x, v)) <= 1e-13);
}

TEST_CASE("softmax prediction ties go to the lowest class") {
  Matrix a(4, 1);
  a << 1, 1, 1, 1;
  const Dataset d = make_dataset(a, {0, 0, 0, 1}, 2);
  CHECK(softmax_predict(d, Vector::Zero(1)) == std::vector<int>{0, 0, 0, 0});
  CHECK(softmax_accuracy(d, Vector::Zero(1)) == 0.75);
}

TEST_CASE("GMM mixing weight and symmetry") {
  CHECK(gmm_omega(0.0) == 0.5);
  for (double t : {-2.0, -0.3, 0.0, 1.1}) {
    const double h = 1e-6;
    CHECK(gmm_omega_d1(t) == doctest::Approx((gmm_omega(t + h) - gmm_omega(t - h)) / (2 * h)).epsilon(1e-7));
    CHECK(gmm_omega_d2(t) == doctest::Approx((gmm_omega_d1(t + h) - gmm_omega_d1(t - h)) / (2 * h)).epsilon(1e-6));
  }
  std::mt19937_64 rng(7);
  const Matrix pts = testsupport::gaussian_matrix(30, 3, rng);
  GmmOracle f(pts, Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  Vector x(7);
  x << 0.8, 0.1, -0.2, 0.3, 0.1, -0.2, 0.3;
  CHECK(std::abs(f.gradient(x)(0)) <= 1e-12);
}

TEST_CASE("GMM derivatives match finite differences") {
  const GmmData data = generate_gmm_data(5, 50, 8);
  GmmOracle f(data.points, data.precision1, data.precision2);
  CHECK(f.dim() == 11);
  check_derivatives(f, data.truth.stacked(), 0.5, 10, 9);
}

TEST_CASE("GMM data generation") {
  const GmmData a = generate_gmm_data(10, 10000, 11);
  CHECK(condition_number(a.sigma1) == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(condition_number(a.sigma2) == doctest::Approx(100.0).epsilon(1e-6));
  CHECK((a.sigma1 * a.precision1 - Matrix::Identity(10, 10)).norm() <= 1e-10);
  CHECK(gmm_omega(a.truth.x0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(a.truth.x1.maxCoeff() <= 0.0);
  CHECK(a.truth.x1.minCoeff() >= -1.0);
  CHECK(a.truth.x2.minCoeff() >= 0.0);
  CHECK(a.truth.x2.maxCoeff() <= 1.0);
  const double frac = static_cast<double>(a.n_component1) / 10000.0;
  CHECK(std::abs(frac - 0.3) <= 0.02);

  const GmmData b = generate_gmm_data(10, 10000, 11);
  CHECK(a.points == b.points);
  CHECK(a.precision1 == b.precision1);
  CHECK(a.truth.stacked() == b.truth.stacked());
  CHECK(generate_gmm_data(10, 100, 12).points != generate_gmm_data(10, 100, 13).points);
}

TEST_CASE("GMM Gauss-Newton matches sum of outer products") {
  const GmmData data = generate_gmm_data(2, 15, 14);
  GmmOracle f(data.points, data.precision1, data.precision2);
  std::mt19937_64 rng(15);
  const Vector x = data.truth.stacked() + 0.2 * testsupport::gaussian_vector(5, rng);
  const Vector v = testsupport::gaussian_vector(5, rng);
  // Each point's log-density gradient from a one-point oracle.
  Vector ref = Vector::Zero(5);
  for (Index i = 0; i < data.points.rows(); ++i) {
    GmmOracle single(data.points.row(i), data.precision1, data.precision2);
    const Vector gi = single.gradient(x);
    ref += gi * gi.dot(v);
  }
  CHECK(testsupport::rel_error(f.gauss_newton_vec(x, v), ref) <= 1e-12);
}

TEST_CASE("estimation error closed forms") {
  GroundTruth t;
  t.x0 = std::atanh(-0.4);
  t.x1 = (Vector(2) << -0.5, -0.2).finished();
  t.x2 = (Vector(2) << 0.7, 0.1).finished();
  Vector est = t.stacked();
  CHECK(estimation_error(est, t) == 0.0);
  est(0) = 1.1 * t.x0;
  CHECK(estimation_error(est, t) == doctest::Approx(0.05));
  est = t.stacked();
  est.tail(4) *= 2.0;
  CHECK(estimation_error(est, t) == doctest::Approx(0.5));
  t.x0 = 0.0;
  CHECK_THROWS_AS(estimation_error(est, t), std::invalid_argument);
}

TEST_CASE("libsvm parsing") {
  LibsvmOptions three;
  three.num_features = 3;
  Dataset d = parse_libsvm("1 1:0.5 3:2.0\n", three);
  CHECK(d.n() == 1);
  CHECK(d.p() == 3);
  CHECK(d.labels[0] == 0);
  CHECK(d.dense_features().row(0) == (Vector(3) << 0.5, 0.0, 2.0).finished().transpose());

  d = parse_libsvm("2\n# comment\n\n1 2:1\n", three);
  CHECK(d.n() == 2);
  CHECK(d.dense_features().row(0).isZero());
  CHECK(d.num_classes == 2);
  CHECK(d.labels == std::vector<int>{1, 0});

  try {
    parse_libsvm("1 1:1\n1 0:1.0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(parse_libsvm("1 2:1 1:1\n"), ParseError);
  CHECK_THROWS_AS(parse_libsvm("x 1:1\n"), ParseError);
  CHECK_THROWS_AS(parse_libsvm("1 1-1\n"), ParseError);
  CHECK_THROWS_AS(parse_libsvm("1 1:abc\n"), ParseError);
  CHECK_THROWS_AS(parse_libsvm("1 4:1\n", three), ParseError);

  LibsvmOptions labels;
  labels.label_values = std::vector<double>{-1.0, 1.0};
  CHECK(parse_libsvm("1 1:1\n", labels).labels[0] == 1);
  CHECK_THROWS_AS(parse_libsvm("3 1:1\n", labels), std::invalid_argument);
}

TEST_CASE("libsvm round trip is exact") {
  const std::filesystem::path dir(NEWTONMR_TEST_TMP);
  for (Index p : {Index{5}, Index{150}}) {
    Dataset d = make_synthetic_softmax(25, p, 3, 16);
    Matrix a = d.dense_features();
    for (Index i = 0; i < a.rows(); ++i) a(i, i % p) = 0.0;  // some explicit zeros
    d = make_dataset(a, d.labels, 3);
    const std::string path = (dir / ("round_trip_" + std::to_string(p) + ".libsvm")).string();
    write_libsvm(path, d);
    LibsvmOptions o;
    o.num_features = p;
    const Dataset back = read_libsvm(path, o);
    CHECK(back.is_sparse() == (p >= 100));
    CHECK(back.dense_features() == d.dense_features());
    CHECK(back.labels == d.labels);
  }
  CHECK_THROWS(read_libsvm((dir / "does_not_exist.libsvm").string()));
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(make_dataset(Matrix::Zero(2, 2), {0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_dataset(Matrix::Zero(2, 2), {0, 2}, 2), std::invalid_argument);
}

TEST_CASE("suite functions by hand") {
  X2Y2 f;
  const Vector one = Vector::Ones(2);
  CHECK(f.gradient(one) == (Vector(2) << 2, 2).finished());
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(dense_hessian(f, one)).eigenvalues();
  CHECK(eig(0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(eig(1) == doctest::Approx(6.0).epsilon(1e-14));

  const Vector a = (Vector(3) << 1, -2, 0.5).finished();
  SmoothedHinge hinge(a, 1.5);
  const Vector flat = -a;  // b <a, x> < 0
  CHECK(hinge.value(flat) == 0.0);
  CHECK(hinge.gradient(flat).isZero(0.0));
  CHECK(hinge.hess_vec(flat, Vector::Ones(3)).isZero(0.0));
  const Vector on_kink = (Vector(3) << 2, 1, 0).finished();  // <a, x> = 0
  CHECK(hinge.hess_vec(on_kink, Vector::Ones(3)).isZero(0.0));
  CHECK(testsupport::rel_error(hinge.hess_vec(a, a), 1.5 * 1.5 * a * a.squaredNorm()) <= 1e-15);

  Quartic1D q;
  const Vector two = Vector::Constant(1, 2.0);
  CHECK(q.value(two) == 16.0);
  CHECK(q.gradient(two)(0) == 32.0);
  CHECK(q.hess_vec(two, Vector::Ones(1))(0) == 48.0);
}

TEST_CASE("suite is deterministic and differentiable") {
  const auto a = test_functions(9), b = test_functions(9);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].x0 == b[i].x0);
    CHECK(a[i].oracle->value(a[i].x0) == b[i].oracle->value(b[i].x0));
    if (a[i].name != "smoothed_hinge") check_derivatives(*a[i].oracle, a[i].x0, 0.5, 5, 10 + i);
  }
}
