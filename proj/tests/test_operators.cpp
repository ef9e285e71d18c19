#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ttf/baselines.hpp"

using namespace ttf;

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TEST_CASE("1D stencils") {
  Eigen::MatrixXd lap = laplace_1d(4, 0.5);
  CHECK(lap(0, 0) == doctest::Approx(-8.0));
  CHECK(lap(0, 1) == doctest::Approx(4.0));
  CHECK(lap(1, 0) == doctest::Approx(4.0));
  CHECK(lap(0, 2) == 0.0);
  CHECK(lap(3, 3) == doctest::Approx(-8.0));
  Eigen::MatrixXd c = central_diff_1d(4, 0.5);
  CHECK(c(0, 1) == doctest::Approx(1.0));
  CHECK(c(1, 0) == doctest::Approx(-1.0));
  CHECK(c(0, 0) == 0.0);
  CHECK((c + c.transpose()).norm() == doctest::Approx(0.0));
}

TEST_CASE("grid geometry") {
  Grid g(5.0, 3, 4);
  CHECK(g.points_per_axis() == 16);
  CHECK(g.h() == doctest::Approx(10.0 / 15.0));
  CHECK(g.coord(0) == doctest::Approx(-5.0));
  CHECK(g.coord(15) == doctest::Approx(5.0));
  CHECK(g.total_points() == 4096);
  CHECK(qtt_shape(g).modes.size() == 12);
}

TEST_CASE("sample_field matches dense samples, axis-1 fastest") {
  Grid g(2.0, 2, 3);
  ScalarField f = [](const Eigen::VectorXd& x) { return x[0] + 10.0 * x[1]; };
  Eigen::VectorXd dense = sample_field_dense(g, f);
  CHECK(dense.size() == 64);
  CHECK(dense[0] == doctest::Approx(-2.0 - 20.0));
  CHECK(dense[1] == doctest::Approx(g.coord(1) - 20.0));  // axis 1 fastest
  CHECK(dense[8] == doctest::Approx(-2.0 + 10.0 * g.coord(1)));
  TtTensord t = sample_field(g, f, RoundingPolicy{1e-12});
  CHECK((tt_to_full(t) - dense).norm() <= 1e-10 * dense.norm());
}

TEST_CASE("coordinate tensors") {
  Grid g(3.0, 3, 3);
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::VectorXd want =
        sample_field_dense(g, [axis](const Eigen::VectorXd& x) { return x[axis]; });
    CHECK((tt_to_full(coordinate_tensor(g, axis)) - want).norm() <= 1e-10 * want.norm());
  }
}

TEST_CASE("mode operator equals the Kronecker-chain oracle") {
  Grid g(1.0, 2, 2);  // 4 points per axis, 16 nodes
  Eigen::MatrixXd op = central_diff_1d(4, g.h());
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  // Axis 1 fastest: operator on axis 0 acts on the fast index.
  CHECK((tt_matrix_to_dense(mode_operator(g, 0, op)) - kron(id, op)).norm() <= 1e-10);
  CHECK((tt_matrix_to_dense(mode_operator(g, 1, op)) - kron(op, id)).norm() <= 1e-10);
}

TEST_CASE("Laplace QTT ranks bounded by 4") {
  for (int d = 1; d <= 3; ++d) {
    for (int level : {4, 6, 8}) {
      Grid g(1.0, d, level);
      TtMatrixd lap = assemble_laplace(g, RoundingPolicy{1e-12});
      for (Index r : lap.ranks()) CHECK(r <= 4);
    }
  }
}

TEST_CASE("convection QTT ranks bounded by 5dr") {
  ModelSpec m = make_almost_linear();
  for (int level : {4, 6}) {
    Grid g(5.0, 3, level);
    Index rf = 1;
    for (int k = 0; k < 3; ++k) {
      TtTensord fk = sample_field(g, m.drift[k], RoundingPolicy{1e-12});
      for (Index r : fk.ranks()) rf = std::max(rf, r);
    }
    TtMatrixd conv = assemble_convection(g, m, RoundingPolicy{1e-12});
    for (Index r : conv.ranks()) CHECK(r <= 5 * 3 * rf);
  }
}

TEST_CASE("Laplace operator matches the dense oracle in 2D") {
  Grid g(1.0, 2, 3);
  Eigen::MatrixXd lap1 = laplace_1d(8, g.h());
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(8, 8);
  Eigen::MatrixXd want = kron(id, lap1) + kron(lap1, id);
  Eigen::MatrixXd got = tt_matrix_to_dense(assemble_laplace(g, RoundingPolicy{1e-12}));
  CHECK((got - want).norm() <= 1e-9 * want.norm());
}

TEST_CASE("generator matches the dense FD route") {
  for (const char* name : {"almost_linear", "cubic_sensor"}) {
    ModelSpec m = model_by_name(name);
    Grid g(m.default_a, 3, 3);
    GeneratorOperator gen = assemble_generator(g, m, RoundingPolicy{1e-12});
    Eigen::MatrixXd qtt = tt_matrix_to_dense(gen.full);
    Eigen::MatrixXd fd = Eigen::MatrixXd(dense_generator(g, m));
    CHECK((qtt - fd).norm() <= 1e-9 * fd.norm());
  }
}

TEST_CASE("generator of the zero model vanishes") {
  ModelSpec m = make_zero_model(2, 0.0, 1.0);
  Grid g(1.0, 2, 3);
  GeneratorOperator gen = assemble_generator(g, m, RoundingPolicy{1e-12});
  CHECK(tt_norm(gen.full) <= 1e-12);
}

TEST_CASE("stability report accepts the paper settings") {
  ModelSpec m1 = model_by_name("almost_linear");
  Grid g1(m1.default_a, 3, 6);
  StabilityReport rep = check_stability(g1, m1, 0.05 / 100.0);
  CHECK(rep.ok());
  CHECK(rep.tau_max > 0.05 / 100.0);

  ModelSpec m2 = model_by_name("cubic_sensor");
  Grid g2(m2.default_a, 3, 6);
  StabilityReport rep2 = check_stability(g2, m2, 0.05 / 200.0);
  CHECK(rep2.ok());

  // A hopelessly large step must be rejected.
  CHECK_FALSE(check_stability(g1, m1, 10.0).tau_ok);
}

TEST_CASE("builtin model definitions") {
  ModelSpec m = model_by_name("almost_linear");
  CHECK(m.d == 3);
  CHECK(m.m == 3);
  CHECK(m.q == doctest::Approx(1.5));
  Eigen::VectorXd x(3);
  x << 0.5, -1.0, 2.0;
  CHECK(m.drift[0](x) == doctest::Approx(-0.15));
  CHECK(m.observation[0](x) == doctest::Approx(-1.0 + std::sin(0.5)));
  CHECK(m.observation[2](x) == doctest::Approx(0.5 + std::sin(2.0)));
  CHECK(m.sigma0(x) == doctest::Approx(std::exp(-4.0 * x.squaredNorm())));

  ModelSpec c = model_by_name("cubic_sensor");
  CHECK(c.drift[0](x) == doctest::Approx(-0.6 * 0.5 - 0.1 * (-1.0)));
  CHECK(c.observation[0](x) == doctest::Approx(-1.0));  // x2^3
  CHECK(c.sigma0(x) ==
        doctest::Approx(std::exp(-10.0 * (std::pow(0.5, 4) + 1.0 + 16.0))));

  CHECK(is_known_model("almost_linear"));
  CHECK_FALSE(is_known_model("nope"));
  CHECK_THROWS(model_by_name("nope"));
}
