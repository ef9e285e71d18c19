#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ttf/baselines.hpp"

#include <cstdio>

using namespace ttf;

namespace {

ObservationSeries make_obs(const ModelSpec& model, double dT, int intervals,
                           uint64_t seed) {
  TruthPath truth = simulate_truth(model, dT * intervals, dT / 10.0, seed);
  return subsample_observations(truth, dT);
}

}  // namespace

TEST_CASE("degenerate zero model gives the identity propagator") {
  ModelSpec m = make_zero_model(2, 0.0, 1.0);
  Grid g(1.0, 2, 3);
  OfflineBundle b = offline_build(m, g, 0.05, 10, RoundingPolicy{1e-6},
                                  RoundingPolicy{1e-6});
  for (Index r : b.propagator.ranks()) CHECK(r == 1);
  Eigen::MatrixXd p = tt_matrix_to_dense(b.propagator);
  CHECK((p - Eigen::MatrixXd::Identity(64, 64)).norm() <= 1e-9);
}

TEST_CASE("propagator matches the dense matrix power within steps*eps") {
  ModelSpec m = model_by_name("almost_linear");
  Grid g(m.default_a, 3, 3);
  const double eps = 5e-4;
  const int steps = 100;
  OfflineBundle b =
      offline_build(m, g, 0.05, steps, RoundingPolicy{eps}, RoundingPolicy{1e-6});

  GeneratorOperator gen = assemble_generator(g, m, RoundingPolicy{1e-12});
  Eigen::MatrixXd step = 0.05 / steps * tt_matrix_to_dense(gen.full) +
                         Eigen::MatrixXd::Identity(512, 512);
  Eigen::MatrixXd want = Eigen::MatrixXd::Identity(512, 512);
  for (int i = 0; i < steps; ++i) want = step * want;
  Eigen::MatrixXd got = tt_matrix_to_dense(b.propagator);
  CHECK((got - want).norm() <= steps * eps * want.norm());
}

TEST_CASE("offline_build validates input and records stability") {
  ModelSpec m = model_by_name("almost_linear");
  Grid g(m.default_a, 3, 3);
  CHECK_THROWS(offline_build(m, g, -1.0, 10, RoundingPolicy{1e-4}, RoundingPolicy{1e-4}));
  CHECK_THROWS(offline_build(m, g, 0.05, 0, RoundingPolicy{1e-4}, RoundingPolicy{1e-4}));
  // One giant step violates the explicit stability bound.
  OfflineBundle b =
      offline_build(m, g, 10.0, 1, RoundingPolicy{1e-4}, RoundingPolicy{1e-4});
  CHECK(b.stability_warning);
}

TEST_CASE("run_filter output shape, times, and normalization") {
  ModelSpec m = model_by_name("almost_linear");
  Grid g(m.default_a, 3, 4);
  OfflineBundle b =
      offline_build(m, g, 0.05, 100, RoundingPolicy{5e-4}, RoundingPolicy{1e-5});
  ObservationSeries obs = make_obs(m, 0.05, 10, 42);

  std::vector<StepDiagnostics> diags;
  std::vector<PosteriorEstimate> est =
      run_filter(b, obs, [&diags](const StepDiagnostics& d) { diags.push_back(d); });
  REQUIRE(est.size() == 10);
  CHECK(diags.size() == 10);
  for (size_t j = 0; j < est.size(); ++j) {
    CHECK(est[j].time == doctest::Approx(0.05 * double(j + 1)));
    CHECK(est[j].mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(est[j].mean.allFinite());
    CHECK(std::abs(est[j].mean.maxCoeff()) < m.default_a);
  }
  for (size_t j = 1; j < diags.size(); ++j) {
    CHECK(diags[j].t_fke_seconds >= 0.0);
    CHECK(diags[j].density_effective_rank > 0.0);
  }
}

TEST_CASE("filter is deterministic") {
  ModelSpec m = model_by_name("almost_linear");
  Grid g(m.default_a, 3, 4);
  OfflineBundle b =
      offline_build(m, g, 0.05, 100, RoundingPolicy{5e-4}, RoundingPolicy{1e-4});
  ObservationSeries obs = make_obs(m, 0.05, 6, 7);
  std::vector<PosteriorEstimate> a = run_filter(b, obs);
  std::vector<PosteriorEstimate> c = run_filter(b, obs);
  for (size_t j = 0; j < a.size(); ++j)
    CHECK((a[j].mean - c[j].mean).norm() == 0.0);
}

TEST_CASE("observation series validation") {
  ObservationSeries obs;
  CHECK_THROWS(obs.validate(0.05));
  obs.times = {0.0, 0.05, 0.11};
  obs.values.assign(3, Eigen::VectorXd::Zero(3));
  CHECK_THROWS(obs.validate(0.05));
  obs.times = {0.0, 0.05, 0.1};
  CHECK_NOTHROW(obs.validate(0.05));
}

TEST_CASE("huge observation increments are clamped and flagged") {
  ModelSpec m = model_by_name("almost_linear");
  Grid g(m.default_a, 3, 3);
  OfflineBundle b =
      offline_build(m, g, 0.05, 100, RoundingPolicy{5e-4}, RoundingPolicy{1e-4});
  OnlineContext ctx = make_online_context(b);
  FilterState state = initialize(b, ctx);
  StepDiagnostics diag;
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd y1 = Eigen::VectorXd::Constant(3, 500.0);
  FilterState next = assimilate(state, y0, y1, b, ctx, &diag);
  CHECK(diag.weight_clamped);
  CHECK(std::isfinite(next.normalization_log));
  Eigen::VectorXd bad = y1;
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(assimilate(state, y0, bad, b, ctx));
}

TEST_CASE("bundle save/load round trip is bit-identical") {
  ModelSpec m = model_by_name("almost_linear");
  Grid g(m.default_a, 3, 3);
  OfflineBundle b =
      offline_build(m, g, 0.05, 50, RoundingPolicy{5e-4}, RoundingPolicy{1e-4});
  const std::string file = "test_bundle_roundtrip.bin";
  save_bundle(b, file);
  OfflineBundle r = load_bundle(file);
  std::remove(file.c_str());

  CHECK(r.model.name == b.model.name);
  CHECK(r.grid.level == b.grid.level);
  CHECK(r.grid.a == b.grid.a);
  CHECK(r.tau == b.tau);
  CHECK(r.steps == b.steps);
  CHECK(r.online_policy.epsilon == b.online_policy.epsilon);
  REQUIRE(r.propagator.order() == b.propagator.order());
  for (Index k = 0; k < b.propagator.order(); ++k) {
    const auto& ca = b.propagator.cores()[k];
    const auto& cb = r.propagator.cores()[k];
    REQUIRE(ca.data.size() == cb.data.size());
    CHECK((ca.data - cb.data).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS(load_bundle("does_not_exist.bin"));
}

TEST_CASE("filter with no observation signal matches the dense FD baseline") {
  // h = 0 keeps every observation weight at 1, so the two routes evolve the
  // same density and the estimates must agree to rounding accuracy.
  ModelSpec m = model_by_name("almost_linear");
  m.name = "almost_linear_silent";
  m.m = 1;
  m.observation.clear();
  m.observation.push_back([](const Eigen::VectorXd&) { return 0.0; });

  Grid g(m.default_a, 3, 4);
  OfflineBundle b =
      offline_build(m, g, 0.05, 100, RoundingPolicy{1e-8}, RoundingPolicy{1e-8});
  ObservationSeries obs;
  for (int j = 0; j <= 8; ++j) {
    obs.times.push_back(0.05 * j);
    obs.values.push_back(Eigen::VectorXd::Zero(1));
  }
  std::vector<PosteriorEstimate> qtt = run_filter(b, obs);
  DensePropagator dense = dense_build(m, g, 0.05, 100);
  std::vector<PosteriorEstimate> fd = dense_fd_filter(dense, m, obs);
  REQUIRE(qtt.size() == fd.size());
  for (size_t j = 0; j < qtt.size(); ++j)
    CHECK((qtt[j].mean - fd[j].mean).lpNorm<Eigen::Infinity>() <= 1e-6);
}
