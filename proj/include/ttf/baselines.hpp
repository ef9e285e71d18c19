#pragma once

#include "ttf/pipeline.hpp"

#include <Eigen/Sparse>

#include <random>

namespace ttf {

// Dense finite-difference analogue of the QTT pipeline, same grid, same
// divergence-form convection, same explicit time stepping.
struct DensePropagator {
  Eigen::SparseMatrix<double> step;  // tau*A + I
  Grid grid;
  double tau = 0.0;
  Index steps = 0;
};

Eigen::SparseMatrix<double> dense_generator(const Grid& grid, const ModelSpec& model);

DensePropagator dense_build(const ModelSpec& model, const Grid& grid, double dT,
                            Index steps);

// Full online loop on the dense vector; aborts if the unnormalized mass blows
// up by more than 1e6 between rescales.
std::vector<PosteriorEstimate> dense_fd_filter(const DensePropagator& prop,
                                               const ModelSpec& model,
                                               const ObservationSeries& observations,
                                               double* seconds_in_fke = nullptr);

// One sampled state/observation trajectory of the signal model.
struct TruthPath {
  double dt = 0.0;
  std::vector<Eigen::VectorXd> x;  // states at i*dt, x[0] = 0
  std::vector<Eigen::VectorXd> y;  // accumulated observations, y[0] = 0
};

TruthPath simulate_truth(const ModelSpec& model, double T, double dt, uint64_t seed);

// Observation subsequence at multiples of dT (must be a multiple of dt).
ObservationSeries subsample_observations(const TruthPath& path, double dT);

void save_truth(const TruthPath& path, const std::string& file);
TruthPath load_truth(const std::string& file);

struct ParticleFilterResult {
  std::vector<PosteriorEstimate> estimates;
  Index resample_count = 0;
  bool weight_collapse = false;  // all weights vanished at some step
};

// Bootstrap filter on the observation increments; resamples systematically
// when the effective sample size drops below half the particle count.
ParticleFilterResult particle_filter(const ModelSpec& model,
                                     const ObservationSeries& observations,
                                     Index particles, Index euler_substeps,
                                     uint64_t seed);

// Deterministic normal draws reproducible across platforms.
class NormalSampler {
 public:
  explicit NormalSampler(uint64_t seed) : rng_(seed) {}
  double operator()();
  double uniform();  // in [0, 1)
  Eigen::VectorXd vector(Index n);

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ttf
