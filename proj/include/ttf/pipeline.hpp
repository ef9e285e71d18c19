#pragma once

#include "ttf/operators.hpp"

#include <functional>
#include <iosfwd>

namespace ttf {

// Precomputed state of the offline stage: the compressed observation-interval
// propagator (tau*A + I)^steps plus everything the online stage needs.
struct OfflineBundle {
  TtMatrixd propagator;
  Grid grid;
  ModelSpec model;  // serialized by name, rebound on load
  double tau = 0.0;
  double dT = 0.0;
  Index steps = 0;
  RoundingPolicy build_policy;
  RoundingPolicy online_policy;
  RoundingPolicy construct_policy{1e-12};
  bool stability_warning = false;
};

struct ObservationSeries {
  std::vector<double> times;              // t_0 < t_1 < ... < t_Nt, uniform dT
  std::vector<Eigen::VectorXd> values;    // y at each time, y(t_0) included

  Index intervals() const { return static_cast<Index>(times.size()) - 1; }
  void validate(double dT) const;
};

struct FilterState {
  TtTensord density;        // unnormalized conditional density, rescaled to unit sum
  double current_time = 0.0;
  double normalization_log = 0.0;  // accumulated log of rescaling factors
};

struct PosteriorEstimate {
  double time = 0.0;
  Eigen::VectorXd mean;
  double mass = 0.0;  // total sum before the unit-sum rescale of this step
};

struct StepDiagnostics {
  Index step = 0;
  double time = 0.0;
  Eigen::VectorXd mean;
  double mass_log = 0.0;
  double density_effective_rank = 0.0;
  double t_fke_seconds = 0.0;
  double t_exp_seconds = 0.0;
  bool weight_clamped = false;
  bool observation_rejected = false;
};

using StepHook = std::function<void(const StepDiagnostics&)>;

// Cached per-model data the online loop reuses every step.
struct OnlineContext {
  ModelSpec model;
  std::vector<Eigen::VectorXd> h_samples;  // dense nodal samples of each h_i
  std::vector<TtTensord> coords;           // QTT coordinate tensors
};

OnlineContext make_online_context(const OfflineBundle& bundle);

// Sequential powering with TT-rounding after every multiplication; the
// accumulated error stays within steps * epsilon.
TtMatrixd propagator_power(const TtMatrixd& base, Index steps,
                           const RoundingPolicy& policy);

OfflineBundle offline_build(const ModelSpec& model, const Grid& grid, double dT,
                            Index steps, const RoundingPolicy& build_policy,
                            const RoundingPolicy& online_policy,
                            const RoundingPolicy& construct_policy = RoundingPolicy{1e-12});

// Initial density compressed and propagated once to t_1.
FilterState initialize(const OfflineBundle& bundle, const OnlineContext& ctx);

// One Algorithm-2 step: exponential weight Hadamard product, propagation,
// unit-sum rescale.  Diagnostics out-param is optional.
FilterState assimilate(const FilterState& state, const Eigen::VectorXd& y_prev,
                       const Eigen::VectorXd& y_new, const OfflineBundle& bundle,
                       const OnlineContext& ctx, StepDiagnostics* diag = nullptr);

PosteriorEstimate estimate_state(const FilterState& state, const OnlineContext& ctx);

std::vector<PosteriorEstimate> run_filter(const OfflineBundle& bundle,
                                          const ObservationSeries& observations,
                                          const StepHook& hook = {});

// Binary bundle container (little-endian doubles); the model is stored by
// name and rebound on load.
void save_bundle(const OfflineBundle& bundle, const std::string& path);
OfflineBundle load_bundle(const std::string& path);

}  // namespace ttf
