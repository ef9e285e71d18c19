#include "ttf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

namespace ttf {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

constexpr double kExpClamp = 700.0;

}  // namespace

void ObservationSeries::validate(double dT) const {
  if (times.size() < 2) throw std::invalid_argument("ObservationSeries: need at least t_0, t_1");
  if (times.size() != values.size())
    throw std::invalid_argument("ObservationSeries: times/values size mismatch");
  for (size_t j = 1; j < times.size(); ++j)
    if (std::abs(times[j] - times[j - 1] - dT) > 1e-12)
      throw std::invalid_argument("ObservationSeries: spacing does not match dT");
}

TtMatrixd propagator_power(const TtMatrixd& base, Index steps,
                           const RoundingPolicy& policy) {
  if (steps < 1) throw std::invalid_argument("propagator_power: steps must be >= 1");
  if (steps == 1) return tt_round(base, policy);
  // Sequential multiplication with rounding after every product keeps the
  // total error within steps * epsilon.
  TtMatrixd result = base;
  bool capped = result.rank_capped();
  for (Index n = 1; n < steps; ++n) {
    result = tt_matmul(result, base, policy);
    capped = capped || result.rank_capped();
  }
  result.set_rank_capped(capped);
  return result;
}

OfflineBundle offline_build(const ModelSpec& model, const Grid& grid, double dT,
                            Index steps, const RoundingPolicy& build_policy,
                            const RoundingPolicy& online_policy,
                            const RoundingPolicy& construct_policy) {
  model.validate();
  if (steps < 1 || !(dT > 0.0)) throw std::invalid_argument("offline_build: bad dT/steps");
  OfflineBundle b;
  b.grid = grid;
  b.model = model;
  b.dT = dT;
  b.steps = steps;
  b.tau = dT / double(steps);
  b.build_policy = build_policy;
  b.online_policy = online_policy;
  b.construct_policy = construct_policy;
  b.stability_warning = !check_stability(grid, model, b.tau).ok();

  GeneratorOperator gen = assemble_generator(grid, model, construct_policy);
  TtMatrixd step_op = tt_add(tt_scale(gen.full, b.tau), TtMatrixd::identity(qtt_shape(grid)));
  step_op = tt_round(step_op, construct_policy);
  b.propagator = propagator_power(step_op, steps, build_policy);
  if (build_policy.max_rank && b.propagator.rank_capped())
    throw std::runtime_error("offline_build: propagator rank cap exceeded");
  return b;
}

OnlineContext make_online_context(const OfflineBundle& bundle) {
  OnlineContext ctx;
  ctx.model = bundle.model;
  for (int i = 0; i < bundle.model.m; ++i)
    ctx.h_samples.push_back(sample_field_dense(bundle.grid, bundle.model.observation[i]));
  for (int k = 0; k < bundle.grid.d; ++k)
    ctx.coords.push_back(coordinate_tensor(bundle.grid, k));
  return ctx;
}

FilterState initialize(const OfflineBundle& bundle, const OnlineContext& ctx) {
  (void)ctx;
  FilterState state;
  TtTensord sigma =
      sample_field(bundle.grid, bundle.model.sigma0, bundle.online_policy);
  double mass = tt_sum(sigma);
  if (!(mass > 0.0)) throw std::runtime_error("initialize: zero initial mass");
  state.normalization_log = std::log(mass);
  sigma = tt_scale(sigma, 1.0 / mass);

  state.density = tt_matvec(bundle.propagator, sigma, bundle.online_policy);
  mass = tt_sum(state.density);
  if (!(mass > 0.0)) throw std::runtime_error("initialize: zero mass after propagation");
  state.normalization_log += std::log(mass);
  state.density = tt_scale(state.density, 1.0 / mass);
  state.current_time = bundle.dT;
  return state;
}

FilterState assimilate(const FilterState& state, const Eigen::VectorXd& y_prev,
                       const Eigen::VectorXd& y_new, const OfflineBundle& bundle,
                       const OnlineContext& ctx, StepDiagnostics* diag) {
  if (y_prev.size() != ctx.model.m || y_new.size() != ctx.model.m)
    throw std::invalid_argument("assimilate: observation arity mismatch");
  if (!y_prev.allFinite() || !y_new.allFinite())
    throw std::invalid_argument("assimilate: non-finite observation");

  FilterState next;
  bool clamped = false;

  const double t0 = now_seconds();
  const Index total = bundle.grid.total_points();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(total);
  for (int i = 0; i < ctx.model.m; ++i)
    w += (y_new[i] - y_prev[i]) * ctx.h_samples[i];
  // Shift the exponent by its maximum so the weight never overflows; the
  // scalar factor is exact and lands in the log normalization.  The lower
  // tail is clamped against underflow of the whole weight field.
  const double shift = w.maxCoeff();
  for (Index l = 0; l < total; ++l) {
    double e = w[l] - shift;
    if (e < -kExpClamp) {
      clamped = true;
      e = -kExpClamp;
    }
    w[l] = std::exp(e);
  }
  // The weight spans many orders of magnitude when the sensor is strongly
  // nonlinear; compressing it at the online tolerance (relative to its peak,
  // which sits in the domain corners) erases the values over the bulk of the
  // density.  Build it at the construction tolerance instead; the Hadamard
  // product below is still rounded at the online tolerance.
  TtTensord weight =
      tt_from_full(w, qtt_shape(bundle.grid), bundle.construct_policy);
  TtTensord density =
      tt_round(tt_hadamard(weight, state.density), bundle.online_policy);
  const double t1 = now_seconds();

  density = tt_matvec(bundle.propagator, density, bundle.online_policy);
  double mass = tt_sum(density);

  // A strongly nonlinear sensor can place almost all of the weight where the
  // density holds only compression noise; the weighted mass then drops to the
  // noise level.  A genuine nonnegative density spread over s grid cells has
  // sum about sqrt(s) times its Frobenius norm, whereas a sign-oscillating
  // noise state has |sum| of the order of the norm itself, so the ratio
  // separates the two regimes cleanly (observed: >= 70 healthy, <= 3 noise).
  // A noise-level update carries no usable information, so reject the
  // observation for this interval and fall back to pure prediction, which
  // keeps the state a density.
  bool rejected = false;
  double applied_shift = shift;
  if (!(mass > 10.0 * tt_norm(density)) || !std::isfinite(mass)) {
    rejected = true;
    applied_shift = 0.0;
    // The prior itself has been accumulating signed compression noise, so
    // restore it to a genuine density (clamp negative entries pointwise)
    // before predicting; otherwise the noise keeps compounding and pure
    // prediction eventually loses positivity as well.
    Eigen::VectorXd full = tt_to_full(state.density);
    full = full.cwiseMax(0.0);
    TtTensord repaired =
        tt_from_full(full, qtt_shape(bundle.grid), bundle.online_policy);
    density = tt_matvec(bundle.propagator, repaired, bundle.online_policy);
    mass = tt_sum(density);
  }
  const double t2 = now_seconds();

  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::runtime_error("assimilate: zero or non-finite posterior mass");
  next.density = tt_scale(density, 1.0 / mass);
  next.normalization_log = state.normalization_log + std::log(mass) + applied_shift;
  next.current_time = state.current_time + bundle.dT;

  if (diag) {
    diag->time = next.current_time;
    diag->mass_log = next.normalization_log;
    diag->density_effective_rank = effective_rank(next.density);
    diag->t_exp_seconds = t1 - t0;
    diag->t_fke_seconds = t2 - t1;
    diag->weight_clamped = clamped;
    diag->observation_rejected = rejected;
  }
  return next;
}

PosteriorEstimate estimate_state(const FilterState& state, const OnlineContext& ctx) {
  PosteriorEstimate est;
  est.time = state.current_time;
  const double mass = tt_sum(state.density);
  if (!(mass > 0.0)) throw std::runtime_error("estimate_state: zero mass");
  est.mass = mass;
  est.mean.resize(ctx.coords.size());
  for (size_t k = 0; k < ctx.coords.size(); ++k)
    est.mean[k] = tt_sum(tt_hadamard(ctx.coords[k], state.density)) / mass;
  if (!est.mean.allFinite()) throw std::runtime_error("estimate_state: non-finite mean");
  return est;
}

std::vector<PosteriorEstimate> run_filter(const OfflineBundle& bundle,
                                          const ObservationSeries& observations,
                                          const StepHook& hook) {
  observations.validate(bundle.dT);
  OnlineContext ctx = make_online_context(bundle);
  std::vector<PosteriorEstimate> estimates;

  FilterState state = initialize(bundle, ctx);
  estimates.push_back(estimate_state(state, ctx));
  if (hook) {
    StepDiagnostics d;
    d.step = 0;
    d.time = state.current_time;
    d.mean = estimates.back().mean;
    d.mass_log = state.normalization_log;
    d.density_effective_rank = effective_rank(state.density);
    hook(d);
  }

  const Index nt = observations.intervals();
  for (Index j = 1; j < nt; ++j) {
    StepDiagnostics d;
    d.step = j;
    state = assimilate(state, observations.values[j - 1], observations.values[j],
                       bundle, ctx, &d);
    estimates.push_back(estimate_state(state, ctx));
    d.mean = estimates.back().mean;
    if (hook) hook(d);
  }
  return estimates;
}

namespace {

constexpr char kMagic[8] = {'T', 'T', 'F', 'B', 'N', 'D', 'L', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("bundle: truncated file");
  return v;
}

void put_policy(std::ostream& os, const RoundingPolicy& p) {
  put<double>(os, p.epsilon);
  put<int64_t>(os, p.max_rank ? int64_t(*p.max_rank) : int64_t(-1));
}

RoundingPolicy get_policy(std::istream& is) {
  RoundingPolicy p;
  p.epsilon = get<double>(is);
  const int64_t cap = get<int64_t>(is);
  if (cap >= 0) p.max_rank = Index(cap);
  return p;
}

}  // namespace

void save_bundle(const OfflineBundle& bundle, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_bundle: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put<uint32_t>(os, 1);  // version
  put<double>(os, bundle.grid.a);
  put<int32_t>(os, bundle.grid.d);
  put<int32_t>(os, bundle.grid.level);
  const std::string& name = bundle.model.name;
  put<uint32_t>(os, uint32_t(name.size()));
  os.write(name.data(), std::streamsize(name.size()));
  put<double>(os, bundle.tau);
  put<double>(os, bundle.dT);
  put<int64_t>(os, int64_t(bundle.steps));
  put_policy(os, bundle.build_policy);
  put_policy(os, bundle.online_policy);
  put_policy(os, bundle.construct_policy);
  put<uint8_t>(os, bundle.stability_warning ? 1 : 0);
  put<int64_t>(os, int64_t(bundle.propagator.order()));
  for (const auto& c : bundle.propagator.cores()) {
    put<int64_t>(os, int64_t(c.rl));
    put<int64_t>(os, int64_t(c.m));
    put<int64_t>(os, int64_t(c.n));
    put<int64_t>(os, int64_t(c.rr));
    os.write(reinterpret_cast<const char*>(c.data.data()),
             std::streamsize(sizeof(double) * size_t(c.data.size())));
  }
  if (!os) throw std::runtime_error("save_bundle: write failed");
}

OfflineBundle load_bundle(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_bundle: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("load_bundle: bad magic");
  const uint32_t version = get<uint32_t>(is);
  if (version != 1) throw std::runtime_error("load_bundle: unsupported version");

  OfflineBundle b;
  const double a = get<double>(is);
  const int32_t d = get<int32_t>(is);
  const int32_t level = get<int32_t>(is);
  b.grid = Grid(a, d, level);
  const uint32_t len = get<uint32_t>(is);
  std::string name(len, '\0');
  is.read(name.data(), len);
  b.model = model_by_name(name);
  b.tau = get<double>(is);
  b.dT = get<double>(is);
  b.steps = Index(get<int64_t>(is));
  b.build_policy = get_policy(is);
  b.online_policy = get_policy(is);
  b.construct_policy = get_policy(is);
  b.stability_warning = get<uint8_t>(is) != 0;

  const Index ncores = Index(get<int64_t>(is));
  std::vector<TtMatrixCore<double>> cores;
  for (Index k = 0; k < ncores; ++k) {
    const Index rl = Index(get<int64_t>(is));
    const Index m = Index(get<int64_t>(is));
    const Index n = Index(get<int64_t>(is));
    const Index rr = Index(get<int64_t>(is));
    TtMatrixCore<double> c(rl, m, n, rr);
    is.read(reinterpret_cast<char*>(c.data.data()),
            std::streamsize(sizeof(double) * size_t(c.data.size())));
    if (!is) throw std::runtime_error("load_bundle: truncated cores");
    cores.push_back(std::move(c));
  }
  b.propagator = TtMatrixd(std::move(cores));
  return b;
}

}  // namespace ttf
