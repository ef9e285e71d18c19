#include "ttf/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ttf {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

constexpr double kExpClamp = 700.0;
constexpr double kMassBlowup = 1e6;

// Node index <-> multi-index, axis-1 fastest.
Eigen::VectorXd node_coords(const Grid& grid, Index flat) {
  const Index n = grid.points_per_axis();
  Eigen::VectorXd x(grid.d);
  for (int k = 0; k < grid.d; ++k) {
    x[k] = grid.coord(flat % n);
    flat /= n;
  }
  return x;
}

}  // namespace

double NormalSampler::operator()() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0, u2 = 0.0;
  do {
    u1 = std::generate_canonical<double, 53>(rng_);
  } while (u1 <= 0.0);
  u2 = std::generate_canonical<double, 53>(rng_);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double NormalSampler::uniform() { return std::generate_canonical<double, 53>(rng_); }

Eigen::VectorXd NormalSampler::vector(Index n) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = (*this)();
  return v;
}

Eigen::SparseMatrix<double> dense_generator(const Grid& grid, const ModelSpec& model) {
  model.validate();
  const Index n = grid.points_per_axis();
  const Index total = grid.total_points();
  const double h = grid.h();
  const double inv_h2 = 1.0 / (h * h);
  const double inv_2h = 1.0 / (2.0 * h);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(size_t(total) * size_t(2 * grid.d + 1));

  Index stride = 1;
  std::vector<Index> strides(grid.d);
  for (int k = 0; k < grid.d; ++k) {
    strides[k] = stride;
    stride *= n;
  }

  std::vector<Index> idx(grid.d, 0);
  for (Index l = 0; l < total; ++l) {
    const Eigen::VectorXd x = node_coords(grid, l);
    double diag = -model.q * double(grid.d) * inv_h2;
    for (int i = 0; i < model.m; ++i) {
      const double hi = model.observation[i](x);
      diag -= 0.5 * hi * hi;
    }
    trip.emplace_back(int(l), int(l), diag);

    for (int k = 0; k < grid.d; ++k) {
      if (idx[k] + 1 < n) {
        const Index r = l + strides[k];
        Eigen::VectorXd xr = x;
        xr[k] += h;
        trip.emplace_back(int(l), int(r),
                          0.5 * model.q * inv_h2 - model.drift[k](xr) * inv_2h);
      }
      if (idx[k] > 0) {
        const Index r = l - strides[k];
        Eigen::VectorXd xl = x;
        xl[k] -= h;
        trip.emplace_back(int(l), int(r),
                          0.5 * model.q * inv_h2 + model.drift[k](xl) * inv_2h);
      }
    }

    for (int k = 0; k < grid.d; ++k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }

  Eigen::SparseMatrix<double> a(static_cast<int>(total), static_cast<int>(total));
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

DensePropagator dense_build(const ModelSpec& model, const Grid& grid, double dT,
                            Index steps) {
  if (steps < 1 || !(dT > 0.0)) throw std::invalid_argument("dense_build: bad dT/steps");
  DensePropagator p;
  p.grid = grid;
  p.steps = steps;
  p.tau = dT / double(steps);

  Eigen::SparseMatrix<double> a = dense_generator(grid, model);
  Eigen::SparseMatrix<double> id(a.rows(), a.cols());
  id.setIdentity();
  p.step = (p.tau * a + id).pruned();
  return p;
}

std::vector<PosteriorEstimate> dense_fd_filter(const DensePropagator& prop,
                                               const ModelSpec& model,
                                               const ObservationSeries& observations,
                                               double* seconds_in_fke) {
  const double dT = prop.tau * double(prop.steps);
  observations.validate(dT);
  const Grid& grid = prop.grid;
  const Index total = grid.total_points();

  std::vector<Eigen::VectorXd> h_samples;
  for (int i = 0; i < model.m; ++i)
    h_samples.push_back(sample_field_dense(grid, model.observation[i]));
  std::vector<Eigen::VectorXd> coords;
  for (int k = 0; k < grid.d; ++k) {
    Eigen::VectorXd c(total);
    for (Index l = 0; l < total; ++l) c[l] = node_coords(grid, l)[k];
    coords.push_back(std::move(c));
  }

  Eigen::VectorXd p = sample_field_dense(grid, model.sigma0);
  double mass = p.sum();
  if (!(mass > 0.0)) throw std::runtime_error("dense_fd_filter: zero initial mass");
  p /= mass;

  // Row-major storage roughly halves the per-substep cost of the repeated
  // sparse matrix-vector products that dominate this routine.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> step(prop.step);
  Eigen::VectorXd scratch(total);
  double fke_seconds = 0.0;
  auto propagate = [&](Eigen::VectorXd& v) {
    const double t0 = now_seconds();
    for (Index s = 0; s < prop.steps; ++s) {
      scratch.noalias() = step * v;
      v.swap(scratch);
      if ((s % 16 == 15 || s + 1 == prop.steps) &&
          (!v.allFinite() || v.cwiseAbs().sum() > kMassBlowup))
        throw std::runtime_error("dense_fd_filter: mass blow-up, unstable step size");
    }
    fke_seconds += now_seconds() - t0;
  };

  auto estimate = [&](const Eigen::VectorXd& v, double time) {
    PosteriorEstimate est;
    est.time = time;
    est.mass = v.sum();
    est.mean.resize(grid.d);
    for (int k = 0; k < grid.d; ++k) est.mean[k] = coords[k].dot(v) / est.mass;
    return est;
  };

  std::vector<PosteriorEstimate> out;
  propagate(p);
  mass = p.sum();
  if (!(mass > 0.0)) throw std::runtime_error("dense_fd_filter: zero mass");
  p /= mass;
  out.push_back(estimate(p, observations.times[1]));

  const Index nt = observations.intervals();
  for (Index j = 1; j < nt; ++j) {
    const Eigen::VectorXd& y0 = observations.values[j - 1];
    const Eigen::VectorXd& y1 = observations.values[j];
    Eigen::VectorXd w = Eigen::VectorXd::Zero(total);
    for (int i = 0; i < model.m; ++i) w += (y1[i] - y0[i]) * h_samples[i];
    for (Index l = 0; l < total; ++l)
      p[l] *= std::exp(std::clamp(w[l], -kExpClamp, kExpClamp));
    propagate(p);
    mass = p.sum();
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw std::runtime_error("dense_fd_filter: zero posterior mass");
    p /= mass;
    out.push_back(estimate(p, observations.times[size_t(j) + 1]));
  }
  if (seconds_in_fke) *seconds_in_fke = fke_seconds;
  return out;
}

TruthPath simulate_truth(const ModelSpec& model, double T, double dt, uint64_t seed) {
  model.validate();
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("simulate_truth: bad T/dt");
  const Index n = Index(std::llround(T / dt));
  NormalSampler rng(seed);

  TruthPath path;
  path.dt = dt;
  path.x.reserve(size_t(n) + 1);
  path.y.reserve(size_t(n) + 1);
  path.x.push_back(Eigen::VectorXd::Zero(model.d));
  path.y.push_back(Eigen::VectorXd::Zero(model.m));
  const double sq = std::sqrt(model.q * dt);
  const double sdt = std::sqrt(dt);
  for (Index i = 0; i < n; ++i) {
    const Eigen::VectorXd& x = path.x.back();
    Eigen::VectorXd xn(model.d);
    for (int k = 0; k < model.d; ++k) xn[k] = x[k] + model.drift[k](x) * dt + sq * rng();
    Eigen::VectorXd yn(model.m);
    for (int i2 = 0; i2 < model.m; ++i2)
      yn[i2] = path.y.back()[i2] + model.observation[i2](x) * dt + sdt * rng();
    path.x.push_back(std::move(xn));
    path.y.push_back(std::move(yn));
  }
  return path;
}

ObservationSeries subsample_observations(const TruthPath& path, double dT) {
  const Index stride = Index(std::llround(dT / path.dt));
  if (stride < 1 || std::abs(double(stride) * path.dt - dT) > 1e-9)
    throw std::invalid_argument("subsample_observations: dT not a multiple of dt");
  ObservationSeries obs;
  for (size_t i = 0; i < path.y.size(); i += size_t(stride)) {
    obs.times.push_back(double(i) * path.dt);
    obs.values.push_back(path.y[i]);
  }
  return obs;
}

void save_truth(const TruthPath& path, const std::string& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("save_truth: cannot open " + file);
  const Index d = path.x.empty() ? 0 : path.x[0].size();
  const Index m = path.y.empty() ? 0 : path.y[0].size();
  os.precision(17);
  os << "# dt d m\n" << path.dt << ' ' << d << ' ' << m << '\n';
  os << "# t x_1..x_d y_1..y_m\n";
  for (size_t i = 0; i < path.x.size(); ++i) {
    os << double(i) * path.dt;
    for (Index k = 0; k < d; ++k) os << ' ' << path.x[i][k];
    for (Index k = 0; k < m; ++k) os << ' ' << path.y[i][k];
    os << '\n';
  }
  if (!os) throw std::runtime_error("save_truth: write failed");
}

TruthPath load_truth(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("load_truth: cannot open " + file);
  std::string line;
  TruthPath path;
  Index d = 0, m = 0;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    if (!header) {
      if (!(ss >> path.dt >> d >> m) || d < 1 || m < 1)
        throw std::runtime_error("load_truth: bad header");
      header = true;
      continue;
    }
    double t = 0.0;
    Eigen::VectorXd x(d), y(m);
    ss >> t;
    for (Index k = 0; k < d; ++k) ss >> x[k];
    for (Index k = 0; k < m; ++k) ss >> y[k];
    if (!ss) throw std::runtime_error("load_truth: bad row");
    path.x.push_back(std::move(x));
    path.y.push_back(std::move(y));
  }
  if (!header || path.x.empty()) throw std::runtime_error("load_truth: empty file");
  return path;
}

ParticleFilterResult particle_filter(const ModelSpec& model,
                                     const ObservationSeries& observations,
                                     Index particles, Index euler_substeps,
                                     uint64_t seed) {
  model.validate();
  if (particles < 1 || euler_substeps < 1)
    throw std::invalid_argument("particle_filter: bad particle/substep count");
  const double dT = observations.times[1] - observations.times[0];
  observations.validate(dT);
  const double dt = dT / double(euler_substeps);
  const double sq = std::sqrt(model.q * dt);
  NormalSampler rng(seed);

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(model.d, particles);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(particles, 1.0 / double(particles));
  Eigen::MatrixXd xn(model.d, particles);

  ParticleFilterResult res;
  const Index nt = observations.intervals();
  for (Index j = 0; j < nt; ++j) {
    for (Index p = 0; p < particles; ++p) {
      Eigen::VectorXd xp = x.col(p);
      for (Index s = 0; s < euler_substeps; ++s) {
        Eigen::VectorXd next(model.d);
        for (int k = 0; k < model.d; ++k)
          next[k] = xp[k] + model.drift[k](xp) * dt + sq * rng();
        xp = next;
      }
      xn.col(p) = xp;
    }
    x.swap(xn);

    const Eigen::VectorXd dy = observations.values[size_t(j) + 1] - observations.values[size_t(j)];
    Eigen::VectorXd logw(particles);
    for (Index p = 0; p < particles; ++p) {
      double acc = 0.0;
      const Eigen::VectorXd xp = x.col(p);
      for (int i = 0; i < model.m; ++i) {
        const double r = dy[i] - model.observation[i](xp) * dT;
        acc -= r * r / (2.0 * dT);
      }
      logw[p] = std::log(w[p]) + acc;
    }
    const double lmax = logw.maxCoeff();
    if (!std::isfinite(lmax)) {
      res.weight_collapse = true;
      w.setConstant(1.0 / double(particles));
    } else {
      w = (logw.array() - lmax).exp();
      const double total = w.sum();
      if (!(total > 0.0) || !std::isfinite(total)) {
        res.weight_collapse = true;
        w.setConstant(1.0 / double(particles));
      } else {
        w /= total;
      }
    }

    PosteriorEstimate est;
    est.time = observations.times[size_t(j) + 1];
    est.mass = 1.0;
    est.mean = x * w;
    res.estimates.push_back(std::move(est));

    const double ess = 1.0 / w.squaredNorm();
    if (ess < 0.5 * double(particles)) {
      std::vector<Index> pick(static_cast<size_t>(particles));
      double cum = w[0];
      Index i = 0;
      const double step = 1.0 / double(particles);
      double u = step * rng.uniform();
      for (Index p = 0; p < particles; ++p) {
        while (u > cum && i + 1 < particles) cum += w[++i];
        pick[size_t(p)] = i;
        u += step;
      }
      for (Index p = 0; p < particles; ++p) xn.col(p) = x.col(pick[size_t(p)]);
      x.swap(xn);
      w.setConstant(1.0 / double(particles));
      ++res.resample_count;
    }
  }
  return res;
}

}  // namespace ttf
