#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttf {

// Uniform tensor-product grid on [-a,a]^d with N = 2^L points per axis and
// mesh size h = 2a/(N-1).
struct Grid {
  double a = 1.0;
  int d = 1;
  int level = 1;  // N = 2^level

  Grid() = default;
  Grid(double a_, int d_, int level_) : a(a_), d(d_), level(level_) {
    if (!(a > 0.0) || d < 1 || level < 1) throw std::invalid_argument("Grid: bad parameters");
  }

  Eigen::Index points_per_axis() const { return Eigen::Index(1) << level; }
  double h() const { return 2.0 * a / double(points_per_axis() - 1); }
  double coord(Eigen::Index l) const { return -a + double(l) * h(); }
  Eigen::Index total_points() const {
    Eigen::Index t = 1;
    for (int k = 0; k < d; ++k) t *= points_per_axis();
    return t;
  }
};

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

// Filtering model: state SDE drift f, observation fields h, constant
// diffusion scale q with state noise covariance q*I, observation noise
// covariance I, and initial density sigma0.
struct ModelSpec {
  std::string name;
  int d = 0;
  int m = 0;
  std::vector<ScalarField> drift;
  std::vector<ScalarField> observation;
  double q = 1.0;
  ScalarField sigma0;
  double default_a = 1.0;     // recommended domain half-width
  int default_steps = 100;    // recommended dT/tau
  double default_eps = 5e-4;  // recommended propagator rounding precision

  void validate() const {
    if (d < 1 || m < 0) throw std::invalid_argument("ModelSpec: bad dimensions");
    if (static_cast<int>(drift.size()) != d)
      throw std::invalid_argument("ModelSpec: drift arity mismatch");
    if (static_cast<int>(observation.size()) != m)
      throw std::invalid_argument("ModelSpec: observation arity mismatch");
    if (!(q >= 0.0)) throw std::invalid_argument("ModelSpec: q must be >= 0");
    if (!sigma0) throw std::invalid_argument("ModelSpec: missing initial density");
  }
};

// Almost linear problem: f_i = -0.3 x_i, h = (x2+sin x1, x3+sin x2,
// x1+sin x3), q = 1.5, sigma0 = exp(-4|x|^2) on [-5,5]^3.
ModelSpec make_almost_linear();

// Cubic sensor problem: f = (-0.6x1-0.1x2, -0.5x2+0.1x3, -0.6x3+0.1x1),
// h = (x2^3, x3^3, x1^3), q = 1.5, sigma0 = exp(-10 sum x_i^4) on [-3,3]^3.
ModelSpec make_cubic_sensor();

// Degenerate model with zero drift/observation, used in tests.
ModelSpec make_zero_model(int d, double q, double a);

// Lookup by name ("almost_linear", "cubic_sensor"); throws on unknown name.
ModelSpec model_by_name(const std::string& name);
bool is_known_model(const std::string& name);

}  // namespace ttf
