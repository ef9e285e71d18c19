#include "ttf/model.hpp"

#include <cmath>

namespace ttf {

ModelSpec make_almost_linear() {
  ModelSpec m;
  m.name = "almost_linear";
  m.d = 3;
  m.m = 3;
  for (int i = 0; i < 3; ++i)
    m.drift.push_back([i](const Eigen::VectorXd& x) { return -0.3 * x[i]; });
  m.observation = {
      [](const Eigen::VectorXd& x) { return x[1] + std::sin(x[0]); },
      [](const Eigen::VectorXd& x) { return x[2] + std::sin(x[1]); },
      [](const Eigen::VectorXd& x) { return x[0] + std::sin(x[2]); },
  };
  m.q = 1.5;
  m.sigma0 = [](const Eigen::VectorXd& x) { return std::exp(-4.0 * x.squaredNorm()); };
  m.default_a = 5.0;
  m.default_steps = 100;
  m.default_eps = 5e-4;
  m.validate();
  return m;
}

ModelSpec make_cubic_sensor() {
  ModelSpec m;
  m.name = "cubic_sensor";
  m.d = 3;
  m.m = 3;
  m.drift = {
      [](const Eigen::VectorXd& x) { return -0.6 * x[0] - 0.1 * x[1]; },
      [](const Eigen::VectorXd& x) { return -0.5 * x[1] + 0.1 * x[2]; },
      [](const Eigen::VectorXd& x) { return -0.6 * x[2] + 0.1 * x[0]; },
  };
  m.observation = {
      [](const Eigen::VectorXd& x) { return x[1] * x[1] * x[1]; },
      [](const Eigen::VectorXd& x) { return x[2] * x[2] * x[2]; },
      [](const Eigen::VectorXd& x) { return x[0] * x[0] * x[0]; },
  };
  m.q = 1.5;
  m.sigma0 = [](const Eigen::VectorXd& x) {
    return std::exp(-10.0 * (std::pow(x[0], 4) + std::pow(x[1], 4) + std::pow(x[2], 4)));
  };
  m.default_a = 3.0;
  m.default_steps = 200;
  m.default_eps = 5e-5;
  m.validate();
  return m;
}

ModelSpec make_zero_model(int d, double q, double a) {
  ModelSpec m;
  m.name = "zero";
  m.d = d;
  m.m = 0;
  for (int i = 0; i < d; ++i)
    m.drift.push_back([](const Eigen::VectorXd&) { return 0.0; });
  m.q = q;
  m.sigma0 = [](const Eigen::VectorXd& x) { return std::exp(-4.0 * x.squaredNorm()); };
  m.default_a = a;
  m.validate();
  return m;
}

ModelSpec model_by_name(const std::string& name) {
  if (name == "almost_linear") return make_almost_linear();
  if (name == "cubic_sensor") return make_cubic_sensor();
  throw std::invalid_argument("unknown model: " + name);
}

bool is_known_model(const std::string& name) {
  return name == "almost_linear" || name == "cubic_sensor";
}

}  // namespace ttf
