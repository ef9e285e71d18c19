#include "ttf/operators.hpp"

#include <cmath>
#include <limits>

namespace ttf {

namespace {

// Multi-index odometer over the grid, axis 1 fastest.
template <typename Fn>
void for_each_node(const Grid& grid, Fn&& fn) {
  const Index n = grid.points_per_axis();
  Eigen::VectorXd x(grid.d);
  std::vector<Index> idx(grid.d, 0);
  for (int k = 0; k < grid.d; ++k) x[k] = grid.coord(0);
  const Index total = grid.total_points();
  for (Index lin = 0; lin < total; ++lin) {
    fn(lin, x);
    for (int k = 0; k < grid.d; ++k) {
      if (++idx[k] < n) {
        x[k] = grid.coord(idx[k]);
        break;
      }
      idx[k] = 0;
      x[k] = grid.coord(0);
    }
  }
}

// QTT identity chain over one axis (L rank-1 cores).
void append_identity_axis(std::vector<TtMatrixCore<double>>& cores, int level) {
  for (int b = 0; b < level; ++b) {
    TtMatrixCore<double> c(1, 2, 2, 1);
    c.at(0, 0, 0, 0) = 1.0;
    c.at(0, 1, 1, 0) = 1.0;
    cores.push_back(std::move(c));
  }
}

// Quantize a dense N x N one-axis operator into L paired-binary cores.
std::vector<TtMatrixCore<double>> quantize_axis_operator(const Eigen::MatrixXd& op,
                                                         int level) {
  const Index n = op.rows();
  TtMatrixCore<double> core(1, n, n, 1);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) core.at(0, i, j, 0) = op(i, j);
  TtMatrix<double> one_mode({core});
  TtMatrix<double> q = quantize(one_mode);
  (void)level;
  return q.cores();
}

}  // namespace

TensorShape qtt_shape(const Grid& grid) {
  std::vector<Index> modes(size_t(grid.d) * size_t(grid.level), 2);
  return TensorShape(std::move(modes));
}

Eigen::VectorXd sample_field_dense(const Grid& grid, const ScalarField& field,
                                   Index limit) {
  const Index total = grid.total_points();
  if (total > limit) throw std::runtime_error("sample_field: materialization limit exceeded");
  Eigen::VectorXd out(total);
  for_each_node(grid, [&](Index lin, const Eigen::VectorXd& x) {
    const double v = field(x);
    if (!std::isfinite(v))
      throw std::runtime_error("sample_field: field evaluates non-finite");
    out[lin] = v;
  });
  return out;
}

TtTensord sample_field(const Grid& grid, const ScalarField& field,
                       const RoundingPolicy& policy, Index limit) {
  return tt_from_full(sample_field_dense(grid, field, limit), qtt_shape(grid), policy);
}

TtTensord coordinate_tensor(const Grid& grid, int axis) {
  const Index n = grid.points_per_axis();
  std::vector<Eigen::VectorXd> vecs;
  for (int k = 0; k < grid.d; ++k) {
    Eigen::VectorXd v(n);
    if (k == axis)
      for (Index l = 0; l < n; ++l) v[l] = grid.coord(l);
    else
      v.setOnes();
    vecs.push_back(std::move(v));
  }
  return quantize(TtTensord::from_mode_vectors(vecs));
}

Eigen::MatrixXd laplace_1d(Index n, double h) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const double w = 1.0 / (h * h);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = -2.0 * w;
    if (i > 0) m(i, i - 1) = w;
    if (i + 1 < n) m(i, i + 1) = w;
  }
  return m;
}

Eigen::MatrixXd central_diff_1d(Index n, double h) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const double w = 0.5 / h;
  for (Index i = 0; i < n; ++i) {
    if (i > 0) m(i, i - 1) = -w;
    if (i + 1 < n) m(i, i + 1) = w;
  }
  return m;
}

TtMatrixd mode_operator(const Grid& grid, int axis, const Eigen::MatrixXd& op1d) {
  std::vector<TtMatrixCore<double>> cores;
  for (int k = 0; k < grid.d; ++k) {
    if (k == axis) {
      auto a = quantize_axis_operator(op1d, grid.level);
      for (auto& c : a) cores.push_back(std::move(c));
    } else {
      append_identity_axis(cores, grid.level);
    }
  }
  return TtMatrixd(std::move(cores));
}

TtMatrixd assemble_laplace(const Grid& grid, const RoundingPolicy& policy) {
  const Eigen::MatrixXd d1 = laplace_1d(grid.points_per_axis(), grid.h());
  TtMatrixd acc = mode_operator(grid, 0, d1);
  for (int k = 1; k < grid.d; ++k) acc = tt_add(acc, mode_operator(grid, k, d1));
  return tt_round(acc, policy);
}

TtMatrixd assemble_convection(const Grid& grid, const ModelSpec& model,
                              const RoundingPolicy& policy) {
  if (static_cast<int>(model.drift.size()) != grid.d)
    throw std::invalid_argument("assemble_convection: drift arity mismatch");
  const Eigen::MatrixXd c1 = central_diff_1d(grid.points_per_axis(), grid.h());
  TtMatrixd acc = TtMatrixd::zero(qtt_shape(grid), qtt_shape(grid));
  for (int k = 0; k < grid.d; ++k) {
    TtTensord fk = sample_field(grid, model.drift[k], policy);
    // Differences are taken of the product f_k u: D_k * diag(f_k).
    TtMatrixd term =
        tt_matmul(mode_operator(grid, k, c1), TtMatrixd::diag(fk), policy);
    acc = tt_add(acc, term);
  }
  // The sum is kept exact; addition only adds ranks and the per-term
  // products are already rounded.
  return acc;
}

TtMatrixd assemble_potential(const Grid& grid, const ModelSpec& model,
                             const RoundingPolicy& policy) {
  ScalarField hh = [&model](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (const auto& hi : model.observation) {
      const double v = hi(x);
      s += v * v;
    }
    return s;
  };
  return TtMatrixd::diag(sample_field(grid, hh, policy));
}

GeneratorOperator assemble_generator(const Grid& grid, const ModelSpec& model,
                                     const RoundingPolicy& policy) {
  GeneratorOperator g;
  g.grid = grid;
  g.policy = policy;
  g.laplace = assemble_laplace(grid, policy);
  g.convection = assemble_convection(grid, model, policy);
  g.potential = assemble_potential(grid, model, policy);
  TtMatrixd a = tt_scale(g.laplace, 0.5 * model.q);
  a = tt_add(a, tt_scale(g.convection, -1.0));
  a = tt_add(a, tt_scale(g.potential, -0.5));
  g.full = std::move(a);  // exact sum of the rounded parts
  return g;
}

StabilityReport check_stability(const Grid& grid, const ModelSpec& model, double tau) {
  // Bounds come from grid samples; coarsen when the full grid is too large
  // to materialize.
  Grid s = grid;
  while (s.total_points() > (Index(1) << 21) && s.level > 3) --s.level;

  StabilityReport rep;
  rep.h = grid.h();
  const double hs = s.h();
  const Index n = s.points_per_axis();

  Eigen::VectorXd x(s.d);
  std::vector<Index> idx(s.d, 0);
  const Index total = s.total_points();
  for (Index lin = 0; lin < total; ++lin) {
    for (int k = 0; k < s.d; ++k) x[k] = s.coord(idx[k]);
    for (int i = 0; i < s.d; ++i) {
      const double fv = model.drift[i](x);
      rep.c_f = std::max(rep.c_f, std::abs(fv));
      for (int j = 0; j < s.d; ++j) {
        if (idx[j] + 1 >= n) continue;
        Eigen::VectorXd xn = x;
        xn[j] += hs;
        rep.l_f = std::max(rep.l_f, std::abs(model.drift[i](xn) - fv) / hs);
      }
    }
    for (int i = 0; i < model.m; ++i)
      rep.c_h = std::max(rep.c_h, std::abs(model.observation[i](x)));
    for (int k = 0; k < s.d; ++k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }

  const double q = model.q;
  rep.mesh_ok = (rep.c_f == 0.0) || (rep.h < q / rep.c_f);
  const double denom = q * double(grid.d) / (rep.h * rep.h) + double(grid.d) * rep.l_f +
                       0.5 * double(grid.d) * rep.c_h * rep.c_h;
  rep.tau_max = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
  rep.tau_ok = tau < rep.tau_max;
  return rep;
}

}  // namespace ttf
