#pragma once

#include "ttf/model.hpp"
#include "ttf/qtt.hpp"
#include "ttf/tt_matrix.hpp"

namespace ttf {

// Binary QTT shape of the grid index space: d*L modes of size 2.
TensorShape qtt_shape(const Grid& grid);

// Dense nodal samples of a scalar field, axis-1 index fastest.
Eigen::VectorXd sample_field_dense(const Grid& grid, const ScalarField& field,
                                   Index limit = kDefaultDenseLimit);

// QTT compression of the nodal samples.
TtTensord sample_field(const Grid& grid, const ScalarField& field,
                       const RoundingPolicy& policy, Index limit = kDefaultDenseLimit);

// Rank-1 (per physical mode) QTT tensor of the i-th coordinate values.
TtTensord coordinate_tensor(const Grid& grid, int axis);

// 1D stencil matrices with Dirichlet truncation at the boundary rows.
Eigen::MatrixXd laplace_1d(Index n, double h);        // (1/h^2) tridiag(1,-2,1)
Eigen::MatrixXd central_diff_1d(Index n, double h);   // (1/h) tridiag(-1/2,0,1/2)

// QTT operator applying `op1d` on one axis and identity on the others.
TtMatrixd mode_operator(const Grid& grid, int axis, const Eigen::MatrixXd& op1d);

// d-dimensional FD Laplacian Delta_1 (x) I ... + ... in QTT form.
TtMatrixd assemble_laplace(const Grid& grid, const RoundingPolicy& policy);

// Convection operator sum_i d(f_i .)/dx_i via central differences of the
// product f_i u (divergence form).
TtMatrixd assemble_convection(const Grid& grid, const ModelSpec& model,
                              const RoundingPolicy& policy);

// Diagonal multiplication operator with entries (h^T S^-1 h)(x_l), S = I.
TtMatrixd assemble_potential(const Grid& grid, const ModelSpec& model,
                             const RoundingPolicy& policy);

struct GeneratorOperator {
  TtMatrixd full;        // (q/2) Laplace - Convection - (1/2) Potential
  TtMatrixd laplace;
  TtMatrixd convection;
  TtMatrixd potential;
  Grid grid;
  RoundingPolicy policy;
};

GeneratorOperator assemble_generator(const Grid& grid, const ModelSpec& model,
                                     const RoundingPolicy& policy);

// Explicit-scheme stability diagnostic: h < q/C_f and
// tau < (q d/h^2 + d L_f + (d/2) C_h^2)^-1, with C_f, C_h, L_f estimated
// from grid samples.
struct StabilityReport {
  bool mesh_ok = false;
  bool tau_ok = false;
  double tau_max = 0.0;
  double c_f = 0.0;
  double c_h = 0.0;
  double l_f = 0.0;
  double h = 0.0;
  bool ok() const { return mesh_ok && tau_ok; }
};

StabilityReport check_stability(const Grid& grid, const ModelSpec& model, double tau);

}  // namespace ttf
