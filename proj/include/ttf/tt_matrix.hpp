#pragma once

#include "ttf/tt_tensor.hpp"

namespace ttf {

// One TT-matrix core of shape r_left x m x n x r_right with paired row and
// column mode indices.  Storage order matches the fused tensor core with
// mode index q = i + m*j, so rounding and addition reuse the tensor path.
template <typename Scalar>
struct TtMatrixCore {
  Index rl = 1;
  Index m = 0;
  Index n = 0;
  Index rr = 1;
  Vector<Scalar> data;

  TtMatrixCore() = default;
  TtMatrixCore(Index rl_, Index m_, Index n_, Index rr_)
      : rl(rl_), m(m_), n(n_), rr(rr_) {
    data = Vector<Scalar>::Zero(rl * m * n * rr);
  }

  Scalar& at(Index a, Index i, Index j, Index b) {
    return data[a + rl * (i + m * (j + n * b))];
  }
  Scalar at(Index a, Index i, Index j, Index b) const {
    return data[a + rl * (i + m * (j + n * b))];
  }

  // r_left x r_right slice at fixed (i, j).
  auto slice(Index i, Index j) const {
    return Eigen::Map<const Matrix<Scalar>, 0, Eigen::OuterStride<>>(
        data.data() + rl * (i + m * j), rl, rr, Eigen::OuterStride<>(rl * m * n));
  }
  auto slice(Index i, Index j) {
    return Eigen::Map<Matrix<Scalar>, 0, Eigen::OuterStride<>>(
        data.data() + rl * (i + m * j), rl, rr, Eigen::OuterStride<>(rl * m * n));
  }
};

template <typename Scalar>
class TtMatrix {
 public:
  TtMatrix() = default;

  explicit TtMatrix(std::vector<TtMatrixCore<Scalar>> cores) : cores_(std::move(cores)) {
    validate();
  }

  Index order() const { return static_cast<Index>(cores_.size()); }

  TensorShape row_shape() const {
    std::vector<Index> m;
    for (const auto& c : cores_) m.push_back(c.m);
    return TensorShape(std::move(m));
  }
  TensorShape col_shape() const {
    std::vector<Index> m;
    for (const auto& c : cores_) m.push_back(c.n);
    return TensorShape(std::move(m));
  }

  std::vector<Index> ranks() const {
    std::vector<Index> r;
    r.push_back(cores_.front().rl);
    for (const auto& c : cores_) r.push_back(c.rr);
    return r;
  }

  Index max_rank() const {
    Index m = 1;
    for (const auto& c : cores_) m = std::max(m, c.rr);
    return m;
  }

  Index storage_size() const {
    Index s = 0;
    for (const auto& c : cores_) s += c.rl * c.m * c.n * c.rr;
    return s;
  }

  const std::vector<TtMatrixCore<Scalar>>& cores() const { return cores_; }
  std::vector<TtMatrixCore<Scalar>>& cores() { return cores_; }
  const TtMatrixCore<Scalar>& core(Index k) const { return cores_[k]; }
  TtMatrixCore<Scalar>& core(Index k) { return cores_[k]; }

  bool rank_capped() const { return rank_capped_; }
  void set_rank_capped(bool v) { rank_capped_ = v; }

  // View with paired indices fused into a single mode of size m*n; the
  // underlying layout is identical, so this is a copy of the buffers only.
  TtTensor<Scalar> fused() const {
    std::vector<TtCore<Scalar>> cores;
    cores.reserve(cores_.size());
    for (const auto& c : cores_) {
      TtCore<Scalar> g(c.rl, c.m * c.n, c.rr);
      g.data = c.data;
      cores.push_back(std::move(g));
    }
    return TtTensor<Scalar>(std::move(cores));
  }

  static TtMatrix from_fused(const TtTensor<Scalar>& t, const TensorShape& rows,
                             const TensorShape& cols) {
    if (t.order() != rows.order() || t.order() != cols.order())
      throw std::invalid_argument("TtMatrix::from_fused: order mismatch");
    std::vector<TtMatrixCore<Scalar>> cores;
    for (Index k = 0; k < t.order(); ++k) {
      const auto& g = t.core(k);
      if (g.n != rows.modes[k] * cols.modes[k])
        throw std::invalid_argument("TtMatrix::from_fused: mode size mismatch");
      TtMatrixCore<Scalar> c(g.rl, rows.modes[k], cols.modes[k], g.rr);
      c.data = g.data;
      cores.push_back(std::move(c));
    }
    TtMatrix out(std::move(cores));
    out.set_rank_capped(t.rank_capped());
    return out;
  }

  static TtMatrix identity(const TensorShape& shape) {
    std::vector<TtMatrixCore<Scalar>> cores;
    for (Index n : shape.modes) {
      TtMatrixCore<Scalar> c(1, n, n, 1);
      for (Index i = 0; i < n; ++i) c.at(0, i, i, 0) = Scalar(1);
      cores.push_back(std::move(c));
    }
    return TtMatrix(std::move(cores));
  }

  static TtMatrix zero(const TensorShape& rows, const TensorShape& cols) {
    if (rows.order() != cols.order())
      throw std::invalid_argument("TtMatrix::zero: order mismatch");
    std::vector<TtMatrixCore<Scalar>> cores;
    for (Index k = 0; k < rows.order(); ++k)
      cores.emplace_back(1, rows.modes[k], cols.modes[k], 1);
    return TtMatrix(std::move(cores));
  }

  // Diagonal operator whose diagonal is the given tensor; core ranks are
  // preserved.
  static TtMatrix diag(const TtTensor<Scalar>& t) {
    std::vector<TtMatrixCore<Scalar>> cores;
    for (Index k = 0; k < t.order(); ++k) {
      const auto& g = t.core(k);
      TtMatrixCore<Scalar> c(g.rl, g.n, g.n, g.rr);
      for (Index i = 0; i < g.n; ++i) c.slice(i, i) = g.slice(i);
      cores.push_back(std::move(c));
    }
    return TtMatrix(std::move(cores));
  }

  std::string dump() const {
    std::string s = "TtMatrix d=" + std::to_string(order()) + " cores:";
    for (const auto& c : cores_)
      s += " (" + std::to_string(c.rl) + "," + std::to_string(c.m) + "x" +
           std::to_string(c.n) + "," + std::to_string(c.rr) + ")";
    return s;
  }

 private:
  void validate() const {
    if (cores_.empty()) throw std::invalid_argument("TtMatrix: no cores");
    if (cores_.front().rl != 1 || cores_.back().rr != 1)
      throw std::invalid_argument("TtMatrix: boundary ranks must be 1");
    for (size_t k = 0; k + 1 < cores_.size(); ++k)
      if (cores_[k].rr != cores_[k + 1].rl)
        throw std::invalid_argument("TtMatrix: adjacent core ranks mismatch");
  }

  std::vector<TtMatrixCore<Scalar>> cores_;
  bool rank_capped_ = false;
};

template <typename Scalar>
TtMatrix<Scalar> tt_add(const TtMatrix<Scalar>& a, const TtMatrix<Scalar>& b) {
  if (!(a.row_shape() == b.row_shape()) || !(a.col_shape() == b.col_shape()))
    throw std::invalid_argument("tt_add(matrix): shape mismatch");
  return TtMatrix<Scalar>::from_fused(tt_add(a.fused(), b.fused()), a.row_shape(),
                                      a.col_shape());
}

template <typename Scalar>
TtMatrix<Scalar> tt_round(const TtMatrix<Scalar>& m, const RoundingPolicy& policy) {
  return TtMatrix<Scalar>::from_fused(tt_round(m.fused(), policy), m.row_shape(),
                                      m.col_shape());
}

template <typename Scalar>
TtMatrix<Scalar> tt_scale(const TtMatrix<Scalar>& m, Scalar c) {
  if (!std::isfinite(double(c))) throw std::invalid_argument("tt_scale: non-finite scale");
  TtMatrix<Scalar> out = m;
  out.core(0).data *= c;
  return out;
}

template <typename Scalar>
double tt_norm(const TtMatrix<Scalar>& m) {
  return tt_norm(m.fused());
}

// Exact matrix-vector product; result ranks are products of operand ranks.
template <typename Scalar>
TtTensor<Scalar> tt_matvec_exact(const TtMatrix<Scalar>& m, const TtTensor<Scalar>& v) {
  if (!(m.col_shape() == v.shape()))
    throw std::invalid_argument("tt_matvec: shape mismatch");
  std::vector<TtCore<Scalar>> cores;
  cores.reserve(m.order());
  for (Index k = 0; k < m.order(); ++k) {
    const auto& gm = m.core(k);
    const auto& gv = v.core(k);
    // Product rank index fuses as beta + r_v * alpha on both sides.
    TtCore<Scalar> g(gv.rl * gm.rl, gm.m, gv.rr * gm.rr);
    for (Index i = 0; i < gm.m; ++i) {
      auto s = g.slice(i);
      for (Index j = 0; j < gm.n; ++j) {
        const auto sm = gm.slice(i, j);
        const auto sv = gv.slice(j);
        for (Index ar = 0; ar < gm.rr; ++ar)
          for (Index br = 0; br < gv.rr; ++br)
            for (Index al = 0; al < gm.rl; ++al)
              for (Index bl = 0; bl < gv.rl; ++bl)
                s(bl + gv.rl * al, br + gv.rr * ar) += sm(al, ar) * sv(bl, br);
      }
    }
    cores.push_back(std::move(g));
  }
  return TtTensor<Scalar>(std::move(cores));
}

template <typename Scalar>
TtTensor<Scalar> tt_matvec(const TtMatrix<Scalar>& m, const TtTensor<Scalar>& v,
                           const RoundingPolicy& policy) {
  return tt_round(tt_matvec_exact(m, v), policy);
}

// Exact matrix-matrix product.
template <typename Scalar>
TtMatrix<Scalar> tt_matmul_exact(const TtMatrix<Scalar>& a, const TtMatrix<Scalar>& b) {
  if (!(a.col_shape() == b.row_shape()))
    throw std::invalid_argument("tt_matmul: shape mismatch");
  std::vector<TtMatrixCore<Scalar>> cores;
  cores.reserve(a.order());
  for (Index k = 0; k < a.order(); ++k) {
    const auto& ga = a.core(k);
    const auto& gb = b.core(k);
    TtMatrixCore<Scalar> g(gb.rl * ga.rl, ga.m, gb.n, gb.rr * ga.rr);
    for (Index i = 0; i < ga.m; ++i)
      for (Index j = 0; j < gb.n; ++j) {
        auto s = g.slice(i, j);
        for (Index t = 0; t < ga.n; ++t) {
          const auto sa = ga.slice(i, t);
          const auto sb = gb.slice(t, j);
          for (Index ar = 0; ar < ga.rr; ++ar)
            for (Index br = 0; br < gb.rr; ++br)
              for (Index al = 0; al < ga.rl; ++al)
                for (Index bl = 0; bl < gb.rl; ++bl)
                  s(bl + gb.rl * al, br + gb.rr * ar) += sa(al, ar) * sb(bl, br);
        }
      }
    cores.push_back(std::move(g));
  }
  return TtMatrix<Scalar>(std::move(cores));
}

template <typename Scalar>
TtMatrix<Scalar> tt_matmul(const TtMatrix<Scalar>& a, const TtMatrix<Scalar>& b,
                           const RoundingPolicy& policy) {
  return tt_round(tt_matmul_exact(a, b), policy);
}

// Dense image of the operator; row/column linearization has the first mode
// index fastest, matching tt_to_full.
template <typename Scalar>
Matrix<Scalar> tt_matrix_to_dense(const TtMatrix<Scalar>& m,
                                  Index limit = kDefaultDenseLimit) {
  const Index rows = m.row_shape().total();
  const Index cols = m.col_shape().total();
  if (rows * cols > limit)
    throw std::runtime_error("tt_matrix_to_dense: size limit exceeded");
  Vector<Scalar> flat = tt_to_full(m.fused(), limit);
  // Fused entry (q_1..q_d) with q = i + m*j must be scattered into (I, J).
  Matrix<Scalar> out(rows, cols);
  std::vector<Index> q(m.order(), 0);
  const Index total = flat.size();
  for (Index lin = 0; lin < total; ++lin) {
    Index i = 0, j = 0, si = 1, sj = 1;
    for (Index k = 0; k < m.order(); ++k) {
      const Index mk = m.core(k).m;
      i += (q[k] % mk) * si;
      j += (q[k] / mk) * sj;
      si *= mk;
      sj *= m.core(k).n;
    }
    out(i, j) = flat[lin];
    for (Index k = 0; k < m.order(); ++k) {
      if (++q[k] < m.core(k).m * m.core(k).n) break;
      q[k] = 0;
    }
  }
  return out;
}

using TtMatrixd = TtMatrix<double>;

}  // namespace ttf
