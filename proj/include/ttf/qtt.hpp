#pragma once

#include "ttf/tt_matrix.hpp"

namespace ttf {

namespace detail {

inline Index log2_exact(Index n) {
  Index l = 0;
  Index v = n;
  while (v > 1) {
    if (v % 2 != 0) throw std::invalid_argument("quantize: mode size is not a power of 2");
    v /= 2;
    ++l;
  }
  if (l == 0) throw std::invalid_argument("quantize: mode size must be >= 2");
  return l;
}

// Split a buffer representing (rl, base^levels, rr) into `levels` cores of
// mode size `base` by exact successive SVD.  Values are preserved up to
// machine precision; no rank truncation beyond numerical noise.
template <typename Scalar>
std::vector<TtCore<Scalar>> split_core(const Vector<Scalar>& buf, Index rl, Index rr,
                                       Index base, Index levels) {
  std::vector<TtCore<Scalar>> out;
  out.reserve(levels);
  Matrix<Scalar> c =
      Eigen::Map<const Matrix<Scalar>>(buf.data(), rl * base, buf.size() / (rl * base));
  Index cur = rl;
  for (Index b = 0; b + 1 < levels; ++b) {
    auto f = exact_svd<Scalar>(c);
    const Index r = f.u.cols();
    TtCore<Scalar> g(cur, base, r);
    g.data = Eigen::Map<const Vector<Scalar>>(f.u.data(), f.u.size());
    out.push_back(std::move(g));
    c = Eigen::Map<const Matrix<Scalar>>(f.sv.data(), r * base, f.sv.size() / (r * base));
    cur = r;
  }
  TtCore<Scalar> last(cur, base, rr);
  last.data = Eigen::Map<const Vector<Scalar>>(c.data(), c.size());
  out.push_back(std::move(last));
  return out;
}

}  // namespace detail

// Reshape every mode of size 2^L into L binary modes (little-endian digit
// order, consistent with column-major linearization).
template <typename Scalar>
TtTensor<Scalar> quantize(const TtTensor<Scalar>& t) {
  std::vector<TtCore<Scalar>> cores;
  for (Index k = 0; k < t.order(); ++k) {
    const auto& g = t.core(k);
    const Index levels = detail::log2_exact(g.n);
    auto split = detail::split_core<Scalar>(g.data, g.rl, g.rr, 2, levels);
    for (auto& c : split) cores.push_back(std::move(c));
  }
  return TtTensor<Scalar>(std::move(cores));
}

// Inverse of quantize: contract groups of binary cores back into the
// original mode sizes.
template <typename Scalar>
TtTensor<Scalar> unquantize(const TtTensor<Scalar>& q, const TensorShape& original) {
  std::vector<TtCore<Scalar>> cores;
  Index pos = 0;
  for (Index k = 0; k < original.order(); ++k) {
    const Index levels = detail::log2_exact(original.modes[k]);
    if (pos + levels > q.order())
      throw std::invalid_argument("unquantize: shape does not match quantized order");
    const Index rl = q.core(pos).rl;
    Matrix<Scalar> b = q.core(pos).left();  // (rl*2) x r
    for (Index j = 1; j < levels; ++j) {
      const auto& g = q.core(pos + j);
      Matrix<Scalar> m = b * g.right();
      b = Eigen::Map<const Matrix<Scalar>>(m.data(), m.rows() * g.n, g.rr);
    }
    TtCore<Scalar> core(rl, original.modes[k], q.core(pos + levels - 1).rr);
    core.data = Eigen::Map<const Vector<Scalar>>(b.data(), b.size());
    cores.push_back(std::move(core));
    pos += levels;
  }
  if (pos != q.order()) throw std::invalid_argument("unquantize: leftover cores");
  return TtTensor<Scalar>(std::move(cores));
}

// QTT reshape of an operator: each core with square mode N=2^L splits into
// L cores of paired binary indices (2x2 each).
template <typename Scalar>
TtMatrix<Scalar> quantize(const TtMatrix<Scalar>& m) {
  std::vector<TtMatrixCore<Scalar>> cores;
  for (Index k = 0; k < m.order(); ++k) {
    const auto& g = m.core(k);
    if (g.m != g.n)
      throw std::invalid_argument("quantize(matrix): only square modes supported");
    const Index levels = detail::log2_exact(g.m);
    const Index nn = g.m;
    // Gather into bit-interleaved order: fused mode b carries (i_b, j_b).
    Vector<Scalar> buf(g.data.size());
    for (Index ar = 0; ar < g.rr; ++ar)
      for (Index j = 0; j < nn; ++j)
        for (Index i = 0; i < nn; ++i) {
          Index fused = 0, p = 1;
          Index ii = i, jj = j;
          for (Index b = 0; b < levels; ++b) {
            fused += ((ii % 2) + 2 * (jj % 2)) * p;
            ii /= 2;
            jj /= 2;
            p *= 4;
          }
          for (Index al = 0; al < g.rl; ++al)
            buf[al + g.rl * (fused + p * ar)] = g.at(al, i, j, ar);
        }
    auto split = detail::split_core<Scalar>(buf, g.rl, g.rr, 4, levels);
    for (auto& c : split) {
      TtMatrixCore<Scalar> mc(c.rl, 2, 2, c.rr);
      mc.data = c.data;  // fused index q = i + 2*j matches the gather above
      cores.push_back(std::move(mc));
    }
  }
  return TtMatrix<Scalar>(std::move(cores));
}

template <typename Scalar>
TtMatrix<Scalar> unquantize(const TtMatrix<Scalar>& q, const TensorShape& original) {
  std::vector<TtMatrixCore<Scalar>> cores;
  Index pos = 0;
  for (Index k = 0; k < original.order(); ++k) {
    const Index nn = original.modes[k];
    const Index levels = detail::log2_exact(nn);
    const Index rl = q.core(pos).rl;
    Matrix<Scalar> b(rl * 4, q.core(pos).rr);
    b = Eigen::Map<const Matrix<Scalar>>(q.core(pos).data.data(), rl * 4, q.core(pos).rr);
    for (Index j = 1; j < levels; ++j) {
      const auto& g = q.core(pos + j);
      Matrix<Scalar> right =
          Eigen::Map<const Matrix<Scalar>>(g.data.data(), g.rl, 4 * g.rr);
      Matrix<Scalar> m = b * right;
      b = Eigen::Map<const Matrix<Scalar>>(m.data(), m.rows() * 4, g.rr);
    }
    const Index rr = q.core(pos + levels - 1).rr;
    // Scatter interleaved (i_b, j_b) digits back to (i, j).
    TtMatrixCore<Scalar> core(rl, nn, nn, rr);
    const Index fused_total = nn * nn;
    for (Index fused = 0; fused < fused_total; ++fused) {
      Index i = 0, j = 0, f = fused, p = 1;
      for (Index bbit = 0; bbit < levels; ++bbit) {
        const Index qd = f % 4;
        i += (qd % 2) * p;
        j += (qd / 2) * p;
        f /= 4;
        p *= 2;
      }
      for (Index ar = 0; ar < rr; ++ar)
        for (Index al = 0; al < rl; ++al)
          core.at(al, i, j, ar) = b(al + rl * fused, ar);
    }
    cores.push_back(std::move(core));
    pos += levels;
  }
  if (pos != q.order()) throw std::invalid_argument("unquantize: leftover cores");
  return TtMatrix<Scalar>(std::move(cores));
}

namespace detail {

inline double effective_rank_impl(const std::vector<Index>& modes,
                                  const std::vector<Index>& ranks) {
  const size_t d = modes.size();
  double storage = 0.0;
  for (size_t k = 0; k < d; ++k)
    storage += double(ranks[k]) * double(modes[k]) * double(ranks[k + 1]);
  const double boundary =
      double(ranks[0]) * double(modes[0]) + double(ranks[d]) * double(modes[d - 1]);
  double interior = 0.0;
  for (size_t k = 1; k + 1 < d; ++k) interior += double(modes[k]);
  if (interior == 0.0) return storage / boundary;
  return (std::sqrt(boundary * boundary + 4.0 * interior * storage) - boundary) /
         (2.0 * interior);
}

}  // namespace detail

// Uniform rank whose storage cost matches the actual representation.
template <typename Scalar>
double effective_rank(const TtTensor<Scalar>& t) {
  return detail::effective_rank_impl(t.shape().modes, t.ranks());
}

template <typename Scalar>
double effective_rank(const TtMatrix<Scalar>& m) {
  std::vector<Index> modes;
  for (const auto& c : m.cores()) modes.push_back(c.m * c.n);
  return detail::effective_rank_impl(modes, m.ranks());
}

}  // namespace ttf
