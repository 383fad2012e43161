#pragma once

// Gated recurrent unit with an affine read-out, mapping (a_k, f_k) to six
// envelope controls per frame:
//
//   z  = sigmoid(W_z x + U_z h + b_z)
//   r  = sigmoid(W_r x + U_r h + b_r)
//   n  = tanh(W_n x + b_n + r * (U_n h + c_n))
//   h' = (1 - z) * n + z * h
//   y  = W_o h' + b_o
//
// Gate tensors are stored stacked in z, r, n order, row-major, so the flat
// storage of each member is exactly the on-disk tensor order.
//
// Sequences are laid out as 2 x (K*B) matrices where column k*B + b holds
// frame k of batch element b.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>

#include "fmtt/error.hpp"

namespace fmtt {

struct ModelConfig {
  int input_dim = 2;
  int hidden_dim = 128;
  int output_dim = 6;

  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ColMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
struct GruParams {
  RowMatrix<T> w_in;   // 3H x I   W_z; W_r; W_n
  RowMatrix<T> u_rec;  // 3H x H   U_z; U_r; U_n
  Vector<T> b_in;      // 3H       b_z; b_r; b_n
  Vector<T> c_n;       // H
  RowMatrix<T> w_out;  // O x H
  Vector<T> b_out;     // O

  static GruParams zeros(const ModelConfig& config) {
    const int h = config.hidden_dim;
    GruParams p;
    p.w_in = RowMatrix<T>::Zero(3 * h, config.input_dim);
    p.u_rec = RowMatrix<T>::Zero(3 * h, h);
    p.b_in = Vector<T>::Zero(3 * h);
    p.c_n = Vector<T>::Zero(h);
    p.w_out = RowMatrix<T>::Zero(config.output_dim, h);
    p.b_out = Vector<T>::Zero(config.output_dim);
    return p;
  }

  int hidden_dim() const noexcept { return static_cast<int>(c_n.size()); }
  ModelConfig config() const noexcept {
    return {static_cast<int>(w_in.cols()), hidden_dim(), static_cast<int>(b_out.size())};
  }

  /// Every tensor in file order.
  std::array<std::span<T>, 6> tensors() noexcept {
    return {std::span<T>(w_in.data(), w_in.size()),   std::span<T>(u_rec.data(), u_rec.size()),
            std::span<T>(b_in.data(), b_in.size()),   std::span<T>(c_n.data(), c_n.size()),
            std::span<T>(w_out.data(), w_out.size()), std::span<T>(b_out.data(), b_out.size())};
  }
  std::array<std::span<const T>, 6> tensors() const noexcept {
    return {std::span<const T>(w_in.data(), w_in.size()),
            std::span<const T>(u_rec.data(), u_rec.size()),
            std::span<const T>(b_in.data(), b_in.size()),
            std::span<const T>(c_n.data(), c_n.size()),
            std::span<const T>(w_out.data(), w_out.size()),
            std::span<const T>(b_out.data(), b_out.size())};
  }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tensors()) n += t.size();
    return n;
  }

  template <typename U>
  GruParams<U> cast() const {
    GruParams<U> out;
    out.w_in = w_in.template cast<U>();
    out.u_rec = u_rec.template cast<U>();
    out.b_in = b_in.template cast<U>();
    out.c_n = c_n.template cast<U>();
    out.w_out = w_out.template cast<U>();
    out.b_out = b_out.template cast<U>();
    return out;
  }

  bool operator==(const GruParams& o) const {
    return w_in == o.w_in && u_rec == o.u_rec && b_in == o.b_in && c_n == o.c_n &&
           w_out == o.w_out && b_out == o.b_out;
  }
};

/// Activations kept for backpropagation through time.
template <typename T>
struct ForwardCache {
  int batch = 0;
  int frames = 0;
  ColMatrix<T> x;       // I x (K*B)
  ColMatrix<T> h_prev;  // H x (K*B), state entering each frame
  ColMatrix<T> z, r, n;
  ColMatrix<T> m;       // U_n h + c_n
  ColMatrix<T> h;       // H x (K*B), state leaving each frame
  ColMatrix<T> y;       // O x (K*B)

  ColMatrix<T> final_state() const { return h.rightCols(batch); }
};

template <typename T>
struct FrameOutput {
  Vector<T> y;
  Vector<T> h;
};

/// Uniform(-1/sqrt(H), 1/sqrt(H)) for every entry.
GruParams<float> init_params(const ModelConfig& config, std::uint64_t seed);

template <typename T>
Vector<T> reset_state(int hidden_dim) {
  return Vector<T>::Zero(hidden_dim);
}

namespace detail {

template <typename T>
ColMatrix<T> sigmoid(const ColMatrix<T>& x) {
  return (T(1) + (-x.array()).exp()).inverse().matrix();
}

}  // namespace detail

/// Runs B sequences of K frames from initial states h0 (H x B).
template <typename T>
ForwardCache<T> forward_batch(const GruParams<T>& p, const ColMatrix<T>& h0,
                              const ColMatrix<T>& x, int batch) {
  const int hd = p.hidden_dim();
  if (batch <= 0 || x.cols() % batch != 0 || h0.rows() != hd || h0.cols() != batch ||
      x.rows() != p.w_in.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "forward_batch: inconsistent input shapes");
  }
  ForwardCache<T> c;
  c.batch = batch;
  c.frames = static_cast<int>(x.cols() / batch);
  const Eigen::Index cols = x.cols();
  c.x = x;
  c.h_prev.resize(hd, cols);
  c.z.resize(hd, cols);
  c.r.resize(hd, cols);
  c.n.resize(hd, cols);
  c.m.resize(hd, cols);
  c.h.resize(hd, cols);
  c.y.resize(p.b_out.size(), cols);

  // Per-frame work happens on freshly allocated temporaries so that the
  // arithmetic is identical whatever the position of the frame.
  ColMatrix<T> h = h0;
  ColMatrix<T> xk, xw, hu, z, r, m, n, hn, y;
  for (int k = 0; k < c.frames; ++k) {
    const Eigen::Index col = static_cast<Eigen::Index>(k) * batch;
    xk = x.middleCols(col, batch);
    xw = p.w_in * xk;
    hu = p.u_rec * h;
    z = xw.topRows(hd) + hu.topRows(hd);
    z.colwise() += p.b_in.head(hd);
    z = detail::sigmoid<T>(z);
    r = xw.middleRows(hd, hd) + hu.middleRows(hd, hd);
    r.colwise() += p.b_in.segment(hd, hd);
    r = detail::sigmoid<T>(r);
    m = hu.bottomRows(hd);
    m.colwise() += p.c_n;
    n = xw.bottomRows(hd) + (r.array() * m.array()).matrix();
    n.colwise() += p.b_in.tail(hd);
    n = n.array().tanh().matrix();
    hn = ((T(1) - z.array()) * n.array() + z.array() * h.array()).matrix();
    y = p.w_out * hn;
    y.colwise() += p.b_out;

    c.h_prev.middleCols(col, batch) = h;
    c.z.middleCols(col, batch) = z;
    c.r.middleCols(col, batch) = r;
    c.n.middleCols(col, batch) = n;
    c.m.middleCols(col, batch) = m;
    c.h.middleCols(col, batch) = hn;
    c.y.middleCols(col, batch) = y;
    h = hn;
  }
  return c;
}

/// Single sequence: x is I x K.
template <typename T>
ForwardCache<T> forward_sequence(const GruParams<T>& p, const Vector<T>& h0, const ColMatrix<T>& x) {
  return forward_batch<T>(p, h0, x, 1);
}

template <typename T>
FrameOutput<T> forward_frame(const GruParams<T>& p, const Vector<T>& h, T a, T f) {
  ColMatrix<T> x(2, 1);
  x << a, f;
  const ForwardCache<T> c = forward_batch<T>(p, h, x, 1);
  return {c.y.col(0), c.h.col(0)};
}

/// Gradients of an arbitrary scalar loss given dL/dy (O x (K*B)).
template <typename T>
GruParams<T> backward(const GruParams<T>& p, const ForwardCache<T>& c, const ColMatrix<T>& dy) {
  const int hd = p.hidden_dim();
  const int batch = c.batch;
  const Eigen::Index cols = c.x.cols();
  if (dy.rows() != c.y.rows() || dy.cols() != cols) {
    throw Error(ErrorKind::ShapeMismatch, "backward: dy shape differs from forward outputs");
  }

  GruParams<T> g;
  g.w_out = dy * c.h.transpose();
  g.b_out = dy.rowwise().sum();
  const ColMatrix<T> dh_out = p.w_out.transpose() * dy;

  // Pre-activation gradients, stacked as [z; r; n] for the input weights and
  // [z; r; m] for the recurrent weights.
  ColMatrix<T> d_in(3 * hd, cols);
  ColMatrix<T> d_rec(3 * hd, cols);
  ColMatrix<T> dh_next = ColMatrix<T>::Zero(hd, batch);
  ColMatrix<T> dh, hp, z, r, n, m, dz, dn, dan, daz, dar, dm, stacked(3 * hd, batch);
  for (int k = c.frames - 1; k >= 0; --k) {
    const Eigen::Index col = static_cast<Eigen::Index>(k) * batch;
    dh = dh_out.middleCols(col, batch) + dh_next;
    hp = c.h_prev.middleCols(col, batch);
    z = c.z.middleCols(col, batch);
    r = c.r.middleCols(col, batch);
    n = c.n.middleCols(col, batch);
    m = c.m.middleCols(col, batch);

    dz = (dh.array() * (hp.array() - n.array())).matrix();
    dn = (dh.array() * (T(1) - z.array())).matrix();
    dan = (dn.array() * (T(1) - n.array().square())).matrix();
    dm = (dan.array() * r.array()).matrix();
    dar = (dan.array() * m.array() * r.array() * (T(1) - r.array())).matrix();
    daz = (dz.array() * z.array() * (T(1) - z.array())).matrix();

    stacked.topRows(hd) = daz;
    stacked.middleRows(hd, hd) = dar;
    stacked.bottomRows(hd) = dm;
    d_rec.middleCols(col, batch) = stacked;
    d_in.middleCols(col, batch).topRows(2 * hd) = stacked.topRows(2 * hd);
    d_in.middleCols(col, batch).bottomRows(hd) = dan;

    dh_next = (dh.array() * z.array()).matrix() + p.u_rec.transpose() * stacked;
  }

  g.w_in = d_in * c.x.transpose();
  g.b_in = d_in.rowwise().sum();
  g.u_rec = d_rec * c.h_prev.transpose();
  g.c_n = d_rec.bottomRows(hd).rowwise().sum();
  return g;
}

/// Mean absolute error over every element.
template <typename T>
T l1_loss(const ColMatrix<T>& pred, const ColMatrix<T>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "l1_loss: prediction and target shapes differ");
  }
  if (pred.size() == 0) return T(0);
  return (pred - target).array().abs().sum() / static_cast<T>(pred.size());
}

/// d(mean L1)/dy, with the subgradient at zero taken as 0.
template <typename T>
ColMatrix<T> l1_grad(const ColMatrix<T>& pred, const ColMatrix<T>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "l1_grad: prediction and target shapes differ");
  }
  const T scale = T(1) / static_cast<T>(std::max<Eigen::Index>(pred.size(), 1));
  return (pred - target).unaryExpr([scale](T d) { return d > 0 ? scale : (d < 0 ? -scale : T(0)); });
}

template <typename T>
struct LossAndGrad {
  T loss = 0;
  GruParams<T> grad;
};

template <typename T>
LossAndGrad<T> l1_backward(const GruParams<T>& p, const ForwardCache<T>& c,
                           const ColMatrix<T>& target) {
  return {l1_loss<T>(c.y, target), backward<T>(p, c, l1_grad<T>(c.y, target))};
}

inline constexpr std::uint16_t kModelVersion = 1;

void save_model(const GruParams<float>& params, const std::filesystem::path& path);
GruParams<float> load_model(const std::filesystem::path& path);

}  // namespace fmtt
