#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "molgen/error.hpp"

namespace molgen::nn {

class ShapeMismatchError : public Error {
public:
  explicit ShapeMismatchError(const std::string& what) : Error("shape mismatch: " + what) {}
};

class NonFiniteValueError : public Error {
public:
  NonFiniteValueError() : Error("non-finite value at layer boundary") {}
};

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
constexpr double kProbFloor = 1e-10;

/// Reverse-mode tape. Operations execute eagerly and record a closure that
/// accumulates parent gradients. Nodes only ever reference earlier nodes, so
/// the recording is acyclic by construction and a reverse sweep is a valid
/// topological order.
template <typename T>
class Tape {
public:
  using Ref = std::int32_t;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return nodes_.size(); }

  void clear() { nodes_.clear(); }

  const Mat<T>& value(Ref i) const { return nodes_[check(i)].value; }

  /// Gradient of the last backward() target with respect to node i; empty
  /// matrix when the node did not influence the target.
  const Mat<T>& grad(Ref i) const { return nodes_[check(i)].grad; }

  Ref input(Mat<T> v, bool requires_grad = false) {
    return push(std::move(v), requires_grad, nullptr);
  }

  Ref matmul(Ref a, Ref b) {
    auto& A = node(a).value;
    auto& B = node(b).value;
    if (A.cols() != B.rows()) throw ShapeMismatchError("matmul");
    Mat<T> out = A * B;
    return record(std::move(out), {a, b}, [this, a, b](Ref o) {
      const Mat<T>& go = nodes_[o].grad;
      if (wants(a)) gbuf(a).noalias() += go * nodes_[b].value.transpose();
      if (wants(b)) gbuf(b).noalias() += nodes_[a].value.transpose() * go;
    });
  }

  Ref add(Ref a, Ref b) {
    require_same(a, b, "add");
    Mat<T> out = node(a).value + node(b).value;
    return record(std::move(out), {a, b}, [this, a, b](Ref o) {
      if (wants(a)) gbuf(a) += nodes_[o].grad;
      if (wants(b)) gbuf(b) += nodes_[o].grad;
    });
  }

  Ref sub(Ref a, Ref b) {
    require_same(a, b, "sub");
    Mat<T> out = node(a).value - node(b).value;
    return record(std::move(out), {a, b}, [this, a, b](Ref o) {
      if (wants(a)) gbuf(a) += nodes_[o].grad;
      if (wants(b)) gbuf(b) -= nodes_[o].grad;
    });
  }

  Ref mul(Ref a, Ref b) {
    require_same(a, b, "mul");
    Mat<T> out = node(a).value.cwiseProduct(node(b).value);
    return record(std::move(out), {a, b}, [this, a, b](Ref o) {
      const Mat<T>& go = nodes_[o].grad;
      if (wants(a)) gbuf(a).array() += go.array() * nodes_[b].value.array();
      if (wants(b)) gbuf(b).array() += go.array() * nodes_[a].value.array();
    });
  }

  /// Adds a 1 x C row vector to every row of a.
  Ref add_rowvec(Ref a, Ref v) {
    auto& A = node(a).value;
    auto& V = node(v).value;
    if (V.rows() != 1 || V.cols() != A.cols()) throw ShapeMismatchError("add_rowvec");
    Mat<T> out = A.rowwise() + V.row(0);
    return record(std::move(out), {a, v}, [this, a, v](Ref o) {
      const Mat<T>& go = nodes_[o].grad;
      if (wants(a)) gbuf(a) += go;
      if (wants(v)) gbuf(v).row(0) += go.colwise().sum();
    });
  }

  Ref scale_add(Ref a, T alpha, T beta) {
    Mat<T> out = (node(a).value.array() * alpha + beta).matrix();
    return record(std::move(out), {a}, [this, a, alpha](Ref o) {
      if (wants(a)) gbuf(a) += alpha * nodes_[o].grad;
    });
  }

  Ref slice_cols(Ref a, Eigen::Index begin, Eigen::Index len) {
    auto& A = node(a).value;
    if (begin < 0 || len < 0 || begin + len > A.cols())
      throw ShapeMismatchError("slice_cols");
    Mat<T> out = A.middleCols(begin, len);
    return record(std::move(out), {a}, [this, a, begin, len](Ref o) {
      if (wants(a)) gbuf(a).middleCols(begin, len) += nodes_[o].grad;
    });
  }

  /// Selects rows[i] of a for each output row i; rows may repeat.
  Ref gather_rows(Ref a, std::vector<std::size_t> rows) {
    const Mat<T>& A = node(a).value;
    for (std::size_t r : rows)
      if (static_cast<Eigen::Index>(r) >= A.rows()) throw ShapeMismatchError("gather_rows");
    Mat<T> out(static_cast<Eigen::Index>(rows.size()), A.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.row(static_cast<Eigen::Index>(i)) = A.row(static_cast<Eigen::Index>(rows[i]));
    return record(std::move(out), {a}, [this, a, rows = std::move(rows)](Ref o) {
      if (!wants(a)) return;
      const Mat<T>& go = nodes_[o].grad;
      Mat<T>& ga = gbuf(a);
      for (std::size_t i = 0; i < rows.size(); ++i)
        ga.row(static_cast<Eigen::Index>(rows[i])) += go.row(static_cast<Eigen::Index>(i));
    });
  }

  /// Row-major reshape; the linear element order is preserved.
  Ref reshape(Ref a, Eigen::Index rows, Eigen::Index cols) {
    auto& A = node(a).value;
    if (rows * cols != A.size()) throw ShapeMismatchError("reshape");
    Mat<T> out = Eigen::Map<const Mat<T>>(A.data(), rows, cols);
    return record(std::move(out), {a}, [this, a](Ref o) {
      if (!wants(a)) return;
      const Mat<T>& go = nodes_[o].grad;
      Mat<T>& ga = gbuf(a);
      ga += Eigen::Map<const Mat<T>>(go.data(), ga.rows(), ga.cols());
    });
  }

  Ref sigmoid(Ref a) {
    Mat<T> out = node(a).value.unaryExpr([](T x) {
      if (x >= 0) return T(1) / (T(1) + std::exp(-x));
      T e = std::exp(x);
      return e / (T(1) + e);
    });
    return record(std::move(out), {a}, [this, a](Ref o) {
      if (!wants(a)) return;
      const auto& y = nodes_[o].value.array();
      gbuf(a).array() += nodes_[o].grad.array() * y * (T(1) - y);
    });
  }

  Ref tanh_(Ref a) {
    Mat<T> out = node(a).value.array().tanh().matrix();
    return record(std::move(out), {a}, [this, a](Ref o) {
      if (!wants(a)) return;
      const auto& y = nodes_[o].value.array();
      gbuf(a).array() += nodes_[o].grad.array() * (T(1) - y * y);
    });
  }

  Ref selu(Ref a) {
    const T lambda = static_cast<T>(kSeluLambda);
    const T alpha = static_cast<T>(kSeluAlpha);
    Mat<T> out = node(a).value.unaryExpr([lambda, alpha](T x) {
      return x > 0 ? lambda * x : lambda * alpha * (std::exp(x) - T(1));
    });
    return record(std::move(out), {a}, [this, a, lambda, alpha](Ref o) {
      if (!wants(a)) return;
      const Mat<T>& x = nodes_[a].value;
      const Mat<T>& y = nodes_[o].value;
      // For x <= 0 the derivative is lambda*alpha*exp(x) = y + lambda*alpha.
      Mat<T> deriv = (x.array() > T(0))
                         .select(Mat<T>::Constant(x.rows(), x.cols(), lambda),
                                 (y.array() + lambda * alpha).matrix());
      gbuf(a).array() += nodes_[o].grad.array() * deriv.array();
    });
  }

  Ref exp_(Ref a) {
    Mat<T> out = node(a).value.array().exp().matrix();
    return record(std::move(out), {a}, [this, a](Ref o) {
      if (!wants(a)) return;
      gbuf(a).array() += nodes_[o].grad.array() * nodes_[o].value.array();
    });
  }

  /// log(max(x, kProbFloor)); gradient is zero where the floor is active.
  Ref log_(Ref a) {
    const T floor_v = static_cast<T>(kProbFloor);
    Mat<T> out = node(a).value.unaryExpr(
        [floor_v](T x) { return std::log(x < floor_v ? floor_v : x); });
    return record(std::move(out), {a}, [this, a, floor_v](Ref o) {
      if (!wants(a)) return;
      const Mat<T>& x = nodes_[a].value;
      Mat<T> contrib = (x.array() >= floor_v)
                           .select((nodes_[o].grad.array() / x.array().max(floor_v)).matrix(),
                                   Mat<T>::Zero(x.rows(), x.cols()));
      gbuf(a) += contrib;
    });
  }

  Ref clamp(Ref a, T lo, T hi) {
    Mat<T> out = node(a).value.array().max(lo).min(hi).matrix();
    return record(std::move(out), {a}, [this, a, lo, hi](Ref o) {
      if (!wants(a)) return;
      const Mat<T>& x = nodes_[a].value;
      Mat<T> contrib = (x.array() > lo && x.array() < hi)
                           .select(nodes_[o].grad, Mat<T>::Zero(x.rows(), x.cols()));
      gbuf(a) += contrib;
    });
  }

  Ref softmax_rows(Ref a) {
    const Mat<T>& A = node(a).value;
    Mat<T> out(A.rows(), A.cols());
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      T m = A.row(r).maxCoeff();
      out.row(r) = (A.row(r).array() - m).exp();
      out.row(r) /= out.row(r).sum();
    }
    return record(std::move(out), {a}, [this, a](Ref o) {
      if (!wants(a)) return;
      const Mat<T>& y = nodes_[o].value;
      const Mat<T>& go = nodes_[o].grad;
      Mat<T>& ga = gbuf(a);
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        T dot = go.row(r).dot(y.row(r));
        ga.row(r).array() += y.row(r).array() * (go.row(r).array() - dot);
      }
    });
  }

  Ref sum_all(Ref a) {
    Mat<T> out(1, 1);
    out(0, 0) = node(a).value.sum();
    return record(std::move(out), {a}, [this, a](Ref o) {
      if (wants(a)) gbuf(a).array() += nodes_[o].grad(0, 0);
    });
  }

  /// Sliding-window rearrangement for 1-D convolution over a batch of
  /// sequences stacked vertically: x is (batch*seq_len) x channels, the
  /// result is (batch*out_len) x (kernel*channels) with out_len =
  /// (seq_len - kernel)/stride + 1.
  Ref im2col(Ref x, Eigen::Index seq_len, Eigen::Index kernel, Eigen::Index stride) {
    const Mat<T>& X = node(x).value;
    if (seq_len <= 0 || X.rows() % seq_len != 0) throw ShapeMismatchError("im2col rows");
    if (kernel <= 0 || kernel > seq_len || stride <= 0) throw ShapeMismatchError("im2col kernel");
    Eigen::Index batch = X.rows() / seq_len;
    Eigen::Index channels = X.cols();
    Eigen::Index out_len = (seq_len - kernel) / stride + 1;
    Mat<T> out(batch * out_len, kernel * channels);
    for (Eigen::Index b = 0; b < batch; ++b)
      for (Eigen::Index t = 0; t < out_len; ++t)
        for (Eigen::Index k = 0; k < kernel; ++k)
          out.block(b * out_len + t, k * channels, 1, channels) =
              X.row(b * seq_len + t * stride + k);
    return record(std::move(out), {x},
                  [this, x, seq_len, kernel, stride, batch, out_len, channels](Ref o) {
                    if (!wants(x)) return;
                    const Mat<T>& go = nodes_[o].grad;
                    Mat<T>& gx = gbuf(x);
                    for (Eigen::Index b = 0; b < batch; ++b)
                      for (Eigen::Index t = 0; t < out_len; ++t)
                        for (Eigen::Index k = 0; k < kernel; ++k)
                          gx.row(b * seq_len + t * stride + k) +=
                              go.block(b * out_len + t, k * channels, 1, channels);
                  });
  }

  /// -sum_r log(clamp(probs(r, hot[r]))) / divisor. With rows grouped as
  /// batch x positions and divisor = batch, this is the mean over the batch
  /// of the per-sequence position sum.
  Ref cross_entropy(Ref probs, const std::vector<std::size_t>& hot, T divisor) {
    const Mat<T>& P = node(probs).value;
    if (static_cast<Eigen::Index>(hot.size()) != P.rows())
      throw ShapeMismatchError("cross_entropy rows");
    for (std::size_t h : hot)
      if (static_cast<Eigen::Index>(h) >= P.cols())
        throw ShapeMismatchError("cross_entropy target column");
    const T floor_v = static_cast<T>(kProbFloor);
    T loss = 0;
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      T p = P(r, static_cast<Eigen::Index>(hot[r]));
      p = p < floor_v ? floor_v : (p > T(1) ? T(1) : p);
      loss -= std::log(p);
    }
    Mat<T> out(1, 1);
    out(0, 0) = loss / divisor;
    return record(std::move(out), {probs}, [this, probs, hot, divisor, floor_v](Ref o) {
      if (!wants(probs)) return;
      const Mat<T>& P = nodes_[probs].value;
      Mat<T>& gp = gbuf(probs);
      T go = nodes_[o].grad(0, 0);
      for (Eigen::Index r = 0; r < P.rows(); ++r) {
        Eigen::Index c = static_cast<Eigen::Index>(hot[r]);
        T p = P(r, c);
        if (p >= floor_v && p <= T(1)) gp(r, c) -= go / (p * divisor);
      }
    });
  }

  /// Seeds d(target)/d(target) = 1 and sweeps the tape in reverse. target
  /// must be a 1x1 node.
  void backward(Ref target) {
    Node& t = node(target);
    if (t.value.rows() != 1 || t.value.cols() != 1)
      throw ShapeMismatchError("backward target must be scalar");
    gbuf(target).setOnes();
    for (Ref i = target; i >= 0; --i) {
      Node& nd = nodes_[i];
      if (nd.back && nd.grad.size() > 0) nd.back(i);
    }
  }

private:
  struct Node {
    Mat<T> value;
    Mat<T> grad;
    std::function<void(Ref)> back;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;

  Ref check(Ref i) const {
    assert(i >= 0 && static_cast<std::size_t>(i) < nodes_.size());
    return i;
  }

  Node& node(Ref i) { return nodes_[check(i)]; }

  bool wants(Ref i) const { return nodes_[i].requires_grad; }

  Mat<T>& gbuf(Ref i) {
    Node& nd = nodes_[i];
    if (nd.grad.size() == 0) {
      nd.grad.resize(nd.value.rows(), nd.value.cols());
      nd.grad.setZero();
    }
    return nd.grad;
  }

  Ref push(Mat<T> v, bool requires_grad, std::function<void(Ref)> back) {
    if (!v.allFinite()) throw NonFiniteValueError();
    nodes_.push_back(Node{std::move(v), {}, std::move(back), requires_grad});
    return static_cast<Ref>(nodes_.size() - 1);
  }

  Ref record(Mat<T> v, std::initializer_list<Ref> parents, std::function<void(Ref)> back) {
    bool req = false;
    for (Ref p : parents) {
      check(p);
      req = req || nodes_[p].requires_grad;
    }
    if (!req) back = nullptr;
    return push(std::move(v), req, std::move(back));
  }

  void require_same(Ref a, Ref b, const char* what) {
    if (node(a).value.rows() != node(b).value.rows() ||
        node(a).value.cols() != node(b).value.cols())
      throw ShapeMismatchError(what);
  }
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace molgen::nn
