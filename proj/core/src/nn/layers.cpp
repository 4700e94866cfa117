#include "molgen/nn/layers.hpp"

#include <cmath>

namespace molgen::nn {

template <typename T>
void gru_cell_raw(const Mat<T>& x, const Mat<T>& h, const GruParams<T>& p,
                  Mat<T>& out, const Mat<T>* extra_pre) {
  Eigen::Index hidden = p.Uc.rows();
  Mat<T> pre = (x * p.W).rowwise() + p.b.row(0);
  if (extra_pre != nullptr) pre += *extra_pre;
  Mat<T> zr = pre.leftCols(2 * hidden) + h * p.Uzr;
  sigmoid_raw(zr);
  Mat<T> cand =
      (pre.rightCols(hidden) + (zr.rightCols(hidden).cwiseProduct(h)) * p.Uc)
          .array()
          .tanh()
          .matrix();
  out = h + zr.leftCols(hidden).cwiseProduct(cand - h);
}

template <typename T>
void softmax_rows_raw(Mat<T>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    T mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

template <typename T>
void selu_raw(Mat<T>& m) {
  const T lambda = static_cast<T>(kSeluLambda);
  const T alpha = static_cast<T>(kSeluAlpha);
  m = m.unaryExpr([lambda, alpha](T x) {
    return x > 0 ? lambda * x : lambda * alpha * (std::exp(x) - T(1));
  });
}

template <typename T>
void sigmoid_raw(Mat<T>& m) {
  m = m.unaryExpr([](T x) {
    if (x >= 0) return T(1) / (T(1) + std::exp(-x));
    T e = std::exp(x);
    return e / (T(1) + e);
  });
}

template <typename T>
void glorot_init(Mat<T>& m, Rng& rng) {
  double s = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = static_cast<T>(rng.uniform(-s, s));
}

template void gru_cell_raw<float>(const Mat<float>&, const Mat<float>&,
                                  const GruParams<float>&, Mat<float>&,
                                  const Mat<float>*);
template void gru_cell_raw<double>(const Mat<double>&, const Mat<double>&,
                                   const GruParams<double>&, Mat<double>&,
                                   const Mat<double>*);
template void softmax_rows_raw<float>(Mat<float>&);
template void softmax_rows_raw<double>(Mat<double>&);
template void selu_raw<float>(Mat<float>&);
template void selu_raw<double>(Mat<double>&);
template void sigmoid_raw<float>(Mat<float>&);
template void sigmoid_raw<double>(Mat<double>&);
template void glorot_init<float>(Mat<float>&, Rng&);
template void glorot_init<double>(Mat<double>&, Rng&);

}  // namespace molgen::nn
