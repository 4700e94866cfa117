#pragma once

#include "molgen/nn/tape.hpp"
#include "molgen/rng.hpp"

namespace molgen::nn {

/// GRU cell parameters. Gate column order inside W and b is
/// (update z, reset r, candidate); Uzr covers the recurrent part of z and r,
/// Uc the recurrent part of the candidate, which sees r (.) h.
template <typename T>
struct GruParams {
  Mat<T> W;    // in x 3h
  Mat<T> Uzr;  // h x 2h
  Mat<T> Uc;   // h x h
  Mat<T> b;    // 1 x 3h
};

template <typename T>
struct GruRefs {
  typename Tape<T>::Ref W, Uzr, Uc, b;
};

template <typename T>
typename Tape<T>::Ref dense(Tape<T>& t, typename Tape<T>::Ref x,
                            typename Tape<T>::Ref W, typename Tape<T>::Ref b) {
  return t.add_rowvec(t.matmul(x, W), b);
}

/// 1-D convolution over vertically stacked sequences via im2col. kernel is
/// (kernel_w * in_channels) x filters with the window position varying
/// fastest, matching the im2col column layout.
template <typename T>
typename Tape<T>::Ref conv1d(Tape<T>& t, typename Tape<T>::Ref x,
                             Eigen::Index seq_len, typename Tape<T>::Ref kernel,
                             typename Tape<T>::Ref bias, Eigen::Index kernel_w,
                             Eigen::Index stride = 1) {
  auto cols = t.im2col(x, seq_len, kernel_w, stride);
  return t.add_rowvec(t.matmul(cols, kernel), bias);
}

/// z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br),
/// cand = tanh(Wc x + Uc (r.h) + bc), h' = (1-z).h + z.cand.
/// extra_pre, when >= 0, is a batch x 3h term summed into the input
/// pre-activation; it carries side inputs such as token feedback.
template <typename T>
typename Tape<T>::Ref gru_cell(Tape<T>& t, typename Tape<T>::Ref x,
                               typename Tape<T>::Ref h, const GruRefs<T>& p,
                               Eigen::Index hidden,
                               typename Tape<T>::Ref extra_pre = -1) {
  auto pre = t.add_rowvec(t.matmul(x, p.W), p.b);
  if (extra_pre >= 0) pre = t.add(pre, extra_pre);
  auto zr = t.sigmoid(t.add(t.slice_cols(pre, 0, 2 * hidden), t.matmul(h, p.Uzr)));
  auto z = t.slice_cols(zr, 0, hidden);
  auto r = t.slice_cols(zr, hidden, hidden);
  auto cand =
      t.tanh_(t.add(t.slice_cols(pre, 2 * hidden, hidden), t.matmul(t.mul(r, h), p.Uc)));
  return t.add(h, t.mul(z, t.sub(cand, h)));
}

/// Tape-free forward pass of the same cell for fast sampling. extra_pre,
/// when non-null, is summed into the input pre-activation.
template <typename T>
void gru_cell_raw(const Mat<T>& x, const Mat<T>& h, const GruParams<T>& p,
                  Mat<T>& out, const Mat<T>* extra_pre = nullptr);

template <typename T>
void softmax_rows_raw(Mat<T>& m);

template <typename T>
void selu_raw(Mat<T>& m);

template <typename T>
void sigmoid_raw(Mat<T>& m);

/// Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
template <typename T>
void glorot_init(Mat<T>& m, Rng& rng);

extern template void gru_cell_raw<float>(const Mat<float>&, const Mat<float>&,
                                         const GruParams<float>&, Mat<float>&,
                                         const Mat<float>*);
extern template void gru_cell_raw<double>(const Mat<double>&, const Mat<double>&,
                                          const GruParams<double>&, Mat<double>&,
                                          const Mat<double>*);
extern template void softmax_rows_raw<float>(Mat<float>&);
extern template void softmax_rows_raw<double>(Mat<double>&);
extern template void selu_raw<float>(Mat<float>&);
extern template void selu_raw<double>(Mat<double>&);
extern template void sigmoid_raw<float>(Mat<float>&);
extern template void sigmoid_raw<double>(Mat<double>&);
extern template void glorot_init<float>(Mat<float>&, Rng&);
extern template void glorot_init<double>(Mat<double>&, Rng&);

}  // namespace molgen::nn
