#pragma once

#include <vector>

#include "molgen/nn/tape.hpp"

namespace molgen::nn {

/// ADAM with bias correction over a fixed set of externally owned parameter
/// matrices. Moment accumulators mirror parameter shapes.
template <typename T>
class Adam {
public:
  explicit Adam(T learning_rate, T beta1 = static_cast<T>(0.9),
                T beta2 = static_cast<T>(0.999), T epsilon = static_cast<T>(1e-8))
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void bind(std::vector<Mat<T>*> params) {
    params_ = std::move(params);
    m_.clear();
    v_.clear();
    for (Mat<T>* p : params_) {
      m_.push_back(Mat<T>::Zero(p->rows(), p->cols()));
      v_.push_back(Mat<T>::Zero(p->rows(), p->cols()));
    }
    step_ = 0;
  }

  /// grads[i] aligns with the bound params[i]; an empty gradient matrix is
  /// treated as zero.
  void step(const std::vector<Mat<T>>& grads);

  long step_count() const { return step_; }
  T learning_rate() const { return lr_; }

private:
  std::vector<Mat<T>*> params_;
  std::vector<Mat<T>> m_, v_;
  long step_ = 0;
  T lr_, beta1_, beta2_, eps_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace molgen::nn
