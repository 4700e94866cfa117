#include "molgen/nn/adam.hpp"

#include <cmath>

namespace molgen::nn {

template <typename T>
void Adam<T>::step(const std::vector<Mat<T>>& grads) {
  if (grads.size() != params_.size()) throw ShapeMismatchError("adam gradient count");
  ++step_;
  T c1 = T(1) - std::pow(beta1_, static_cast<T>(step_));
  T c2 = T(1) - std::pow(beta2_, static_cast<T>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (grads[i].size() == 0) continue;
    Mat<T>& p = *params_[i];
    const Mat<T>& g = grads[i];
    if (g.rows() != p.rows() || g.cols() != p.cols())
      throw ShapeMismatchError("adam gradient shape");
    m_[i] = beta1_ * m_[i] + (T(1) - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (T(1) - beta2_) * g.cwiseProduct(g);
    p.array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace molgen::nn
