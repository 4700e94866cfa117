#include "molgen/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace molgen {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

namespace {

template <typename T>
std::size_t multinomial_impl(Rng& rng, std::span<const T> weights) {
  double total = 0.0;
  for (T w : weights) total += static_cast<double>(w);
  if (!(total > 0.0)) throw std::invalid_argument("multinomial: weights sum to zero");
  double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += static_cast<double>(weights[i]);
    if (u < acc) return i;
  }
  return weights.size() - 1;  // guard against rounding at the tail
}

}  // namespace

std::size_t Rng::multinomial(std::span<const float> weights) {
  return multinomial_impl<float>(*this, weights);
}

std::size_t Rng::multinomial(std::span<const double> weights) {
  return multinomial_impl<double>(*this, weights);
}

void Rng::shuffle(std::vector<std::size_t>& idx) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = uniform_int(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Rng Rng::fork(std::uint64_t id) const {
  return Rng(mix64(seed_ ^ mix64(id)));
}

}  // namespace molgen
