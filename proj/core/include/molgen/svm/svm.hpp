#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "molgen/error.hpp"
#include "molgen/fp/fingerprint.hpp"

namespace molgen::svm {

class DegenerateDataError : public DataError {
public:
  explicit DegenerateDataError(const std::string& why)
      : DataError("degenerate training data: " + why) {}
};

class NonConvergenceError : public NumericalError {
public:
  explicit NonConvergenceError(std::size_t steps)
      : NumericalError("SMO did not converge within " + std::to_string(steps) +
                       " steps") {}
};

struct LabeledSet {
  std::vector<fp::Fingerprint> fingerprints;
  std::vector<int> labels;  // 1 active, 0 inactive; aligned with fingerprints
};

struct SvmConfig {
  double C = 1.0;
  double gamma = 0.0;  // 0 selects 1/nbits
  double tol = 1e-3;
  std::size_t max_steps = 1000000;
  std::size_t platt_folds = 3;
  std::uint64_t seed = 0;  // fold assignment only
};

/// RBF-kernel classifier over binary fingerprints with Platt-calibrated
/// probabilities. k(a,b) = exp(-gamma * hamming(a,b)); hamming distance
/// equals the squared Euclidean distance of 0/1 vectors.
struct SvmModel {
  std::vector<fp::Fingerprint> support;
  std::vector<double> coeff;  // alpha_i * y_i, y in {-1,+1}, active = +1
  double bias = 0.0;
  double gamma = 0.0;
  double platt_a = 0.0;
  double platt_b = 0.0;
  std::size_t nbits = 0;
  int diameter = 0;
  fp::Variant variant = fp::Variant::kConnectivity;

  /// Uncalibrated decision value sum_i coeff_i k(sv_i, f) + bias.
  double decision(const fp::Fingerprint& f) const;

  /// Calibrated probability 1 / (1 + exp(A*decision + B)), in [0,1].
  double p_active(const fp::Fingerprint& f) const;

  void save(const std::string& path, std::uint64_t seed) const;
  static SvmModel load(const std::string& path);
};

/// Trains by sequential minimal optimization with per-class box constraints
/// C_active = C * n_inactive / n_active, then fits the Platt sigmoid on
/// decision values of fold-held-out points. Throws DegenerateDataError when
/// a class is missing and NonConvergenceError at the step cap.
SvmModel train_svm(const LabeledSet& data, const SvmConfig& cfg = {});

struct CsvIngest {
  LabeledSet data;
  std::vector<std::string> smiles;  // kept rows, aligned with data
  std::size_t skipped = 0;          // malformed or invalid-SMILES rows
};

/// Reads rows of (smiles, label 0/1), strips stereo markers, fingerprints
/// the valid rows, and counts the rest as skipped. A leading header row
/// naming the columns is tolerated.
CsvIngest load_labeled_csv(const std::string& path, int diameter = 6,
                           std::size_t nbits = 2048);

}  // namespace molgen::svm
