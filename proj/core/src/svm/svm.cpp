#include "molgen/svm/svm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "molgen/chem/smiles.hpp"
#include "molgen/io.hpp"
#include "molgen/nn/checkpoint.hpp"
#include "molgen/rng.hpp"

namespace molgen::svm {

namespace {

/// Hamming distance; for 0/1 vectors this equals the squared Euclidean
/// distance, so exp(-gamma * hamming) is the Gaussian kernel.
std::size_t hamming(const fp::Fingerprint& a, const fp::Fingerprint& b) {
  std::size_t d = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w)
    d += static_cast<std::size_t>(std::popcount(a.words[w] ^ b.words[w]));
  return d;
}

void check_width(const fp::Fingerprint& a, const fp::Fingerprint& b) {
  if (a.nbits != b.nbits || a.words.size() != b.words.size() ||
      a.variant != b.variant)
    throw fp::WidthMismatchError();
}

/// Kernel access with a dense precomputed matrix up to kDenseLimit points.
/// Beyond the limit rows are recomputed on demand; training stays correct
/// but slows, which desk-scale corpora never trigger.
class Kernel {
public:
  static constexpr std::size_t kDenseLimit = 4096;

  Kernel(const std::vector<const fp::Fingerprint*>& pts, double gamma)
      : pts_(pts), gamma_(gamma) {
    std::size_t n = pts.size();
    if (n <= kDenseLimit) {
      dense_.assign(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        dense_[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
          double k = std::exp(-gamma_ * static_cast<double>(hamming(*pts_[i], *pts_[j])));
          dense_[i * n + j] = k;
          dense_[j * n + i] = k;
        }
      }
    }
  }

  double at(std::size_t i, std::size_t j) const {
    if (!dense_.empty()) return dense_[i * pts_.size() + j];
    return std::exp(-gamma_ * static_cast<double>(hamming(*pts_[i], *pts_[j])));
  }

private:
  const std::vector<const fp::Fingerprint*>& pts_;
  double gamma_;
  std::vector<double> dense_;
};

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;
};

/// Sequential minimal optimization with per-point box caps. y holds -1/+1.
SmoResult smo(const std::vector<const fp::Fingerprint*>& pts,
              const std::vector<double>& y, const std::vector<double>& cap,
              double gamma, double tol, std::size_t max_steps) {
  std::size_t n = pts.size();
  Kernel K(pts, gamma);
  SmoResult r;
  r.alpha.assign(n, 0.0);
  // E[i] = f(x_i) - y_i with f = sum_j alpha_j y_j k(j,i) + b.
  std::vector<double> E(n);
  for (std::size_t i = 0; i < n; ++i) E[i] = -y[i];
  std::size_t steps = 0;

  auto take_step = [&](std::size_t i1, std::size_t i2) -> bool {
    if (i1 == i2) return false;
    double a1 = r.alpha[i1], a2 = r.alpha[i2];
    double y1 = y[i1], y2 = y[i2];
    double s = y1 * y2;
    double L, H;
    if (s < 0) {
      L = std::max(0.0, a2 - a1);
      H = std::min(cap[i2], cap[i1] + a2 - a1);
    } else {
      L = std::max(0.0, a1 + a2 - cap[i1]);
      H = std::min(cap[i2], a1 + a2);
    }
    if (H - L < 1e-12) return false;
    double k11 = K.at(i1, i1), k22 = K.at(i2, i2), k12 = K.at(i1, i2);
    double eta = k11 + k22 - 2.0 * k12;
    double a2new;
    if (eta > 1e-12) {
      a2new = a2 + y2 * (E[i1] - E[i2]) / eta;
      a2new = std::clamp(a2new, L, H);
    } else {
      // Flat direction: the dual is linear in a2 with slope y2 (E1 - E2);
      // move to whichever interval end the slope favors.
      double slope = y2 * (E[i1] - E[i2]);
      a2new = slope > 1e-12 ? H : (slope < -1e-12 ? L : a2);
    }
    if (std::abs(a2new - a2) < 1e-12 * (a2new + a2 + 1e-12)) return false;
    double a1new = a1 + s * (a2 - a2new);
    double d1 = y1 * (a1new - a1), d2 = y2 * (a2new - a2);
    double b1 = r.bias - E[i1] - d1 * k11 - d2 * k12;
    double b2 = r.bias - E[i2] - d1 * k12 - d2 * k22;
    double bnew;
    if (a1new > 1e-12 && a1new < cap[i1] - 1e-12)
      bnew = b1;
    else if (a2new > 1e-12 && a2new < cap[i2] - 1e-12)
      bnew = b2;
    else
      bnew = 0.5 * (b1 + b2);
    double db = bnew - r.bias;
    for (std::size_t k = 0; k < n; ++k)
      E[k] += d1 * K.at(i1, k) + d2 * K.at(i2, k) + db;
    r.alpha[i1] = a1new;
    r.alpha[i2] = a2new;
    r.bias = bnew;
    if (++steps > max_steps) throw NonConvergenceError(max_steps);
    return true;
  };

  auto examine = [&](std::size_t i2) -> bool {
    double r2 = E[i2] * y[i2];
    bool violates = (r2 < -tol && r.alpha[i2] < cap[i2] - 1e-12) ||
                    (r2 > tol && r.alpha[i2] > 1e-12);
    if (!violates) return false;
    // First choice: the largest |E1 - E2| among non-bound points.
    std::size_t best = n;
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (r.alpha[i] <= 1e-12 || r.alpha[i] >= cap[i] - 1e-12) continue;
      double g = std::abs(E[i] - E[i2]);
      if (g > gap) {
        gap = g;
        best = i;
      }
    }
    if (best < n && take_step(best, i2)) return true;
    // Fallback sweeps from a rotating start keep the run deterministic.
    std::size_t start = steps % n;
    for (std::size_t off = 0; off < n; ++off) {
      std::size_t i = (start + off) % n;
      if (r.alpha[i] > 1e-12 && r.alpha[i] < cap[i] - 1e-12 && take_step(i, i2))
        return true;
    }
    for (std::size_t off = 0; off < n; ++off)
      if (take_step((start + off) % n, i2)) return true;
    return false;
  };

  bool examine_all = true;
  std::size_t changed = 1;
  while (changed > 0 || examine_all) {
    changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!examine_all &&
          (r.alpha[i] <= 1e-12 || r.alpha[i] >= cap[i] - 1e-12))
        continue;
      changed += examine(i) ? 1 : 0;
    }
    if (examine_all)
      examine_all = false;
    else if (changed == 0)
      examine_all = true;
  }
  return r;
}

double decision_raw(const std::vector<const fp::Fingerprint*>& pts,
                    const std::vector<double>& y, const std::vector<double>& alpha,
                    double bias, double gamma, const fp::Fingerprint& f) {
  double sum = bias;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (alpha[i] <= 1e-12) continue;
    sum += alpha[i] * y[i] *
           std::exp(-gamma * static_cast<double>(hamming(*pts[i], f)));
  }
  return sum;
}

struct PlattFit {
  double a = 0.0;
  double b = 0.0;
};

/// Newton fit of p = 1/(1+exp(A f + B)) to (decision, label) pairs with the
/// usual smoothed targets; the iteration is the numerically stable variant
/// that never forms exp of a large positive argument.
PlattFit fit_platt(const std::vector<double>& dec, const std::vector<int>& labels) {
  std::size_t n = dec.size();
  double np = 0, nm = 0;
  for (int l : labels) (l == 1 ? np : nm) += 1.0;
  double tpos = (np + 1.0) / (np + 2.0);
  double tneg = 1.0 / (nm + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == 1 ? tpos : tneg;

  double A = 0.0;
  double B = std::log((nm + 1.0) / (np + 1.0));
  auto objective = [&](double a, double b) {
    double F = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fApB = dec[i] * a + b;
      if (fApB >= 0)
        F += t[i] * fApB + std::log1p(std::exp(-fApB));
      else
        F += (t[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
    }
    return F;
  };
  double F = objective(A, B);
  const double sigma = 1e-12;
  for (int it = 0; it < 100; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double fApB = dec[i] * A + B;
      double p, q;
      if (fApB >= 0) {
        p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
        q = 1.0 / (1.0 + std::exp(-fApB));
      } else {
        p = 1.0 / (1.0 + std::exp(fApB));
        q = std::exp(fApB) / (1.0 + std::exp(fApB));
      }
      double d2 = p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      double d1 = t[i] - p;
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    double det = h11 * h22 - h21 * h21;
    double dA = -(h22 * g1 - h21 * g2) / det;
    double dB = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    while (step >= 1e-10) {
      double Anew = A + step * dA, Bnew = B + step * dB;
      double Fnew = objective(Anew, Bnew);
      if (Fnew < F + 1e-4 * step * gd) {
        A = Anew;
        B = Bnew;
        F = Fnew;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
  return {A, B};
}

/// Stratified fold ids: a seeded shuffle within each class, then round-robin
/// assignment, so every fold's complement keeps both classes.
std::vector<std::size_t> fold_ids(const std::vector<int>& labels, std::size_t folds,
                                  std::uint64_t seed) {
  std::vector<std::size_t> ids(labels.size(), 0);
  Rng rng(mix64(seed ^ 0x5b71f1e5u));
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    rng.shuffle(members);
    for (std::size_t k = 0; k < members.size(); ++k) ids[members[k]] = k % folds;
  }
  return ids;
}

}  // namespace

double SvmModel::decision(const fp::Fingerprint& f) const {
  if (support.empty()) throw Error("decision on an untrained model");
  check_width(support.front(), f);
  double sum = bias;
  for (std::size_t i = 0; i < support.size(); ++i)
    sum += coeff[i] * std::exp(-gamma * static_cast<double>(hamming(support[i], f)));
  return sum;
}

double SvmModel::p_active(const fp::Fingerprint& f) const {
  double fApB = decision(f) * platt_a + platt_b;
  if (fApB >= 0) {
    double e = std::exp(-fApB);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(fApB));
}

SvmModel train_svm(const LabeledSet& data, const SvmConfig& cfg) {
  std::size_t n = data.fingerprints.size();
  if (n == 0 || data.labels.size() != n) throw DegenerateDataError("empty set");
  std::size_t np = 0;
  for (int l : data.labels) {
    if (l != 0 && l != 1) throw DegenerateDataError("label outside {0,1}");
    np += static_cast<std::size_t>(l);
  }
  std::size_t nm = n - np;
  if (np == 0 || nm == 0) throw DegenerateDataError("single class");
  for (std::size_t i = 1; i < n; ++i)
    check_width(data.fingerprints[0], data.fingerprints[i]);
  if (!(cfg.C > 0)) throw Error("C must be positive");

  double gamma = cfg.gamma > 0
                     ? cfg.gamma
                     : 1.0 / static_cast<double>(data.fingerprints[0].nbits);
  double cap_active = cfg.C * static_cast<double>(nm) / static_cast<double>(np);

  std::vector<const fp::Fingerprint*> pts(n);
  std::vector<double> y(n), cap(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = &data.fingerprints[i];
    y[i] = data.labels[i] == 1 ? 1.0 : -1.0;
    cap[i] = data.labels[i] == 1 ? cap_active : cfg.C;
  }

  // Calibration decision values come from fold-held-out retrainings; tiny
  // sets whose folds cannot keep both classes fall back to in-sample values.
  std::vector<double> dec(n, 0.0);
  std::size_t folds = std::min<std::size_t>(cfg.platt_folds, std::min(np, nm));
  if (folds >= 2) {
    std::vector<std::size_t> fold = fold_ids(data.labels, folds, cfg.seed);
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<const fp::Fingerprint*> tp;
      std::vector<double> ty, tc;
      for (std::size_t i = 0; i < n; ++i) {
        if (fold[i] == f) continue;
        tp.push_back(pts[i]);
        ty.push_back(y[i]);
        tc.push_back(cap[i]);
      }
      SmoResult sub = smo(tp, ty, tc, gamma, cfg.tol, cfg.max_steps);
      for (std::size_t i = 0; i < n; ++i)
        if (fold[i] == f)
          dec[i] = decision_raw(tp, ty, sub.alpha, sub.bias, gamma,
                                data.fingerprints[i]);
    }
  }

  SmoResult full = smo(pts, y, cap, gamma, cfg.tol, cfg.max_steps);
  if (folds < 2)
    for (std::size_t i = 0; i < n; ++i)
      dec[i] = decision_raw(pts, y, full.alpha, full.bias, gamma,
                            data.fingerprints[i]);
  PlattFit platt = fit_platt(dec, data.labels);

  SvmModel m;
  m.bias = full.bias;
  m.gamma = gamma;
  m.platt_a = platt.a;
  m.platt_b = platt.b;
  m.nbits = data.fingerprints[0].nbits;
  m.diameter = data.fingerprints[0].diameter;
  m.variant = data.fingerprints[0].variant;
  bool sv_pos = false, sv_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (full.alpha[i] <= 1e-12) continue;
    m.support.push_back(data.fingerprints[i]);
    m.coeff.push_back(full.alpha[i] * y[i]);
    (y[i] > 0 ? sv_pos : sv_neg) = true;
  }
  if (!sv_pos || !sv_neg)
    throw DegenerateDataError("a class ended with no support vectors");
  return m;
}

void SvmModel::save(const std::string& path, std::uint64_t seed) const {
  nlohmann::json meta;
  meta["gamma"] = gamma;
  meta["bias"] = bias;
  meta["platt_a"] = platt_a;
  meta["platt_b"] = platt_b;
  meta["nbits"] = nbits;
  meta["diameter"] = diameter;
  meta["variant"] = variant == fp::Variant::kConnectivity ? "connectivity" : "feature";
  std::vector<nn::NamedTensor> tensors(2);
  tensors[0].name = "sv.bits";
  tensors[0].data = nn::Mat<float>::Zero(static_cast<Eigen::Index>(support.size()),
                                         static_cast<Eigen::Index>(nbits));
  for (std::size_t i = 0; i < support.size(); ++i)
    for (std::size_t b = 0; b < nbits; ++b)
      if (support[i].test(b))
        tensors[0].data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) =
            1.0f;
  tensors[1].name = "sv.coeff";
  tensors[1].data = nn::Mat<float>(static_cast<Eigen::Index>(support.size()), 1);
  for (std::size_t i = 0; i < support.size(); ++i)
    tensors[1].data(static_cast<Eigen::Index>(i), 0) = static_cast<float>(coeff[i]);
  nn::save_checkpoint(path, "svm-rbf", seed, meta.dump(), tensors);
}

SvmModel SvmModel::load(const std::string& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != "svm-rbf")
    throw Error("checkpoint kind '" + ck.kind + "' is not an svm model");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ck.arch_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("svm metadata: ") + e.what());
  }
  SvmModel m;
  try {
    m.gamma = meta.at("gamma").get<double>();
    m.bias = meta.at("bias").get<double>();
    m.platt_a = meta.at("platt_a").get<double>();
    m.platt_b = meta.at("platt_b").get<double>();
    m.nbits = meta.at("nbits").get<std::size_t>();
    m.diameter = meta.at("diameter").get<int>();
    std::string v = meta.at("variant").get<std::string>();
    if (v != "connectivity" && v != "feature") throw Error("unknown variant " + v);
    m.variant = v == "connectivity" ? fp::Variant::kConnectivity : fp::Variant::kFeature;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("svm metadata: ") + e.what());
  }
  auto bits = ck.tensors.find("sv.bits");
  auto coef = ck.tensors.find("sv.coeff");
  if (bits == ck.tensors.end() || coef == ck.tensors.end())
    throw Error("svm checkpoint is missing tensors");
  Eigen::Index rows = bits->second.rows();
  if (bits->second.cols() != static_cast<Eigen::Index>(m.nbits) ||
      coef->second.rows() != rows || coef->second.cols() != 1)
    throw Error("svm checkpoint tensor shapes are inconsistent");
  m.support.resize(static_cast<std::size_t>(rows));
  m.coeff.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) {
    fp::Fingerprint& f = m.support[static_cast<std::size_t>(i)];
    f.nbits = m.nbits;
    f.diameter = m.diameter;
    f.variant = m.variant;
    f.words.assign((m.nbits + 63) / 64, 0);
    for (Eigen::Index b = 0; b < bits->second.cols(); ++b)
      if (bits->second(i, b) > 0.5f) f.set(static_cast<std::size_t>(b));
    m.coeff[static_cast<std::size_t>(i)] = coef->second(i, 0);
  }
  return m;
}

CsvIngest load_labeled_csv(const std::string& path, int diameter,
                           std::size_t nbits) {
  std::vector<std::string> lines = read_lines(path);
  CsvIngest out;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      ++out.skipped;
      continue;
    }
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string smi = trim(line.substr(0, comma));
    std::string lab = trim(line.substr(comma + 1));
    if (li == 0 && lab != "0" && lab != "1") continue;  // header row
    if (smi.empty() || (lab != "0" && lab != "1")) {
      ++out.skipped;
      continue;
    }
    try {
      chem::MolecularGraph g = chem::parse(chem::strip_stereo(smi));
      out.data.fingerprints.push_back(fp::ecfp(g, diameter, nbits));
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }
    out.data.labels.push_back(lab == "1" ? 1 : 0);
    out.smiles.push_back(smi);
  }
  return out;
}

}  // namespace molgen::svm
