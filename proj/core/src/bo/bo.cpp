#include "molgen/bo/bo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "molgen/chem/smiles.hpp"
#include "molgen/chem/tokenizer.hpp"
#include "molgen/fp/fingerprint.hpp"
#include "molgen/io.hpp"
#include "molgen/rng.hpp"
#include "molgen/stats.hpp"

namespace molgen::bo {

void BOConfig::default_bounds(std::size_t dims) {
  lower = Eigen::RowVectorXd::Constant(static_cast<Eigen::Index>(dims), -3.0);
  upper = Eigen::RowVectorXd::Constant(static_cast<Eigen::Index>(dims), 3.0);
}

void BOConfig::validate() const {
  if (n_init < 2) throw Error("n_init must be >= 2");
  if (lower.cols() == 0 || lower.cols() != upper.cols())
    throw Error("bounds must be set with matching dimensions");
  for (Eigen::Index i = 0; i < lower.cols(); ++i) {
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)) ||
        !(lower(i) < upper(i)))
      throw Error("bounds must be finite with lower < upper");
  }
  if (attempts == 0) throw Error("attempts must be >= 1");
}

ObjectiveResult score_latent(const Eigen::RowVectorXd& z, const ae::Model& model,
                             const chem::Vocabulary& vocab,
                             const svm::SvmModel& scorer, const BOConfig& cfg) {
  ae::LatentPoint zf = z.cast<float>();
  Rng base(mix64(cfg.seed ^ 0x9e3779b97f4a7c15ull));
  std::vector<chem::TokenSequence> samples =
      ae::decode_sample_batch(zf, model, cfg.attempts, base, cfg.threads);
  std::set<std::string> distinct;
  for (const chem::TokenSequence& s : samples) {
    std::string text = chem::detokenize(s, vocab);
    if (!text.empty()) distinct.insert(std::move(text));
  }
  ObjectiveResult out;
  for (const std::string& smi : distinct) {
    chem::MolecularGraph g;
    try {
      g = chem::parse(smi);
    } catch (const Error&) {
      continue;
    }
    bool macro = false;
    for (std::size_t r : chem::ring_sizes(g))
      if (r > cfg.max_ring) macro = true;
    if (macro) continue;
    out.compounds.push_back(smi);
    out.p_active.push_back(scorer.p_active(fp::ecfp(g, scorer.diameter, scorer.nbits)));
  }
  if (out.compounds.empty()) return out;  // score 0 when nothing valid survives
  double active_sum = 0, all_sum = 0;
  std::size_t actives = 0;
  for (double p : out.p_active) {
    all_sum += p;
    if (p > cfg.active_threshold) {
      active_sum += p;
      ++actives;
    }
  }
  out.score = actives > 0 ? active_sum / static_cast<double>(actives)
                          : all_sum / static_cast<double>(out.p_active.size());
  return out;
}

namespace {

Eigen::RowVectorXd uniform_in_box(const BOConfig& cfg, Rng& rng) {
  Eigen::RowVectorXd z(cfg.lower.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i)
    z(i) = rng.uniform(cfg.lower(i), cfg.upper(i));
  return z;
}

void clamp_to_box(const BOConfig& cfg, Eigen::RowVectorXd& z) {
  for (Eigen::Index i = 0; i < z.cols(); ++i)
    z(i) = std::clamp(z(i), cfg.lower(i), cfg.upper(i));
}

/// Bounded Nelder-Mead ascent of f; proposals are clamped into the box.
/// Returns the best vertex found.
Eigen::RowVectorXd nelder_mead(const std::function<double(const Eigen::RowVectorXd&)>& f,
                               const Eigen::RowVectorXd& start, const BOConfig& cfg,
                               std::size_t max_iters) {
  Eigen::Index d = start.cols();
  std::vector<Eigen::RowVectorXd> xs;
  std::vector<double> fs;
  xs.reserve(static_cast<std::size_t>(d) + 1);
  xs.push_back(start);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::RowVectorXd v = start;
    double span = cfg.upper(i) - cfg.lower(i);
    v(i) += 0.05 * span * (v(i) + 0.05 * span <= cfg.upper(i) ? 1.0 : -1.0);
    xs.push_back(v);
  }
  for (const auto& v : xs) fs.push_back(f(v));

  auto order = [&]() {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return fs[a] > fs[b];  // descending: best first
    });
    std::vector<Eigen::RowVectorXd> x2(xs.size());
    std::vector<double> f2(xs.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      x2[k] = xs[idx[k]];
      f2[k] = fs[idx[k]];
    }
    xs.swap(x2);
    fs.swap(f2);
  };

  order();
  for (std::size_t it = 0; it < max_iters; ++it) {
    if (fs.front() - fs.back() < 1e-12) break;
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(d);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) centroid += xs[k];
    centroid /= static_cast<double>(xs.size() - 1);

    auto eval_clamped = [&](Eigen::RowVectorXd v) {
      clamp_to_box(cfg, v);
      return std::pair<Eigen::RowVectorXd, double>(v, f(v));
    };
    auto [xr, fr] = eval_clamped(centroid + (centroid - xs.back()));
    if (fr > fs.front()) {
      auto [xe, fe] = eval_clamped(centroid + 2.0 * (centroid - xs.back()));
      xs.back() = fe > fr ? xe : xr;
      fs.back() = std::max(fe, fr);
    } else if (fr > fs[fs.size() - 2]) {
      xs.back() = xr;
      fs.back() = fr;
    } else {
      auto [xc, fc] = eval_clamped(centroid + 0.5 * (xs.back() - centroid));
      if (fc > fs.back()) {
        xs.back() = xc;
        fs.back() = fc;
      } else {
        for (std::size_t k = 1; k < xs.size(); ++k) {
          xs[k] = xs.front() + 0.5 * (xs[k] - xs.front());
          fs[k] = f(xs[k]);
        }
      }
    }
    order();
  }
  return xs.front();
}

/// Length-scale grid refit: sqrt(d) scaled by ten log-spaced factors in
/// [0.1, 10]; the best log marginal likelihood wins.
double refit_length_scale(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          GpHyper hyper) {
  double base = std::sqrt(static_cast<double>(X.cols()));
  double best_ll = -std::numeric_limits<double>::infinity();
  double best_ls = hyper.length_scale;
  for (int k = 0; k <= 8; ++k) {
    double factor = std::pow(10.0, -1.0 + 2.0 * k / 8.0);
    hyper.length_scale = base * factor;
    try {
      GpState s = gp_fit(X, y, hyper);
      double ll = gp_log_marginal(s);
      if (ll > best_ll) {
        best_ll = ll;
        best_ls = hyper.length_scale;
      }
    } catch (const SingularCovarianceError&) {
      continue;
    }
  }
  return best_ls;
}

}  // namespace

std::vector<TracePoint> bo_run_objective(const Objective& objective,
                                         const BOConfig& cfg) {
  cfg.validate();
  Eigen::Index d = cfg.lower.cols();
  Rng root(cfg.seed);
  Rng rng_init = root.fork(1);
  Rng rng_search = root.fork(2);

  std::size_t total = cfg.n_init + cfg.n_iter;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(total), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(total));
  std::vector<TracePoint> trace;
  trace.reserve(total);

  auto record = [&](const Eigen::RowVectorXd& z) {
    ObjectiveResult r = objective(z);
    Eigen::Index row = static_cast<Eigen::Index>(trace.size());
    X.row(row) = z;
    y(row) = r.score;
    TracePoint t;
    t.iteration = trace.size() + 1;
    t.z = z;
    t.score = r.score;
    t.compounds = std::move(r.compounds);
    t.p_active = std::move(r.p_active);
    trace.push_back(std::move(t));
  };

  for (std::size_t i = 0; i < cfg.n_init; ++i) record(uniform_in_box(cfg, rng_init));

  GpHyper hyper;
  hyper.length_scale = std::sqrt(static_cast<double>(d));
  hyper.noise = cfg.gp_noise;
  for (std::size_t it = 0; it < cfg.n_iter; ++it) {
    Eigen::Index n = static_cast<Eigen::Index>(trace.size());
    Eigen::MatrixXd Xn = X.topRows(n);
    Eigen::VectorXd yn = y.head(n);
    std::vector<double> ys(yn.data(), yn.data() + n);
    double var = stats::variance(ys);
    hyper.signal_var = std::max(var, 1e-8);
    if (cfg.refit_every > 0 && it % cfg.refit_every == 0)
      hyper.length_scale = refit_length_scale(Xn, yn, hyper);
    GpState state = gp_fit(Xn, yn, hyper);
    double best = yn.maxCoeff();

    auto ei = [&](const Eigen::RowVectorXd& v) {
      return expected_improvement(state, v, best);
    };
    std::vector<std::pair<double, Eigen::RowVectorXd>> cands;
    cands.reserve(cfg.candidates);
    for (std::size_t c = 0; c < cfg.candidates; ++c) {
      Eigen::RowVectorXd v = uniform_in_box(cfg, rng_search);
      cands.emplace_back(ei(v), std::move(v));
    }
    std::sort(cands.begin(), cands.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    Eigen::RowVectorXd best_z = cands.front().second;
    double best_ei = cands.front().first;
    std::size_t starts = std::min(cfg.refine_starts, cands.size());
    for (std::size_t s = 0; s < starts; ++s) {
      Eigen::RowVectorXd refined = nelder_mead(ei, cands[s].second, cfg, 120);
      double e = ei(refined);
      if (e > best_ei) {
        best_ei = e;
        best_z = refined;
      }
    }
    record(best_z);
  }
  return trace;
}

std::vector<TracePoint> bo_run(const ae::Model& model, const chem::Vocabulary& vocab,
                               const svm::SvmModel& scorer, const BOConfig& cfg) {
  if (cfg.lower.cols() != static_cast<Eigen::Index>(model.arch.latent_dim))
    throw Error("bounds dimensionality does not match the model latent size");
  // Decode seeds derive from the point's trace position so each evaluation
  // is reproducible independent of search history internals.
  std::size_t counter = 0;
  BOConfig point_cfg = cfg;
  Objective obj = [&](const Eigen::RowVectorXd& z) {
    point_cfg.seed = mix64(cfg.seed ^ mix64(0xd1b54a32d192ed03ull + counter));
    ++counter;
    return score_latent(z, model, vocab, scorer, point_cfg);
  };
  return bo_run_objective(obj, cfg);
}

namespace {

std::string join_semicolon(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ';';
    out += xs[i];
  }
  return out;
}

}  // namespace

void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace) {
  CsvWriter csv(path, {"iteration", "score", "latent", "smiles"});
  for (const TracePoint& t : trace) {
    std::string latent;
    for (Eigen::Index i = 0; i < t.z.cols(); ++i) {
      if (i > 0) latent += ';';
      latent += fmt_double(t.z(i));
    }
    csv.row({std::to_string(t.iteration), fmt_double(t.score), latent,
             join_semicolon(t.compounds)});
  }
}

}  // namespace molgen::bo
