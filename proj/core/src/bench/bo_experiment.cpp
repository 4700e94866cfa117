#include <algorithm>
#include <filesystem>

#include "molgen/bench/bo_experiment.hpp"
#include "molgen/bench/svg.hpp"
#include "molgen/io.hpp"

namespace molgen::bench {

namespace {

std::string joined(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_score_vs_iteration(const std::string& path,
                              const std::vector<bo::TracePoint>& trace) {
  CsvWriter csv(path, {"iteration", "score", "best_so_far"});
  double best = 0.0;
  for (const bo::TracePoint& t : trace) {
    best = std::max(best, t.score);
    csv.row({std::to_string(t.iteration), fmt_double(t.score), fmt_double(best)});
  }
}

void write_plots(const std::string& out_dir, const BoArtifacts& art) {
  Series scores{"score", {}, {}, false};
  Series best{"best so far", {}, {}, true};
  double running = 0.0;
  for (const bo::TracePoint& t : art.trace) {
    running = std::max(running, t.score);
    double it = static_cast<double>(t.iteration);
    scores.x.push_back(it);
    scores.y.push_back(t.score);
    best.x.push_back(it);
    best.y.push_back(running);
  }
  write_svg_plot(joined(out_dir, "score_vs_iteration.svg"), "BO score trace",
                 "iteration", "score", {scores, best});

  Series fractions{"active fraction", {}, {}, true};
  for (const bo::BinSummary& b : art.summary.bins) {
    if (b.compounds == 0) continue;  // empty bins carry no estimate
    fractions.x.push_back((b.lo + b.hi) / 2.0);
    fractions.y.push_back(b.active_fraction);
  }
  write_svg_plot(joined(out_dir, "score_bins.svg"), "Active fraction by score bin",
                 "score bin midpoint", "active fraction", {fractions});
}

BoArtifacts emit(std::vector<bo::TracePoint> trace,
                 const std::vector<std::string>& actives_reference,
                 double active_threshold, const std::string& out_dir, bool svg) {
  BoArtifacts art;
  art.trace = std::move(trace);
  art.summary = bo::analyze_run(art.trace, actives_reference, active_threshold);

  bo::write_trace_csv(joined(out_dir, "trace.csv"), art.trace);
  write_score_vs_iteration(joined(out_dir, "score_vs_iteration.csv"), art.trace);
  bo::write_summary_csv(joined(out_dir, "score_bins.csv"), art.summary);
  bo::write_similarity_csv(joined(out_dir, "similarity.csv"), art.summary);
  if (svg) write_plots(out_dir, art);
  return art;
}

}  // namespace

BoArtifacts bo_experiment(const bo::Objective& objective, const bo::BOConfig& cfg,
                          const std::vector<std::string>& actives_reference,
                          const std::string& out_dir, bool svg) {
  return emit(bo::bo_run_objective(objective, cfg), actives_reference,
              cfg.active_threshold, out_dir, svg);
}

BoArtifacts bo_experiment(const ae::Model& model, const chem::Vocabulary& vocab,
                          const svm::SvmModel& scorer,
                          const std::vector<std::string>& actives_reference,
                          const bo::BOConfig& cfg, const std::string& out_dir,
                          bool svg) {
  return emit(bo::bo_run(model, vocab, scorer, cfg), actives_reference,
              cfg.active_threshold, out_dir, svg);
}

}  // namespace molgen::bench
