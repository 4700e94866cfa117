#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "molgen/ae/train.hpp"
#include "molgen/bench/bo_experiment.hpp"
#include "molgen/bench/config.hpp"
#include "molgen/bench/eval.hpp"
#include "molgen/bench/neighborhood.hpp"
#include "molgen/bench/preprocess.hpp"
#include "molgen/bench/report.hpp"
#include "molgen/bench/svg.hpp"
#include "molgen/bo/bo.hpp"
#include "molgen/chem/smiles.hpp"
#include "molgen/io.hpp"
#include "molgen/svm/svm.hpp"

namespace {

using namespace molgen;

std::string joined(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IOError("cannot create output directory " + dir);
}

/// Global flags; per CLI contract they override config-file values only when
/// explicitly passed.
struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::size_t threads = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_dir_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void require_config() const {
    if (config.empty()) throw CLI::RequiredError("--config");
  }
};

bench::ExperimentConfig experiment_config(const Globals& g, const char* expected) {
  g.require_config();
  bench::ExperimentConfig cfg = bench::load_experiment_config(g.config);
  if (cfg.experiment != expected)
    throw DataError("config experiment '" + cfg.experiment + "' does not match verb '" +
                    std::string(expected) + "'");
  if (g.seed_opt->count()) cfg.seed = g.seed;
  if (g.out_dir_opt->count()) cfg.out_dir = g.out_dir;
  if (g.threads_opt->count()) cfg.threads = g.threads;
  cfg.validate();
  return cfg;
}

/// Loads a model/vocabulary pair and insists their token spaces agree;
/// decoding with a foreign vocabulary would silently scramble tokens.
struct LoadedModel {
  ae::Model model;
  chem::Vocabulary vocab;
};

LoadedModel load_model(const std::string& checkpoint, const std::string& vocab_path) {
  LoadedModel lm{ae::Model::load(checkpoint),
                 chem::Vocabulary::from_json(read_file(vocab_path))};
  if (lm.vocab.size() != lm.model.arch.vocab_size)
    throw DataError("vocabulary size " + std::to_string(lm.vocab.size()) +
                    " does not match checkpoint vocab_size " +
                    std::to_string(lm.model.arch.vocab_size));
  return lm;
}

fp::Fingerprint scorer_fingerprint(const svm::SvmModel& scorer,
                                   const chem::MolecularGraph& g) {
  return scorer.variant == fp::Variant::kConnectivity
             ? fp::ecfp(g, scorer.diameter, scorer.nbits)
             : fp::fcfp(g, scorer.diameter, scorer.nbits);
}

int run_vocab(const Globals& g, const std::string& corpus_path) {
  std::vector<std::string> corpus = read_lines(corpus_path);
  chem::Vocabulary vocab = chem::build_vocabulary(corpus);
  ensure_dir(g.out_dir);
  std::string out = joined(g.out_dir, "vocab.json");
  write_file(out, vocab.to_json());
  std::cout << "vocabulary of " << vocab.size() << " tokens -> " << out << "\n";
  return kExitOk;
}

int run_preprocess(const Globals& g, const std::string& in_path,
                   const std::string& out_path, const std::string& exclude,
                   double threshold) {
  bench::PreprocessStats stats = bench::preprocess(in_path, out_path, exclude, threshold);
  ensure_dir(g.out_dir);
  bench::write_preprocess_csv(joined(g.out_dir, "preprocess_stats.csv"), stats);
  for (const std::string& f : stats.failures) std::cerr << f << "\n";
  std::cout << "kept " << stats.output << " of " << stats.input
            << " (parse_failed " << stats.parse_failed << ", heavy_atoms "
            << stats.heavy_atoms << ", too_long " << stats.too_long
            << ", duplicate " << stats.duplicate << ", excluded "
            << stats.excluded << ")\n";
  return kExitOk;
}

int run_train(const Globals& g) {
  g.require_config();
  bench::TrainJob job = bench::load_train_job(g.config);
  if (g.seed_opt->count()) job.seed = g.seed;
  ensure_dir(g.out_dir);

  std::vector<std::string> corpus = read_lines(job.corpus_path);
  chem::Vocabulary vocab =
      job.vocab_path.empty()
          ? chem::build_vocabulary(corpus)
          : chem::Vocabulary::from_json(read_file(job.vocab_path));
  std::string vocab_out = joined(g.out_dir, "vocab.json");
  write_file(vocab_out, vocab.to_json());

  ae::ArchitectureDescriptor arch;
  arch.vocab_size = vocab.size();
  arch.latent_dim = job.latent_dim;
  arch.variant = job.variant;
  arch.validate();

  ae::TrainConfig tc;
  tc.batch_size = job.batch_size;
  tc.learning_rate = job.learning_rate;
  tc.epochs = job.epochs;
  tc.seed = job.seed;
  tc.log_path = joined(g.out_dir, "training_log.csv");

  std::vector<ae::EpochRecord> history;
  ae::Model model = ae::train(corpus, vocab, arch, tc, &history);
  std::string model_out = joined(g.out_dir, "model.ck");
  model.save(model_out, job.seed);

  const ae::EpochRecord& last = history.back();
  std::cout << "trained " << ae::variant_name(job.variant) << " on "
            << corpus.size() << " molecules, " << job.epochs
            << " epochs: char accuracy " << fmt_double(last.char_accuracy)
            << " -> " << model_out << "\n";
  return kExitOk;
}

int run_eval(const Globals& g) {
  bench::ExperimentConfig cfg = experiment_config(g, "reconstruct");
  LoadedModel lm = load_model(cfg.checkpoint, cfg.vocab);
  std::vector<std::string> corpus = read_lines(cfg.corpus);
  bench::EvalResult row =
      bench::eval_reconstruction(lm.model, lm.vocab, corpus, cfg.seed, cfg.threads);
  bench::write_eval_csv(joined(cfg.out_dir, "eval.csv"), {row});
  std::cout << row.variant << ": train accuracy "
            << fmt_double(row.train_mode_accuracy) << ", generation accuracy "
            << fmt_double(row.gen_mode_accuracy) << ", valid fraction "
            << fmt_double(row.valid_fraction) << " over " << row.molecules
            << " molecules\n";
  return kExitOk;
}

int run_neighborhood(const Globals& g) {
  bench::ExperimentConfig cfg = experiment_config(g, "neighborhood");
  LoadedModel lm = load_model(cfg.checkpoint, cfg.vocab);
  bench::NeighborhoodConfig nc;
  nc.d_max = cfg.d_max;
  nc.step = cfg.step;
  nc.points_per_bin = cfg.points_per_bin;
  nc.attempts = cfg.attempts;
  nc.seed = cfg.seed;
  nc.threads = cfg.threads;
  std::vector<bench::NeighborhoodBin> bins =
      bench::neighborhood_study(lm.model, lm.vocab, cfg.query, nc);
  bench::write_neighborhood_csv(joined(cfg.out_dir, "neighborhood.csv"), bins);
  if (cfg.svg) {
    bench::Series tan{"median Tanimoto", {}, {}, true};
    bench::Series valid{"valid fraction", {}, {}, true};
    for (const bench::NeighborhoodBin& b : bins) {
      tan.x.push_back(b.distance);
      tan.y.push_back(b.median_tanimoto);
      valid.x.push_back(b.distance);
      valid.y.push_back(b.valid_fraction);
    }
    bench::write_svg_plot(joined(cfg.out_dir, "neighborhood.svg"),
                          "Similarity vs latent distance", "distance",
                          "median Tanimoto / valid fraction", {tan, valid});
  }
  std::cout << bins.size() << " distance bins -> "
            << joined(cfg.out_dir, "neighborhood.csv") << "\n";
  return kExitOk;
}

int run_score(const std::string& model_path) {
  svm::SvmModel scorer = svm::SvmModel::load(model_path);
  std::cout << "smiles,p_active\n";
  std::string line;
  std::size_t skipped = 0;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    chem::MolecularGraph graph;
    try {
      graph = chem::parse(chem::strip_stereo(line));
    } catch (const Error&) {
      ++skipped;
      continue;
    }
    std::cout << line << "," << fmt_double(scorer.p_active(scorer_fingerprint(scorer, graph)))
              << "\n";
  }
  if (skipped > 0) std::cerr << "skipped " << skipped << " unparsable lines\n";
  return kExitOk;
}

int run_bo(const Globals& g) {
  bench::ExperimentConfig cfg = experiment_config(g, "bo-search");
  LoadedModel lm = load_model(cfg.checkpoint, cfg.vocab);
  svm::SvmModel scorer = svm::SvmModel::load(cfg.scorer);
  std::vector<std::string> actives;
  if (!cfg.actives.empty()) actives = read_lines(cfg.actives);

  bo::BOConfig bc;
  bc.n_init = cfg.n_init;
  bc.n_iter = cfg.n_iter;
  bc.attempts = cfg.attempts;
  bc.active_threshold = cfg.active_threshold;
  bc.max_ring = cfg.max_ring;
  bc.seed = cfg.seed;
  bc.threads = cfg.threads;
  // Uniform-prior models are searched inside their prior box; everything
  // else in the default Gaussian box.
  bc.default_bounds(lm.model.arch.latent_dim);
  if (lm.model.arch.variant == ae::Variant::kUniformAae) {
    bc.lower.setConstant(-1.0);
    bc.upper.setConstant(1.0);
  }

  bench::BoArtifacts art =
      bench::bo_experiment(lm.model, lm.vocab, scorer, actives, bc, cfg.out_dir, cfg.svg);
  double best = 0.0;
  for (const bo::TracePoint& t : art.trace) best = std::max(best, t.score);
  std::cout << art.trace.size() << " evaluations, best score " << fmt_double(best)
            << ", " << art.summary.distinct_compounds.size()
            << " distinct compounds -> " << cfg.out_dir << "\n";
  return kExitOk;
}

int run_report(const Globals& g) {
  bench::write_report(g.out_dir);
  std::cout << joined(g.out_dir, "report.md") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative autoencoders over SMILES with latent-space search"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config, "JSON config file");
  g.seed_opt = app.add_option("--seed", g.seed, "Random seed override");
  g.out_dir_opt = app.add_option("--out-dir", g.out_dir, "Output directory");
  g.threads_opt = app.add_option("--threads", g.threads, "Worker thread count")
                      ->check(CLI::PositiveNumber);

  int rc = kExitOk;

  std::string vocab_corpus;
  CLI::App* vocab_cmd = app.add_subcommand("vocab", "Build a vocabulary from a corpus");
  vocab_cmd->fallthrough();
  vocab_cmd->add_option("corpus", vocab_corpus, "SMILES corpus")->required();
  vocab_cmd->callback([&] { rc = run_vocab(g, vocab_corpus); });

  std::string pre_in, pre_out, pre_exclude;
  double pre_threshold = 0.5;
  CLI::App* pre_cmd = app.add_subcommand("preprocess", "Canonicalize and filter a corpus");
  pre_cmd->fallthrough();
  pre_cmd->add_option("input", pre_in, "Raw corpus")->required();
  pre_cmd->add_option("output", pre_out, "Destination corpus")->required();
  pre_cmd->add_option("--exclude", pre_exclude, "Drop entries similar to this SMILES");
  pre_cmd->add_option("--threshold", pre_threshold, "FCFP4 Tanimoto exclusion threshold");
  pre_cmd->callback([&] { rc = run_preprocess(g, pre_in, pre_out, pre_exclude, pre_threshold); });

  CLI::App* train_cmd = app.add_subcommand("train", "Train an autoencoder (--config)");
  train_cmd->fallthrough();
  train_cmd->callback([&] { rc = run_train(g); });

  CLI::App* eval_cmd = app.add_subcommand("eval", "Reconstruction metrics (--config)");
  eval_cmd->fallthrough();
  eval_cmd->callback([&] { rc = run_eval(g); });

  CLI::App* nb_cmd = app.add_subcommand("neighborhood", "Latent neighborhood study (--config)");
  nb_cmd->fallthrough();
  nb_cmd->callback([&] { rc = run_neighborhood(g); });

  std::string score_model;
  CLI::App* score_cmd =
      app.add_subcommand("score", "Score SMILES from stdin with an activity model");
  score_cmd->fallthrough();
  score_cmd->add_option("--model", score_model, "Activity model checkpoint")->required();
  score_cmd->callback([&] { rc = run_score(score_model); });

  CLI::App* bo_cmd = app.add_subcommand("bo", "Latent-space Bayesian optimization (--config)");
  bo_cmd->fallthrough();
  bo_cmd->callback([&] { rc = run_bo(g); });

  CLI::App* report_cmd = app.add_subcommand("report", "Summarize artifacts in --out-dir");
  report_cmd->fallthrough();
  report_cmd->callback([&] { rc = run_report(g); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitData;
  }
  return rc;
}
