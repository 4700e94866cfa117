#include <filesystem>
#include <set>

#include "json.hpp"
#include "molgen/bench/config.hpp"
#include "molgen/io.hpp"

namespace molgen::bench {

namespace {

using nlohmann::json;

json parse_object(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw DataError("config " + path + " is not a JSON object");
  return j;
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      throw DataError("config " + path + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_into(const json& j, const char* key, T& field, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError("config " + path + ", key '" + std::string(key) +
                    "': " + e.what());
  }
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw DataError(std::string(what) + " path is empty");
  if (!file_exists(path))
    throw DataError(std::string(what) + " file not found: " + path);
}

void require_writable_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IOError("cannot create output directory " + dir);
  std::string probe = (std::filesystem::path(dir) / ".molgen-probe").string();
  try {
    write_file(probe, "");
  } catch (const Error&) {
    throw IOError("output directory not writable: " + dir);
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace

void TrainJob::validate() const {
  if (latent_dim < 2) throw DataError("latent_dim must be at least 2");
  if (batch_size == 0) throw DataError("batch_size must be positive");
  if (epochs == 0) throw DataError("epochs must be positive");
  if (!(learning_rate > 0)) throw DataError("learning_rate must be positive");
  require_file(corpus_path, "corpus");
  if (!vocab_path.empty()) require_file(vocab_path, "vocabulary");
}

TrainJob load_train_job(const std::string& path) {
  json j = parse_object(path);
  reject_unknown(j,
                 {"variant", "prior", "teacher_forcing", "latent_dim", "batch_size",
                  "learning_rate", "epochs", "seed", "corpus_path", "vocab_path"},
                 path);
  TrainJob job;
  std::string variant;
  read_into(j, "variant", variant, path);
  if (variant.empty()) throw DataError("config " + path + ": 'variant' is required");
  job.variant = ae::variant_from_name(variant);

  // prior and teacher_forcing are redundant with the variant; when present
  // they must agree with it.
  std::string prior;
  read_into(j, "prior", prior, path);
  if (!prior.empty()) {
    if (prior != "gaussian" && prior != "uniform")
      throw DataError("config " + path + ": prior must be gaussian or uniform");
    bool uniform = job.variant == ae::Variant::kUniformAae;
    if ((prior == "uniform") != uniform)
      throw DataError("config " + path + ": prior '" + prior +
                      "' contradicts variant '" + variant + "'");
  }
  if (j.contains("teacher_forcing")) {
    bool tf = false;
    read_into(j, "teacher_forcing", tf, path);
    bool expected = job.variant != ae::Variant::kNoTeacherVae;
    if (tf != expected)
      throw DataError("config " + path +
                      ": teacher_forcing contradicts variant '" + variant + "'");
  }

  read_into(j, "latent_dim", job.latent_dim, path);
  read_into(j, "batch_size", job.batch_size, path);
  read_into(j, "learning_rate", job.learning_rate, path);
  read_into(j, "epochs", job.epochs, path);
  read_into(j, "seed", job.seed, path);
  read_into(j, "corpus_path", job.corpus_path, path);
  read_into(j, "vocab_path", job.vocab_path, path);
  job.validate();
  return job;
}

void ExperimentConfig::validate() const {
  if (experiment != "reconstruct" && experiment != "neighborhood" &&
      experiment != "bo-search")
    throw DataError("unknown experiment '" + experiment + "'");
  require_file(checkpoint, "checkpoint");
  require_file(vocab, "vocabulary");
  if (experiment == "reconstruct") require_file(corpus, "corpus");
  if (experiment == "neighborhood") {
    if (query.empty()) throw DataError("neighborhood requires a query SMILES");
    if (!(d_max > 0) || !(step > 0))
      throw DataError("d_max and step must be positive");
    if (points_per_bin == 0) throw DataError("points_per_bin must be positive");
  }
  if (experiment == "bo-search") {
    require_file(scorer, "scorer");
    if (!actives.empty()) require_file(actives, "actives");
    if (n_iter == 0 || n_init == 0)
      throw DataError("n_init and n_iter must be positive");
  }
  if (attempts == 0) throw DataError("attempts must be positive");
  if (threads == 0) throw DataError("threads must be positive");
  require_writable_dir(out_dir);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  json j = parse_object(path);
  reject_unknown(j, {"experiment", "checkpoint", "vocab", "corpus", "query",
                     "scorer", "actives", "out_dir", "seed", "threads", "d_max",
                     "step", "points_per_bin", "attempts", "n_init", "n_iter",
                     "max_ring", "active_threshold", "svg"},
                 path);
  ExperimentConfig cfg;
  read_into(j, "experiment", cfg.experiment, path);
  read_into(j, "checkpoint", cfg.checkpoint, path);
  read_into(j, "vocab", cfg.vocab, path);
  read_into(j, "corpus", cfg.corpus, path);
  read_into(j, "query", cfg.query, path);
  read_into(j, "scorer", cfg.scorer, path);
  read_into(j, "actives", cfg.actives, path);
  read_into(j, "out_dir", cfg.out_dir, path);
  read_into(j, "seed", cfg.seed, path);
  read_into(j, "threads", cfg.threads, path);
  read_into(j, "d_max", cfg.d_max, path);
  read_into(j, "step", cfg.step, path);
  read_into(j, "points_per_bin", cfg.points_per_bin, path);
  read_into(j, "attempts", cfg.attempts, path);
  read_into(j, "n_init", cfg.n_init, path);
  read_into(j, "n_iter", cfg.n_iter, path);
  read_into(j, "max_ring", cfg.max_ring, path);
  read_into(j, "active_threshold", cfg.active_threshold, path);
  read_into(j, "svg", cfg.svg, path);
  return cfg;
}

}  // namespace molgen::bench
