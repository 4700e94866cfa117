#include <iostream>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "molgen/io.hpp"
#include "molgen/stats.hpp"
#include "molgen/svm/svm.hpp"

/// Companion utility: fits the RBF-SVM activity model on a labeled CSV
/// (smiles, label 0/1) and saves it in the checkpoint container format for
/// the `molgen score` and `molgen bo` verbs.
int main(int argc, char** argv) {
  CLI::App app{"Train the SVM activity scorer"};
  std::string csv_path, out_path = "scorer.ck";
  molgen::svm::SvmConfig cfg;
  int diameter = 6;
  std::size_t nbits = 2048;
  app.add_option("input", csv_path, "Labeled CSV (smiles, label)")->required();
  app.add_option("--out", out_path, "Checkpoint destination");
  app.add_option("--C", cfg.C, "Box constraint");
  app.add_option("--gamma", cfg.gamma, "RBF width (0 selects 1/nbits)");
  app.add_option("--seed", cfg.seed, "Calibration fold seed");
  app.add_option("--diameter", diameter, "Fingerprint diameter");
  app.add_option("--nbits", nbits, "Fingerprint fold width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? molgen::kExitOk : molgen::kExitUsage;
  }

  try {
    molgen::svm::CsvIngest ingest =
        molgen::svm::load_labeled_csv(csv_path, diameter, nbits);
    if (ingest.skipped > 0)
      std::cerr << "skipped " << ingest.skipped << " unusable rows\n";
    molgen::svm::SvmModel model = molgen::svm::train_svm(ingest.data, cfg);
    model.save(out_path, cfg.seed);

    std::vector<double> decisions;
    decisions.reserve(ingest.data.fingerprints.size());
    for (const auto& f : ingest.data.fingerprints)
      decisions.push_back(model.decision(f));
    double auc = molgen::stats::roc_auc(decisions, ingest.data.labels);
    std::cout << "trained on " << ingest.data.labels.size() << " rows, "
              << model.support.size() << " support vectors, training AUC "
              << molgen::fmt_double(auc) << " -> " << out_path << "\n";
  } catch (const molgen::NumericalError& e) {
    std::cerr << e.what() << "\n";
    return molgen::kExitNumerical;
  } catch (const molgen::Error& e) {
    std::cerr << e.what() << "\n";
    return molgen::kExitData;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return molgen::kExitData;
  }
  return molgen::kExitOk;
}
