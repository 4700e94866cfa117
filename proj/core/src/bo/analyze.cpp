#include <algorithm>
#include <map>

#include "molgen/bo/bo.hpp"
#include "molgen/chem/smiles.hpp"
#include "molgen/fp/fingerprint.hpp"
#include "molgen/io.hpp"

namespace molgen::bo {

RunSummary analyze_run(const std::vector<TracePoint>& trace,
                       const std::vector<std::string>& actives_reference,
                       double active_threshold) {
  if (trace.empty()) throw Error("analyze_run requires a non-empty trace");
  RunSummary s;
  s.bins.resize(10);
  std::vector<std::size_t> active_counts(10, 0);
  for (std::size_t b = 0; b < 10; ++b) {
    s.bins[b].lo = static_cast<double>(b) / 10.0;
    s.bins[b].hi = static_cast<double>(b + 1) / 10.0;
  }
  std::map<std::string, double> comp_p;
  for (const TracePoint& t : trace) {
    std::size_t b = t.score >= 1.0
                        ? 9
                        : static_cast<std::size_t>(std::max(0.0, t.score * 10.0));
    if (b > 9) b = 9;
    s.bins[b].points += 1;
    s.bins[b].compounds += t.compounds.size();
    for (std::size_t i = 0; i < t.compounds.size(); ++i) {
      if (t.p_active[i] > active_threshold) active_counts[b] += 1;
      comp_p.emplace(t.compounds[i], t.p_active[i]);
    }
  }
  for (std::size_t b = 0; b < 10; ++b)
    s.bins[b].active_fraction =
        s.bins[b].compounds == 0
            ? 0.0
            : static_cast<double>(active_counts[b]) /
                  static_cast<double>(s.bins[b].compounds);

  std::vector<fp::Fingerprint> ref;
  for (const std::string& a : actives_reference) {
    try {
      ref.push_back(fp::ecfp(chem::parse(chem::strip_stereo(a))));
    } catch (const Error&) {
      continue;  // unparsable reference rows carry no similarity signal
    }
  }
  for (const auto& [smi, p] : comp_p) {
    (void)p;
    s.distinct_compounds.push_back(smi);
    if (ref.empty()) continue;
    fp::Fingerprint f = fp::ecfp(chem::parse(smi));
    double best = 0;
    for (const fp::Fingerprint& r : ref) best = std::max(best, fp::tanimoto(f, r));
    s.nearest_active_tanimoto.push_back(best);
  }
  return s;
}

void write_summary_csv(const std::string& path, const RunSummary& summary) {
  CsvWriter csv(path, {"bin_lo", "bin_hi", "points", "compounds", "active_fraction"});
  for (const BinSummary& b : summary.bins)
    csv.row({fmt_double(b.lo), fmt_double(b.hi), std::to_string(b.points),
             std::to_string(b.compounds), fmt_double(b.active_fraction)});
}

void write_similarity_csv(const std::string& path, const RunSummary& summary) {
  CsvWriter csv(path, {"smiles", "nearest_active_tanimoto"});
  for (std::size_t i = 0; i < summary.nearest_active_tanimoto.size(); ++i)
    csv.row({summary.distinct_compounds[i],
             fmt_double(summary.nearest_active_tanimoto[i])});
}

}  // namespace molgen::bo
