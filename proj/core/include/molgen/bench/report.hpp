#pragma once

#include <string>

namespace molgen::bench {

/// Renders a Markdown summary of the experiment artifacts found in dir.
/// Known CSVs (preprocess_stats, training_log, eval, neighborhood, trace,
/// score_vs_iteration, score_bins, similarity) become sections; large tables
/// are condensed to headline numbers; present SVG plots are linked. Absent
/// files are skipped, so the report works for any experiment subset.
std::string build_report(const std::string& dir);

/// build_report written to dir/report.md.
void write_report(const std::string& dir);

}  // namespace molgen::bench
