#include <algorithm>
#include <filesystem>
#include <sstream>

#include "molgen/bench/report.hpp"
#include "molgen/error.hpp"
#include "molgen/io.hpp"

namespace molgen::bench {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

/// The emitted CSVs never quote or embed commas, so a field split suffices.
CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty())
      t.header = split_row(line);
    else
      t.rows.push_back(split_row(line));
  }
  if (t.header.empty()) throw DataError("empty csv: " + path);
  return t;
}

std::string joined(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void markdown_table(std::ostringstream& md, const CsvTable& t) {
  auto row_line = [&md](const std::vector<std::string>& cells) {
    md << "|";
    for (const std::string& c : cells) md << " " << c << " |";
    md << "\n";
  };
  row_line(t.header);
  md << "|";
  for (std::size_t i = 0; i < t.header.size(); ++i) md << " --- |";
  md << "\n";
  for (const auto& r : t.rows) row_line(r);
  md << "\n";
}

std::size_t column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw DataError("csv lacks column '" + name + "'");
}

void link_svg(std::ostringstream& md, const std::string& dir, const char* name) {
  if (file_exists(joined(dir, name)))
    md << "![" << name << "](" << name << ")\n\n";
}

void table_section(std::ostringstream& md, const std::string& dir,
                   const char* file, const char* heading) {
  std::string path = joined(dir, file);
  if (!file_exists(path)) return;
  md << "## " << heading << "\n\n";
  markdown_table(md, read_csv(path));
}

void training_log_section(std::ostringstream& md, const std::string& dir) {
  std::string path = joined(dir, "training_log.csv");
  if (!file_exists(path)) return;
  CsvTable t = read_csv(path);
  md << "## Training\n\n";
  if (t.rows.empty()) return;
  md << t.rows.size() << " epochs logged.\n\n";
  // First and last epoch rows bracket the run without dumping all of it.
  CsvTable brief;
  brief.header = t.header;
  brief.rows.push_back(t.rows.front());
  if (t.rows.size() > 1) brief.rows.push_back(t.rows.back());
  markdown_table(md, brief);
}

void trace_section(std::ostringstream& md, const std::string& dir) {
  std::string path = joined(dir, "score_vs_iteration.csv");
  if (!file_exists(path)) return;
  CsvTable t = read_csv(path);
  md << "## Latent-space search\n\n";
  if (t.rows.empty()) return;
  std::size_t score_col = column(t, "score");
  std::size_t iter_col = column(t, "iteration");
  double best = 0.0;
  std::string best_iter = t.rows.front()[iter_col];
  for (const auto& r : t.rows) {
    double s = std::stod(r[score_col]);
    if (s > best) {
      best = s;
      best_iter = r[iter_col];
    }
  }
  md << t.rows.size() << " evaluations; best score "
     << fmt_double(best) << " first reached at iteration " << best_iter
     << ".\n\n";
  link_svg(md, dir, "score_vs_iteration.svg");
}

void similarity_section(std::ostringstream& md, const std::string& dir) {
  std::string path = joined(dir, "similarity.csv");
  if (!file_exists(path)) return;
  CsvTable t = read_csv(path);
  md << "## Nearest-active similarity\n\n";
  if (t.rows.empty()) {
    md << "No decoded compounds.\n\n";
    return;
  }
  std::size_t sim_col = column(t, "nearest_active_tanimoto");
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    ranked.emplace_back(std::stod(t.rows[i][sim_col]), i);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  md << t.rows.size() << " distinct compounds; highest similarity "
     << fmt_double(ranked.front().first) << ".\n\n";
  CsvTable top;
  top.header = t.header;
  for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i)
    top.rows.push_back(t.rows[ranked[i].second]);
  markdown_table(md, top);
}

}  // namespace

std::string build_report(const std::string& dir) {
  std::ostringstream md;
  md << "# Experiment report\n\n";
  table_section(md, dir, "preprocess_stats.csv", "Preprocessing");
  training_log_section(md, dir);
  table_section(md, dir, "eval.csv", "Reconstruction");
  if (file_exists(joined(dir, "neighborhood.csv"))) {
    table_section(md, dir, "neighborhood.csv", "Neighborhood");
    link_svg(md, dir, "neighborhood.svg");
  }
  trace_section(md, dir);
  if (file_exists(joined(dir, "score_bins.csv"))) {
    table_section(md, dir, "score_bins.csv", "Active fraction by score bin");
    link_svg(md, dir, "score_bins.svg");
  }
  similarity_section(md, dir);
  return md.str();
}

void write_report(const std::string& dir) {
  write_file(joined(dir, "report.md"), build_report(dir));
}

}  // namespace molgen::bench
