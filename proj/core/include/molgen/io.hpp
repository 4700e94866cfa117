#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace molgen {

/// Reads a one-entry-per-line text file. Blank lines and lines starting with
/// '#' are skipped; trailing '\r' is stripped.
std::vector<std::string> read_lines(const std::string& path);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

bool file_exists(const std::string& path);

/// Deterministic float formatting for CSV output ("%.10g", C locale digits).
std::string fmt_double(double v);

/// Minimal CSV writer; quoting is not needed for the schemas emitted here,
/// cells are validated to be comma- and newline-free.
class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void close();
  ~CsvWriter();

private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace molgen
