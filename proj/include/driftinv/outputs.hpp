#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "driftinv/experiment.hpp"

namespace driftinv {

struct OutputFormats {
  bool csv = true;
  bool json = true;
  bool svg = false;
};

/// "csv,json,svg" in any order; throws ConfigError on an unknown entry.
OutputFormats parse_formats(const std::string& list);

/// Shortest decimal string that parses back to the same double. Always '.'
/// as the decimal point; non-finite values print as nan / inf / -inf.
std::string format_number(double v);

struct CsvColumn {
  std::string name;
  std::span<const double> values;
};

/// One header row, then one row per value. Columns must have equal length.
std::string csv_text(const std::vector<CsvColumn>& columns);

std::string drift_csv(const ResultBundle& bundle);     ///< x, q_true, q_0 .. q_final
std::string solution_csv(const ResultBundle& bundle);  ///< x, g_exact, g_noisy, g_mollified
std::string trace_json(const ResultBundle& bundle);    ///< sorted keys, 2-space indent
std::string figure_svg(const ResultBundle& bundle);    ///< q_true and q_final

/// Reads final-time data from a CSV file with a header row and columns x, g
/// (further columns are ignored). x must increase from 0 to 1. Throws
/// ConfigError naming the file and line.
Measurement read_measurement_csv(const std::filesystem::path& path);

/// Writes text to path, replacing any previous file. Throws OutputError.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Creates out_dir if needed and writes the requested files; returns their
/// paths. Throws OutputError with the failing path.
std::vector<std::filesystem::path> emit_outputs(const ResultBundle& bundle,
                                                const OutputFormats& formats,
                                                const std::filesystem::path& out_dir);

}  // namespace driftinv
