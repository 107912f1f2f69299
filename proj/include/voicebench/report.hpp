#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "voicebench/metrics.hpp"

namespace voicebench {

std::string_view toolkit_version() noexcept;

struct SummaryRow {
  double mean = 0.0;
  double std = 0.0;  // population std
  double median = 0.0;
  std::size_t count = 0;
  std::size_t capped_count = 0;

  bool operator==(const SummaryRow&) const = default;
};

struct SummaryMetadata {
  std::string dataset;
  std::string model;
  std::string toolkit_version{voicebench::toolkit_version()};

  bool operator==(const SummaryMetadata&) const = default;
};

struct SummaryTable {
  std::map<std::string, SummaryRow> rows;
  SummaryMetadata metadata;

  bool operator==(const SummaryTable&) const = default;
};

/// Statistics per metric over the reports where that metric succeeded.
/// Independent of report order. Throws EmptyInput for no reports.
SummaryTable aggregate(std::span<const MetricReport> reports, SummaryMetadata metadata = {});

enum class TableFormat { Csv, Json, Markdown };

TableFormat parse_table_format(const std::string& text);

/// STOI rows are also written scaled by 100 as "stoi_pct".
std::string emit(const SummaryTable& table, TableFormat format);

/// Inverse of emit(table, Json).
SummaryTable parse_summary_json(const std::string& text);

/// One row per utterance, one column per metric seen, plus flags and errors.
std::string per_utterance_csv(std::span<const MetricReport> reports);

/// Compact JSON object for a single report.
std::string to_json_line(const MetricReport& report);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace voicebench
