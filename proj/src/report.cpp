#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "voicebench/error.hpp"
#include "voicebench/report.hpp"

namespace voicebench {

using ordered_json = nlohmann::ordered_json;

std::string_view toolkit_version() noexcept { return VOICEBENCH_VERSION; }

SummaryTable aggregate(std::span<const MetricReport> reports, SummaryMetadata metadata) {
  if (reports.empty()) fail(Errc::EmptyInput, "no reports to aggregate");

  std::map<std::string, std::vector<double>> values;
  std::map<std::string, std::size_t> capped;
  for (const auto& report : reports) {
    for (const auto& [metric, value] : report.scores) {
      if (!std::isfinite(value)) continue;
      values[metric].push_back(value);
      if (report.capped(metric)) ++capped[metric];
    }
  }

  SummaryTable table;
  table.metadata = std::move(metadata);
  for (auto& [metric, v] : values) {
    // Sorting first makes the sums independent of input order.
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    SummaryRow row;
    row.count = n;
    row.capped_count = capped[metric];
    double sum = 0.0;
    for (double x : v) sum += x;
    row.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - row.mean) * (x - row.mean);
    row.std = std::sqrt(ss / static_cast<double>(n));
    row.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    table.rows.emplace(metric, row);
  }
  return table;
}

TableFormat parse_table_format(const std::string& text) {
  if (text == "csv") return TableFormat::Csv;
  if (text == "json") return TableFormat::Json;
  if (text == "markdown" || text == "md") return TableFormat::Markdown;
  fail(Errc::InvalidArgument, "format must be csv, json or markdown, got '" + text + "'");
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

SummaryRow scaled(const SummaryRow& row, double k) {
  SummaryRow r = row;
  r.mean *= k;
  r.std *= k;
  r.median *= k;
  return r;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

ordered_json row_json(const SummaryRow& row) {
  ordered_json j;
  j["mean"] = row.mean;
  j["std"] = row.std;
  j["median"] = row.median;
  j["count"] = row.count;
  j["capped_count"] = row.capped_count;
  return j;
}

std::string emit_csv(const SummaryTable& table) {
  std::string out = "metric,mean,std,median,count,capped_count\r\n";
  auto line = [&](const std::string& name, const SummaryRow& row) {
    out += csv_field(name) + ',' + format_double(row.mean) + ',' + format_double(row.std) + ',' +
           format_double(row.median) + ',' + std::to_string(row.count) + ',' +
           std::to_string(row.capped_count) + "\r\n";
  };
  for (const auto& [metric, row] : table.rows) {
    line(metric, row);
    if (metric == "stoi") line("stoi_pct", scaled(row, 100.0));
  }
  return out;
}

std::string emit_json(const SummaryTable& table) {
  ordered_json j;
  j["metadata"] = {{"dataset", table.metadata.dataset},
                   {"model", table.metadata.model},
                   {"toolkit_version", table.metadata.toolkit_version}};
  ordered_json rows = ordered_json::object();
  for (const auto& [metric, row] : table.rows) rows[metric] = row_json(row);
  j["rows"] = rows;
  if (auto it = table.rows.find("stoi"); it != table.rows.end()) {
    j["stoi_pct"] = row_json(scaled(it->second, 100.0));
  }
  return j.dump(2) + "\n";
}

std::string emit_markdown(const SummaryTable& table) {
  std::ostringstream out;
  if (!table.metadata.dataset.empty() || !table.metadata.model.empty()) {
    out << "**" << (table.metadata.model.empty() ? "-" : table.metadata.model) << "** on "
        << (table.metadata.dataset.empty() ? "-" : table.metadata.dataset) << "\n\n";
  }
  auto label = [](const std::string& metric) {
    return metric == "stoi" ? std::string("stoi (x100)") : metric;
  };
  auto shown = [](const std::string& metric, const SummaryRow& row) {
    return metric == "stoi" ? scaled(row, 100.0) : row;
  };

  if (table.rows.size() <= 6) {
    out << "| statistic |";
    for (const auto& [metric, row] : table.rows) out << ' ' << label(metric) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < table.rows.size(); ++i) out << "---:|";
    out << '\n';
    const char* names[] = {"mean", "std", "median", "count", "capped"};
    for (int s = 0; s < 5; ++s) {
      out << "| " << names[s] << " |";
      for (const auto& [metric, raw] : table.rows) {
        const SummaryRow row = shown(metric, raw);
        switch (s) {
          case 0: out << ' ' << fixed2(row.mean); break;
          case 1: out << ' ' << fixed2(row.std); break;
          case 2: out << ' ' << fixed2(row.median); break;
          case 3: out << ' ' << row.count; break;
          default: out << ' ' << row.capped_count; break;
        }
        out << " |";
      }
      out << '\n';
    }
  } else {
    out << "| metric | mean | std | median | count | capped |\n";
    out << "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& [metric, raw] : table.rows) {
      const SummaryRow row = shown(metric, raw);
      out << "| " << label(metric) << " | " << fixed2(row.mean) << " | " << fixed2(row.std)
          << " | " << fixed2(row.median) << " | " << row.count << " | " << row.capped_count
          << " |\n";
    }
  }
  return out.str();
}

}  // namespace

std::string emit(const SummaryTable& table, TableFormat format) {
  switch (format) {
    case TableFormat::Csv: return emit_csv(table);
    case TableFormat::Json: return emit_json(table);
    case TableFormat::Markdown: return emit_markdown(table);
  }
  return {};
}

SummaryTable parse_summary_json(const std::string& text) {
  SummaryTable table;
  try {
    const auto j = ordered_json::parse(text);
    const auto& meta = j.at("metadata");
    table.metadata.dataset = meta.at("dataset").get<std::string>();
    table.metadata.model = meta.at("model").get<std::string>();
    table.metadata.toolkit_version = meta.at("toolkit_version").get<std::string>();
    for (const auto& [metric, r] : j.at("rows").items()) {
      SummaryRow row;
      row.mean = r.at("mean").get<double>();
      row.std = r.at("std").get<double>();
      row.median = r.at("median").get<double>();
      row.count = r.at("count").get<std::size_t>();
      row.capped_count = r.at("capped_count").get<std::size_t>();
      table.rows.emplace(metric, row);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("not a summary table: ") + e.what());
  }
  return table;
}

std::string per_utterance_csv(std::span<const MetricReport> reports) {
  std::set<std::string> metrics;
  for (const auto& r : reports) {
    for (const auto& [m, v] : r.scores) metrics.insert(m);
    for (const auto& [m, e] : r.errors) metrics.insert(m);
  }
  std::string out = "utterance_id";
  for (const auto& m : metrics) out += ',' + csv_field(m);
  out += ",flags,errors\r\n";
  for (const auto& r : reports) {
    out += csv_field(r.utterance_id);
    for (const auto& m : metrics) {
      out += ',';
      if (auto it = r.scores.find(m); it != r.scores.end()) out += format_double(it->second);
    }
    std::string flags;
    for (const auto& f : r.flags) flags += (flags.empty() ? "" : ";") + f;
    std::string errors;
    for (const auto& [m, e] : r.errors) errors += (errors.empty() ? "" : ";") + m + "=" + e;
    out += ',' + csv_field(flags) + ',' + csv_field(errors) + "\r\n";
  }
  return out;
}

std::string to_json_line(const MetricReport& report) {
  ordered_json j;
  j["utterance_id"] = report.utterance_id;
  j["scores"] = ordered_json::object();
  for (const auto& [m, v] : report.scores) j["scores"][m] = v;
  j["flags"] = report.flags;
  j["metric_flags"] = ordered_json::object();
  for (const auto& [m, f] : report.metric_flags) j["metric_flags"][m] = f;
  j["errors"] = ordered_json::object();
  for (const auto& [m, e] : report.errors) j["errors"][m] = e;
  return j.dump();
}

}  // namespace voicebench
