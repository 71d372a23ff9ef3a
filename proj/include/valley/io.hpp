#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "valley/types.hpp"

namespace valley::io {

/// A CSV table with a header row; every cell numeric.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// Column by header name; throws FormatError when absent.
  const std::vector<double>& column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);

/// Shortest round-trip formatting; throws DomainError on NaN or infinity.
std::string format_number(double x);

void write_csv(std::ostream& out, const Table& table);

/// Curve CSV: q, log_norm_moment, stderr, n_samples (stderr and n_samples
/// are optional on input).
void write_curve(std::ostream& out, const QMomentCurve& curve);
QMomentCurve curve_from_table(const Table& table);

nlohmann::json to_json(const FitResult& fit);

}  // namespace valley::io
