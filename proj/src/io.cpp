#include "valley/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "valley/error.hpp"

namespace valley::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double x = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc{} || ptr != last) {
    throw FormatError("csv line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
  }
  return x;
}

}  // namespace

const std::vector<double>& Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw FormatError("csv: missing column '" + name + "'");
  return columns[static_cast<std::size_t>(it - header.begin())];
}

bool Table::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw FormatError("csv: empty input");
  t.header = split(line);
  t.columns.resize(t.header.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw FormatError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(t.header.size()) + " fields");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      t.columns[i].push_back(parse_number(cells[i], line_no));
    }
  }
  return t;
}

Table read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return read_csv(in);
}

std::string format_number(double x) {
  if (!std::isfinite(x)) throw DomainError("non-finite value in output");
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << (c ? "," : "") << format_number(table.columns[c][r]);
    }
    out << '\n';
  }
}

void write_curve(std::ostream& out, const QMomentCurve& curve) {
  Table t;
  t.header = {"q", "log_norm_moment"};
  t.columns = {curve.q_grid, curve.log_norm_moment};
  if (curve.has_stderr()) {
    t.header.push_back("stderr");
    t.columns.push_back(curve.stderr_log);
    t.header.push_back("n_samples");
    t.columns.emplace_back(curve.size(), static_cast<double>(curve.n_samples));
  }
  write_csv(out, t);
}

QMomentCurve curve_from_table(const Table& table) {
  QMomentCurve c;
  c.q_grid = table.column("q");
  c.log_norm_moment = table.column("log_norm_moment");
  if (table.has_column("stderr")) c.stderr_log = table.column("stderr");
  if (table.has_column("n_samples") && table.rows() > 0) {
    c.n_samples = static_cast<std::size_t>(table.column("n_samples").front());
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, est] : fit.params) {
    nlohmann::json se = std::isfinite(est.std_error) ? nlohmann::json(est.std_error) : nlohmann::json();
    params[name] = {{"estimate", est.estimate}, {"stderr", se}};
  }
  return {{"params", params},
          {"q_domain", {fit.q_domain.first, fit.q_domain.second}},
          {"residual_norm", fit.residual_norm},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"flags", fit.flags}};
}

}  // namespace valley::io
