#include "synthctl/panel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace synthctl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Strict: the whole cell must be a finite decimal number.
bool parse_number(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

double sample_variance(const Eigen::Ref<const Vector>& x) {
  if (x.size() < 2) return 0.0;
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

Panel::Panel(std::vector<std::string> time_labels, Vector treated, Matrix controls, Index t0,
             std::vector<std::string> unit_names, std::string treated_name)
    : time_labels_(std::move(time_labels)),
      treated_(std::move(treated)),
      controls_(std::move(controls)),
      t0_(t0),
      unit_names_(std::move(unit_names)),
      treated_name_(std::move(treated_name)) {
  const Index T = treated_.size();
  if (T < 2) throw InputError("panel needs at least two periods");
  if (controls_.rows() != T)
    throw InputError("control matrix has " + std::to_string(controls_.rows()) +
                     " rows, treated series has " + std::to_string(T));
  if (controls_.cols() < 1) throw InputError("panel needs at least one control unit");
  if (static_cast<Index>(time_labels_.size()) != T)
    throw InputError("time label count does not match period count");
  if (static_cast<Index>(unit_names_.size()) != controls_.cols())
    throw InputError("unit name count does not match control count");
  if (t0_ < 1 || t0_ >= T)
    throw InputError("t0 must satisfy 1 <= t0 < T (got t0=" + std::to_string(t0_) +
                     ", T=" + std::to_string(T) + ")");
  std::unordered_set<std::string> seen;
  for (const auto& name : unit_names_)
    if (!seen.insert(name).second) throw InputError("duplicate unit name '" + name + "'");
  if (!treated_.allFinite() || !controls_.allFinite())
    throw InputError("panel contains non-finite values");
}

Panel Panel::placebo(Index unit) const {
  if (unit < 0 || unit >= units()) throw InputError("placebo unit index out of range");
  if (units() < 2) throw InputError("placebo needs at least two control units");
  Matrix rest(periods(), units() - 1);
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(units() - 1));
  Index col = 0;
  for (Index j = 0; j < units(); ++j) {
    if (j == unit) continue;
    rest.col(col++) = controls_.col(j);
    names.push_back(unit_names_[static_cast<std::size_t>(j)]);
  }
  return Panel(time_labels_, controls_.col(unit), std::move(rest), t0_, std::move(names),
               unit_names_[static_cast<std::size_t>(unit)]);
}

Panel parse_panel_csv(const std::string& text, const std::string& treated_column, Index t0,
                      const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);

  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 3)
    throw InputError(source + ": need a time column, a treated column and at least one control");

  std::unordered_set<std::string> names;
  for (const auto& h : header)
    if (!names.insert(h).second) throw InputError(source + ": duplicate column name '" + h + "'");

  std::size_t treated_idx = 0;
  for (std::size_t c = 1; c < header.size(); ++c)
    if (header[c] == treated_column) treated_idx = c;
  if (treated_idx == 0)
    throw InputError(source + ": treated column '" + treated_column + "' not found");

  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++data_row;
    const std::string where =
        "row " + std::to_string(data_row) + " (line " + std::to_string(line_no) + ")";
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw InputError(source + ": " + where + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(header.size()));
    labels.push_back(trim(cells[0]));
    std::vector<double> values(header.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (!parse_number(cell, values[c - 1]))
        throw InputError(source + ": " + where + ", column '" + header[c] +
                         "': " + (cell.empty() ? "missing value" : "non-numeric value '" + cell + "'"));
    }
    rows.push_back(std::move(values));
  }

  const auto T = static_cast<Index>(rows.size());
  if (t0 < 1 || t0 >= T)
    throw InputError(source + ": t0 must satisfy 1 <= t0 < T (got t0=" + std::to_string(t0) +
                     ", T=" + std::to_string(T) + ")");

  const auto J = static_cast<Index>(header.size() - 2);
  Vector treated(T);
  Matrix controls(T, J);
  std::vector<std::string> unit_names;
  unit_names.reserve(static_cast<std::size_t>(J));
  for (std::size_t c = 1; c < header.size(); ++c)
    if (c != treated_idx) unit_names.push_back(header[c]);

  for (Index t = 0; t < T; ++t) {
    const auto& r = rows[static_cast<std::size_t>(t)];
    Index j = 0;
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (c == treated_idx)
        treated(t) = r[c - 1];
      else
        controls(t, j++) = r[c - 1];
    }
  }
  return Panel(std::move(labels), std::move(treated), std::move(controls), t0,
               std::move(unit_names), treated_column);
}

Panel load_panel_csv(const std::filesystem::path& path, const std::string& treated_column,
                     Index t0) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open panel file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_panel_csv(buffer.str(), treated_column, t0, path.string());
}

PanelSplit split(const Panel& panel) {
  const Index J = panel.units();
  PanelSplit out;
  out.pre.resize(panel.t0(), J + 1);
  out.pre.col(0) = panel.treated_pre();
  out.pre.rightCols(J) = panel.controls_pre();
  out.post.resize(panel.post_periods(), J + 1);
  out.post.col(0) = panel.treated_post();
  out.post.rightCols(J) = panel.controls_post();
  return out;
}

std::vector<Index> zero_variance_controls(const Panel& panel) {
  std::vector<Index> out;
  const Matrix pre = panel.controls_pre();
  for (Index j = 0; j < panel.units(); ++j)
    if (sample_variance(pre.col(j)) < kZeroVarianceThreshold) out.push_back(j);
  return out;
}

PanelDiagnostics diagnose(const Panel& panel) {
  PanelDiagnostics d;
  d.units = panel.units();
  d.periods = panel.periods();
  d.t0 = panel.t0();
  const Vector y = panel.treated_pre();
  d.treated_mean = y.mean();
  d.treated_std = std::sqrt(sample_variance(y));
  const Matrix pre = panel.controls_pre();
  d.control_means = pre.colwise().mean().transpose();
  d.control_stds.resize(panel.units());
  for (Index j = 0; j < panel.units(); ++j) d.control_stds(j) = std::sqrt(sample_variance(pre.col(j)));
  d.zero_variance = zero_variance_controls(panel);
  return d;
}

}  // namespace synthctl
