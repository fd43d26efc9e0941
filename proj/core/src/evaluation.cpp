#include "memtrack/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "memtrack/error.hpp"

namespace memtrack {

double EvalResult::precision_at(double pixels) const {
  if (center_errors.empty()) return 0.0;
  const auto n = std::count_if(center_errors.begin(), center_errors.end(), [&](double e) { return e <= pixels; });
  return static_cast<double>(n) / static_cast<double>(center_errors.size());
}

double EvalResult::mean_iou() const {
  if (ious.empty()) return 0.0;
  return std::accumulate(ious.begin(), ious.end(), 0.0) / static_cast<double>(ious.size());
}

EvalResult evaluate(const std::vector<BoundingBox>& results, const std::vector<BoundingBox>& truth) {
  MEMTRACK_EXPECTS(results.size() == truth.size(), "evaluate: " + std::to_string(results.size()) +
                                                       " results for " + std::to_string(truth.size()) +
                                                       " ground-truth frames");
  MEMTRACK_EXPECTS(truth.size() >= 2, "evaluate: need at least one frame after initialization");
  EvalResult r;
  for (std::size_t i = 1; i < truth.size(); ++i) {
    r.center_errors.push_back(center_distance(results[i], truth[i]));
    r.ious.push_back(iou(results[i], truth[i]));
  }
  for (int t = 0; t <= 50; ++t) {
    r.precision_thresholds.push_back(t);
    r.precision.push_back(r.precision_at(t));
  }
  const double n = static_cast<double>(r.ious.size());
  for (int k = 0; k <= 20; ++k) {
    const double th = k / 20.0;
    r.success_thresholds.push_back(th);
    r.success.push_back(static_cast<double>(std::count_if(r.ious.begin(), r.ious.end(),
                                                          [&](double v) { return v >= th; })) / n);
  }
  r.auc = std::accumulate(r.success.begin(), r.success.end(), 0.0) / static_cast<double>(r.success.size());
  return r;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("csv: no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const auto& cell = rows.at(row).at(column(name));
  double v = 0.0;
  const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || p != cell.data() + cell.size()) throw std::runtime_error("csv: not a number: '" + cell + "'");
  return v;
}

std::string format_number(double value) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, p);
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      MEMTRACK_EXPECTS(cells[i].find_first_of(",\n\"") == std::string::npos, "csv: cell needs quoting: " + cells[i]);
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) {
    MEMTRACK_EXPECTS(row.size() == table.header.size(), "csv: ragged row");
    line(row);
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size()) throw std::runtime_error("csv: ragged row: " + line);
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_csv(table);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

CsvTable frames_table(const EvalResult& r) {
  CsvTable t{{"frame", "center_error", "iou"}, {}};
  for (std::size_t i = 0; i < r.ious.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), format_number(r.center_errors[i]), format_number(r.ious[i])});
  }
  return t;
}

CsvTable curves_table(const EvalResult& r) {
  CsvTable t{{"curve", "threshold", "value"}, {}};
  for (std::size_t i = 0; i < r.precision.size(); ++i) {
    t.rows.push_back({"precision", format_number(r.precision_thresholds[i]), format_number(r.precision[i])});
  }
  for (std::size_t i = 0; i < r.success.size(); ++i) {
    t.rows.push_back({"success", format_number(r.success_thresholds[i]), format_number(r.success[i])});
  }
  t.rows.push_back({"auc", "0", format_number(r.auc)});
  return t;
}

std::vector<BoundingBox> read_boxes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<BoundingBox> boxes;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      boxes.push_back(parse_box(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return boxes;
}

void write_boxes(const std::string& path, const std::vector<BoundingBox>& boxes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& b : boxes) out << format_box(b) << '\n';
}

}  // namespace memtrack
