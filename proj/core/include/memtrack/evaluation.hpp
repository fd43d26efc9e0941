#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "memtrack/box.hpp"

namespace memtrack {

/// One-pass evaluation of a trajectory; frame 0 (initialization) is not scored.
struct EvalResult {
  std::vector<double> center_errors;  // per scored frame, pixels
  std::vector<double> ious;
  std::vector<double> precision_thresholds;  // 0..50 px
  std::vector<double> precision;             // fraction with error <= threshold
  std::vector<double> success_thresholds;    // 0..1 step 0.05
  std::vector<double> success;               // fraction with IoU >= threshold
  double auc = 0.0;                          // mean of the success curve

  double precision_at(double pixels) const;
  double mean_iou() const;
};

EvalResult evaluate(const std::vector<BoundingBox>& results, const std::vector<BoundingBox>& truth);

/// Header row plus string cells; doubles are written in shortest round-trip form.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

std::string format_number(double value);
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

/// frame,center_error,iou (frame numbers start at 1).
CsvTable frames_table(const EvalResult& result);
/// curve,threshold,value for both curves, plus an auc row.
CsvTable curves_table(const EvalResult& result);

/// One `x,y,w,h` line per frame.
std::vector<BoundingBox> read_boxes(const std::string& path);
void write_boxes(const std::string& path, const std::vector<BoundingBox>& boxes);

}  // namespace memtrack
