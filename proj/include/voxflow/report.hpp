#pragma once

// CSV and minimal SVG emission. Numbers are printed with a fixed format so
// identical inputs give byte-identical files.

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "voxflow/analysis.hpp"
#include "voxflow/flow.hpp"
#include "voxflow/verify.hpp"

namespace voxflow {

/// "%.9g", or "nan" for non-finite values.
std::string format_number(double v);

/// Long-format metrics table:
/// sample_id,lead_steps,metric,threshold_mmh,value
void write_metrics_header(std::ostream& os);
void write_metrics_rows(std::ostream& os, const std::string& sample_id, const VerificationReport& report);

/// z,pyramid_level,iteration,loss_total,loss_multiscale,loss_pi,step
void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace);

/// Matrix with a header row of column labels and a leading label column.
void write_matrix_csv(std::ostream& os, const Matrix& m, const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels, const std::string& corner = "");

void write_histogram_csv(std::ostream& os, const Histogram2D& h);
void write_boxstats_csv(std::ostream& os, const std::map<int, BoxStats>& months);

struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_heatmap(const Matrix& m, const std::string& title, double vmin, double vmax);
std::string svg_lines(const std::vector<LineSeries>& series, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel);
std::string svg_boxplot(const std::map<int, BoxStats>& groups, const std::string& title);

}  // namespace voxflow
