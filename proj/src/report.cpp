#include "voxflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace voxflow {

std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

namespace {

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "nan"; }

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Blue-white-red ramp over [0,1].
std::string ramp(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = static_cast<int>(std::lround(59 + s * (255 - 59)));
    g = static_cast<int>(std::lround(76 + s * (255 - 76)));
    b = static_cast<int>(std::lround(192 + s * (255 - 192)));
  } else {
    const double s = (t - 0.5) / 0.5;
    r = static_cast<int>(std::lround(255 - s * (255 - 180)));
    g = static_cast<int>(std::lround(255 - s * (255 - 4)));
    b = static_cast<int>(std::lround(255 - s * (255 - 38)));
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

void write_metrics_header(std::ostream& os) { os << "sample_id,lead_steps,metric,threshold_mmh,value\n"; }

void write_metrics_rows(std::ostream& os, const std::string& sample_id, const VerificationReport& report) {
  for (const auto& lead : report.leads) {
    const std::string prefix = sample_id + "," + std::to_string(lead.lead) + ",";
    os << prefix << "me,," << format_number(lead.continuous.me) << '\n';
    os << prefix << "mae,," << format_number(lead.continuous.mae) << '\n';
    os << prefix << "mse,," << format_number(lead.continuous.mse) << '\n';
    for (std::size_t k = 0; k < report.thresholds.size(); ++k) {
      const std::string thr = format_number(report.thresholds[k]);
      const ContingencyTable& t = lead.tables[k];
      const CategoricalScores& s = lead.scores[k];
      os << prefix << "hits," << thr << ',' << t.hits << '\n';
      os << prefix << "misses," << thr << ',' << t.misses << '\n';
      os << prefix << "false_alarms," << thr << ',' << t.false_alarms << '\n';
      os << prefix << "correct_negatives," << thr << ',' << t.correct_negatives << '\n';
      os << prefix << "precision," << thr << ',' << opt_number(s.precision) << '\n';
      os << prefix << "recall," << thr << ',' << opt_number(s.recall) << '\n';
      os << prefix << "ets," << thr << ',' << opt_number(s.ets) << '\n';
    }
  }
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace) {
  os << "z,pyramid_level,iteration,loss_total,loss_multiscale,loss_pi,step\n";
  for (const auto& e : trace)
    os << e.z << ',' << e.pyramid_level << ',' << e.iteration << ',' << format_number(e.total) << ','
       << format_number(e.multiscale) << ',' << format_number(e.pi) << ',' << format_number(e.step) << '\n';
}

void write_matrix_csv(std::ostream& os, const Matrix& m, const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels, const std::string& corner) {
  if (static_cast<int>(row_labels.size()) != m.ny() || static_cast<int>(col_labels.size()) != m.nx())
    throw InvalidArgument("write_matrix_csv: label count does not match the matrix");
  os << corner;
  for (const auto& c : col_labels) os << ',' << c;
  os << '\n';
  for (int i = 0; i < m.ny(); ++i) {
    os << row_labels[i];
    for (int j = 0; j < m.nx(); ++j) os << ',' << format_number(m(i, j));
    os << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const Histogram2D& h) {
  os << "corr_lo,corr_hi,coverage_lo,coverage_hi,count\n";
  for (int i = 0; i < h.counts.ny(); ++i)
    for (int j = 0; j < h.counts.nx(); ++j)
      os << format_number(h.y_edges[i]) << ',' << format_number(h.y_edges[i + 1]) << ','
         << format_number(h.x_edges[j]) << ',' << format_number(h.x_edges[j + 1]) << ',' << h.counts(i, j) << '\n';
}

void write_boxstats_csv(std::ostream& os, const std::map<int, BoxStats>& months) {
  os << "month,n,whisker_low,q1,median,q3,whisker_high,outliers\n";
  for (const auto& [m, b] : months) {
    os << m << ',' << b.n << ',' << format_number(b.whisker_low) << ',' << format_number(b.q1) << ','
       << format_number(b.median) << ',' << format_number(b.q3) << ',' << format_number(b.whisker_high) << ',';
    for (std::size_t i = 0; i < b.outliers.size(); ++i) os << (i ? ";" : "") << format_number(b.outliers[i]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------

std::string svg_heatmap(const Matrix& m, const std::string& title, double vmin, double vmax) {
  const int cell = 40, margin = 50;
  const int w = margin * 2 + cell * m.nx(), h = margin * 2 + cell * m.ny();
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"25\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
     << "</text>\n";
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  for (int i = 0; i < m.ny(); ++i) {
    for (int j = 0; j < m.nx(); ++j) {
      const int x = margin + j * cell, y = margin + i * cell;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
         << ramp((m(i, j) - vmin) / span) << "\"/>\n";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", m(i, j));
      os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
         << "\" text-anchor=\"middle\" font-size=\"10\">" << (std::isfinite(m(i, j)) ? buf : "nan") << "</text>\n";
    }
    os << "<text x=\"" << margin - 6 << "\" y=\"" << margin + i * cell + cell / 2 + 4
       << "\" text-anchor=\"end\" font-size=\"10\">" << i << "</text>\n";
  }
  for (int j = 0; j < m.nx(); ++j)
    os << "<text x=\"" << margin + j * cell + cell / 2 << "\" y=\"" << margin + m.ny() * cell + 14
       << "\" text-anchor=\"middle\" font-size=\"10\">" << j << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

namespace {

struct Frame {
  double x0, x1, y0, y1;
  int w = 640, h = 400, left = 60, right = 20, top = 40, bottom = 50;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
  double py(double y) const { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); }
};

void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xlabel,
          const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.w << "\" height=\"" << f.h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
     << "</text>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.h - f.bottom << "\" x2=\"" << f.w - f.right << "\" y2=\""
     << f.h - f.bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\"" << f.h - f.bottom
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << f.w / 2 << "\" y=\"" << f.h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << escape_xml(xlabel) << "</text>\n";
  os << "<text x=\"14\" y=\"" << f.h / 2 << "\" transform=\"rotate(-90 14 " << f.h / 2
     << ")\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(ylabel) << "</text>\n";
  for (double y : {f.y0, (f.y0 + f.y1) / 2, f.y1})
    os << "<text x=\"" << f.left - 6 << "\" y=\"" << f.py(y) + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
       << format_number(y) << "</text>\n";
  for (double x : {f.x0, (f.x0 + f.x1) / 2, f.x1})
    os << "<text x=\"" << f.px(x) << "\" y=\"" << f.h - f.bottom + 14 << "\" text-anchor=\"middle\" font-size=\"10\">"
       << format_number(x) << "</text>\n";
}

}  // namespace

std::string svg_lines(const std::vector<LineSeries>& series, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel) {
  Frame f{0, 1, 0, 1};
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        f.x0 = f.x1 = s.x[i];
        f.y0 = f.y1 = s.y[i];
        first = false;
      }
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.y[i]);
      f.y1 = std::max(f.y1, s.y[i]);
    }
  if (f.x1 <= f.x0) f.x1 = f.x0 + 1;
  if (f.y1 <= f.y0) f.y1 = f.y0 + 1;
  std::ostringstream os;
  axes(os, f, title, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % 8];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
        os << format_number(f.px(s.x[i])) << ',' << format_number(f.py(s.y[i])) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << f.w - f.right - 4 << "\" y=\"" << f.top + 14 * (k + 1)
       << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << escape_xml(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_boxplot(const std::map<int, BoxStats>& groups, const std::string& title) {
  Frame f{0.5, 12.5, 0, 1};
  bool first = true;
  for (const auto& [m, b] : groups) {
    double lo = b.whisker_low, hi = b.whisker_high;
    for (double o : b.outliers) {
      lo = std::min(lo, o);
      hi = std::max(hi, o);
    }
    if (first) {
      f.y0 = lo;
      f.y1 = hi;
      first = false;
    }
    f.y0 = std::min(f.y0, lo);
    f.y1 = std::max(f.y1, hi);
  }
  if (f.y1 <= f.y0) f.y1 = f.y0 + 1;
  std::ostringstream os;
  axes(os, f, title, "month", "value");
  const double half = 0.3 * (f.px(1) - f.px(0));
  for (const auto& [m, b] : groups) {
    const double x = f.px(m);
    os << "<line x1=\"" << format_number(x) << "\" y1=\"" << format_number(f.py(b.whisker_low)) << "\" x2=\""
       << format_number(x) << "\" y2=\"" << format_number(f.py(b.whisker_high)) << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << format_number(x - half) << "\" y=\"" << format_number(f.py(b.q3)) << "\" width=\""
       << format_number(2 * half) << "\" height=\"" << format_number(f.py(b.q1) - f.py(b.q3))
       << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << format_number(x - half) << "\" y1=\"" << format_number(f.py(b.median)) << "\" x2=\""
       << format_number(x + half) << "\" y2=\"" << format_number(f.py(b.median)) << "\" stroke=\"black\"/>\n";
    for (double o : b.outliers)
      os << "<circle cx=\"" << format_number(x) << "\" cy=\"" << format_number(f.py(o))
         << "\" r=\"2\" fill=\"none\" stroke=\"black\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace voxflow
