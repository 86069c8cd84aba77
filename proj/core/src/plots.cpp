#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lowrl/csv.hpp"
#include "lowrl/experiments.hpp"

namespace fs = std::filesystem;

namespace lowrl {

namespace {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

int column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return static_cast<int>(i);
  throw Error("plot: missing column '" + name + "'");
}

double log_safe(double v) { return std::log10(std::max(v, 1e-300)); }

// Minimal log-log line chart. Finite positive points only.
void write_svg(const std::string& path, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<Series>& series) {
  const int w = 640, h = 440;
  const int ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!(s.x[k] > 0.0) || !(s.y[k] > 0.0)) continue;
      xmin = std::min(xmin, log_safe(s.x[k]));
      xmax = std::max(xmax, log_safe(s.x[k]));
      ymin = std::min(ymin, log_safe(s.y[k]));
      ymax = std::max(ymax, log_safe(s.y[k]));
    }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax - xmin < 1e-12) { xmax += 0.5; xmin -= 0.5; }
  if (ymax - ymin < 1e-12) { ymax += 0.5; ymin -= 0.5; }

  auto px = [&](double lx) {
    return ml + (lx - xmin) / (xmax - xmin) * (w - ml - mr);
  };
  auto py = [&](double ly) {
    return h - mb - (ly - ymin) / (ymax - ymin) * (h - mt - mb);
  };

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write '" + path + "'");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">" << title
     << "</text>\n";

  // Axes box and decade ticks.
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
     << "\" height=\"" << h - mt - mb
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int d = static_cast<int>(std::ceil(xmin));
       d <= static_cast<int>(std::floor(xmax)); ++d) {
    const double x = px(d);
    os << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x
       << "\" y2=\"" << h - mb << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << h - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ymin));
       d <= static_cast<int>(std::floor(ymax)); ++d) {
    const double y = py(d);
    os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << w - mr
       << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">1e" << d << "</text>\n";
  }
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">" << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << h / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 16 " << h / 2 << ")\">"
     << y_label << "</text>\n";

  int ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci % 8];
    std::ostringstream pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!(s.x[k] > 0.0) || !(s.y[k] > 0.0)) continue;
      pts << px(log_safe(s.x[k])) << ',' << py(log_safe(s.y[k])) << ' ';
    }
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.8\" points=\"" << pts.str() << "\"/>\n";
    // legend entry
    const int ly = mt + 16 + 18 * ci;
    os << "<line x1=\"" << w - mr - 130 << "\" y1=\"" << ly << "\" x2=\""
       << w - mr - 105 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << w - mr - 100 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
       << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
}

std::vector<double> numeric_column(const CsvTable& t, int col) {
  std::vector<double> out;
  for (const auto& row : t.rows)
    out.push_back(std::stod(row[static_cast<std::size_t>(col)]));
  return out;
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& csv_dir) {
  std::vector<std::string> written;
  const fs::path dir(csv_dir);
  if (!fs::exists(dir)) return written;

  const fs::path agg = dir / "metrics_aggregate.csv";
  if (fs::exists(agg)) {
    const CsvTable t = read_csv(agg.string());
    const auto samples = numeric_column(t, column(t, "cum_samples"));
    const auto iters = numeric_column(t, column(t, "t"));
    const auto linf = numeric_column(t, column(t, "linf_mean"));
    const auto mean = numeric_column(t, column(t, "mean_mean"));
    std::vector<Series> by_samples = {{"linf error", samples, linf},
                                      {"mean error", samples, mean}};
    std::vector<Series> by_iter = {{"linf error", iters, linf},
                                   {"mean error", iters, mean}};
    const std::string f1 = (dir / "error_vs_samples.svg").string();
    write_svg(f1, "Error vs cumulative samples", "cumulative samples",
              "error", by_samples);
    written.push_back(f1);
    const std::string f2 = (dir / "error_vs_iteration.svg").string();
    write_svg(f2, "Error vs iteration", "iteration", "error", by_iter);
    written.push_back(f2);
  }

  const fs::path bench = dir / "me_bench.csv";
  if (fs::exists(bench)) {
    const CsvTable t = read_csv(bench.string());
    const int c_method = column(t, "method");
    const int c_samples = column(t, "cum_samples");
    const int c_linf = column(t, "linf_mean");
    const int c_mean = column(t, "mean_mean");
    std::map<std::string, Series> linf_series, mean_series;
    for (const auto& row : t.rows) {
      const std::string& m = row[static_cast<std::size_t>(c_method)];
      const double x = std::stod(row[static_cast<std::size_t>(c_samples)]);
      linf_series[m].label = m;
      linf_series[m].x.push_back(x);
      linf_series[m].y.push_back(
          std::stod(row[static_cast<std::size_t>(c_linf)]));
      mean_series[m].label = m;
      mean_series[m].x.push_back(x);
      mean_series[m].y.push_back(
          std::stod(row[static_cast<std::size_t>(c_mean)]));
    }
    std::vector<Series> ls, ms;
    for (auto& [k, v] : linf_series) ls.push_back(v);
    for (auto& [k, v] : mean_series) ms.push_back(v);
    const std::string f1 = (dir / "me_bench_linf.svg").string();
    write_svg(f1, "ME comparison: linf error", "cumulative samples",
              "linf error", ls);
    written.push_back(f1);
    const std::string f2 = (dir / "me_bench_mean.svg").string();
    write_svg(f2, "ME comparison: mean error", "cumulative samples",
              "mean error", ms);
    written.push_back(f2);
  }
  return written;
}

}  // namespace lowrl
