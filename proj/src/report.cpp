#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>

#include "json.hpp"

#include "celab/errors.hpp"
#include "celab/harness.hpp"

namespace celab {

namespace {

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << body;
  if (!out) throw io_error("write to " + path + " failed");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

// One panel per metric: measured values as a solid polyline with markers,
// bounds dashed.
std::string render_svg(const std::vector<ReportRow>& rows, const std::string& x_column) {
  std::vector<std::string> metrics;
  std::map<std::string, std::vector<const ReportRow*>> groups;
  for (const auto& r : rows) {
    if (!groups.count(r.metric)) metrics.push_back(r.metric);
    groups[r.metric].push_back(&r);
  }
  constexpr double width = 640;
  constexpr double panel = 320;
  constexpr double left = 70, right = 20, top = 40, bottom = 50;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                    num(panel * static_cast<double>(metrics.size())) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < metrics.size(); ++p) {
    auto pts = groups[metrics[p]];
    auto xval = [&](const ReportRow* r, std::size_t idx) {
      if (x_column == "ell_or_l") return static_cast<double>(r->ell_or_l);
      if (x_column == "index") return static_cast<double>(idx);
      return r->epsilon;
    };
    std::vector<std::pair<double, const ReportRow*>> xs;
    for (std::size_t i = 0; i < pts.size(); ++i) xs.emplace_back(xval(pts[i], i), pts[i]);
    std::stable_sort(xs.begin(), xs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double x0 = xs.front().first, x1 = xs.back().first;
    if (x1 == x0) x1 = x0 + 1;
    double y0 = 0, y1 = 0;
    bool first = true;
    for (const auto& [x, r] : xs)
      for (double y : {r->measured, r->bound}) {
        if (!std::isfinite(y)) continue;
        y0 = first ? y : std::min(y0, y);
        y1 = first ? y : std::max(y1, y);
        first = false;
      }
    if (y1 == y0) y1 = y0 + 1;
    const double oy = panel * static_cast<double>(p);
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
    auto sy = [&](double y) { return oy + top + (1 - (y - y0) / (y1 - y0)) * (panel - top - bottom); };
    svg += "<text x=\"" + num(left) + "\" y=\"" + num(oy + 20) + "\" font-weight=\"bold\">" + escape(metrics[p]) +
           "</text>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(sy(y0)) + "\" x2=\"" + num(width - right) + "\" y2=\"" +
           num(sy(y0)) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(sy(y0)) + "\" x2=\"" + num(left) + "\" y2=\"" + num(sy(y1)) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(left - 5) + "\" y=\"" + num(sy(y0)) + "\" text-anchor=\"end\">" + num(y0) + "</text>\n";
    svg += "<text x=\"" + num(left - 5) + "\" y=\"" + num(sy(y1) + 10) + "\" text-anchor=\"end\">" + num(y1) +
           "</text>\n";
    svg += "<text x=\"" + num(left) + "\" y=\"" + num(sy(y0) + 18) + "\">" + num(x0) + "</text>\n";
    svg += "<text x=\"" + num(width - right) + "\" y=\"" + num(sy(y0) + 18) + "\" text-anchor=\"end\">" + num(x1) +
           "</text>\n";
    svg += "<text x=\"" + num(width / 2) + "\" y=\"" + num(sy(y0) + 36) + "\" text-anchor=\"middle\">" +
           escape(x_column) + "</text>\n";
    std::string measured, bound;
    for (const auto& [x, r] : xs) {
      measured += num(sx(x)) + "," + num(sy(r->measured)) + " ";
      bound += num(sx(x)) + "," + num(sy(r->bound)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" + measured + "\"/>\n";
    svg += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\"6,4\" points=\"" + bound + "\"/>\n";
    for (const auto& [x, r] : xs)
      svg += "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(r->measured)) + "\" r=\"3\" fill=\"" +
             (r->pass ? "#1f77b4" : "#d62728") + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

void emit_report(const std::vector<ReportRow>& rows, const std::string& path, ReportFormat format,
                 const std::string& x_column) {
  if (rows.empty()) throw usage_error("nothing to report");
  if (format == ReportFormat::plot) {
    write_file(path, render_svg(rows, x_column));
    return;
  }
  write_file(path, format_csv(rows));
  const nlohmann::json meta{{"generated_utc", utc_now()},
                            {"rows", rows.size()},
                            {"columns", csv_header()},
                            {"format_version", 1}};
  write_file(path + ".meta.json", meta.dump(1) + "\n");
}

}  // namespace celab
