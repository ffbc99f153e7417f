#include "spdc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "spdc/errors.hpp"

namespace spdc::svg {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 80.0, kRight = 30.0, kTop = 50.0, kBottom = 60.0;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// 1-2-5 tick spacing covering roughly `want` intervals.
double nice_step(double span, int want) {
  const double raw = span / want;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

struct Frame {
  double xmin, xmax, ymin, ymax;

  double px(double x) const { return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
  }
};

Frame make_frame(const std::vector<double>& xs_mm, const std::vector<double>& ys, double ypad_hi) {
  Frame f{};
  f.xmin = *std::min_element(xs_mm.begin(), xs_mm.end());
  f.xmax = *std::max_element(xs_mm.begin(), xs_mm.end());
  f.ymin = 0.0;
  f.ymax = *std::max_element(ys.begin(), ys.end()) * ypad_hi;
  if (f.xmax == f.xmin) {
    f.xmin -= 0.5;
    f.xmax += 0.5;
  }
  if (f.ymax <= f.ymin) f.ymax = f.ymin + 1.0;
  return f;
}

void open_doc(std::ostringstream& os, const Frame& f, const std::string& title,
              const std::string& ylabel) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"17\">" << title << "</text>\n";

  // axes box
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
     << "\" height=\"" << kHeight - kTop - kBottom
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  const double xstep = nice_step(f.xmax - f.xmin, 8);
  for (double t = std::ceil(f.xmin / xstep) * xstep; t <= f.xmax + 1e-12; t += xstep) {
    const double px = f.px(t);
    os << "<line x1=\"" << px << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << px << "\" y2=\""
       << kHeight - kBottom + 6 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << kHeight - kBottom + 22
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(t)
       << "</text>\n";
  }
  const double ystep = nice_step(f.ymax - f.ymin, 6);
  for (double t = std::ceil(f.ymin / ystep) * ystep; t <= f.ymax + 1e-12; t += ystep) {
    const double py = f.py(t);
    os << "<line x1=\"" << kLeft - 6 << "\" y1=\"" << py << "\" x2=\"" << kLeft << "\" y2=\"" << py
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 10 << "\" y=\"" << py + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(t)
       << "</text>\n";
  }

  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">position (mm)"
        "</text>\n";
  os << "<text x=\"22\" y=\"" << (kTop + kHeight - kBottom) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
        "transform=\"rotate(-90 22 " << (kTop + kHeight - kBottom) / 2 << ")\">" << ylabel
     << "</text>\n";
}

void save(const std::ostringstream& os, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << os.str() << "</svg>\n";
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace

void write_scan_svg(const scan::ScanProfile& profile, const std::string& path,
                    const std::string& title) {
  if (profile.positions.empty()) throw config_error("cannot plot an empty profile");

  std::vector<double> xs_mm(profile.positions.size());
  for (std::size_t i = 0; i < xs_mm.size(); ++i) xs_mm[i] = profile.positions[i] * 1e3;
  const Frame f = make_frame(xs_mm, profile.values, 1.08);

  std::ostringstream os;
  open_doc(os, f, title, "counts (arb. units)");
  os << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs_mm.size(); ++i)
    os << fmt(f.px(xs_mm[i])) << ',' << fmt(f.py(profile.values[i])) << ' ';
  os << "\"/>\n";
  save(os, path);
}

void write_counts_svg(const mc::CountsProfile& profile, const std::string& path,
                      const std::string& title) {
  if (profile.positions.empty()) throw config_error("cannot plot an empty profile");

  std::vector<double> xs_mm(profile.positions.size());
  std::vector<double> ys(profile.counts.size());
  for (std::size_t i = 0; i < xs_mm.size(); ++i) {
    xs_mm[i] = profile.positions[i] * 1e3;
    ys[i] = static_cast<double>(profile.counts[i]);
  }
  const Frame f = make_frame(xs_mm, ys, 1.15);

  std::ostringstream os;
  open_doc(os, f, title, "counts");
  for (std::size_t i = 0; i < xs_mm.size(); ++i) {
    const double px = f.px(xs_mm[i]);
    const double py = f.py(ys[i]);
    const double err = std::sqrt(ys[i]);
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(f.py(std::max(0.0, ys[i] - err)))
       << "\" x2=\"" << fmt(px) << "\" y2=\"" << fmt(f.py(ys[i] + err))
       << "\" stroke=\"#b03030\" stroke-width=\"1\"/>\n";
    os << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py)
       << "\" r=\"2.6\" fill=\"#b03030\"/>\n";
  }
  save(os, path);
}

}  // namespace spdc::svg
