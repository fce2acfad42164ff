#include "driftinv/outputs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace driftinv {

namespace fs = std::filesystem;
using nlohmann::json;

OutputFormats parse_formats(const std::string& list) {
  OutputFormats out{false, false, false};
  std::stringstream ss(list);
  std::string item;
  bool any = false;
  while (std::getline(ss, item, ',')) {
    if (item == "csv") {
      out.csv = true;
    } else if (item == "json") {
      out.json = true;
    } else if (item == "svg") {
      out.svg = true;
    } else {
      throw ConfigError("formats: unknown format '" + item + "' (expected csv, json, svg)");
    }
    any = true;
  }
  if (!any) throw ConfigError("formats: empty list");
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string fixed2(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json array_of(const std::vector<double>& values) {
  json arr = json::array();
  for (double v : values) arr.push_back(number_or_null(v));
  return arr;
}

json metrics_json(const std::optional<ErrorMetrics>& m) {
  if (!m) return nullptr;
  return json{{"rel_l2", number_or_null(m->rel_l2)},
              {"rel_linf", number_or_null(m->rel_linf)},
              {"absolute", m->absolute}};
}

}  // namespace

std::string csv_text(const std::vector<CsvColumn>& columns) {
  if (columns.empty()) throw ConfigError("csv: no columns");
  const std::size_t rows = columns.front().values.size();
  for (const auto& c : columns) {
    if (c.values.size() != rows) throw ConfigError("csv: column '" + c.name + "' has wrong length");
  }
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out += ',';
    out += columns[j].name;
  }
  out += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out += ',';
      out += format_number(columns[j].values[i]);
    }
    out += '\n';
  }
  return out;
}

std::string drift_csv(const ResultBundle& bundle) {
  const std::vector<double> x = bundle.grids.space.nodes();
  std::vector<CsvColumn> cols{{"x", x}, {"q_true", bundle.q_true.values()}};
  const auto& iterates = bundle.trace.iterates;
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    cols.push_back({"q_" + std::to_string(k), iterates[k].values()});
  }
  return csv_text(cols);
}

std::string solution_csv(const ResultBundle& bundle) {
  const std::vector<double> x = bundle.grids.space.nodes();
  return csv_text({{"x", x},
                   {"g_exact", bundle.g_exact.values()},
                   {"g_noisy", bundle.g_noisy.values()},
                   {"g_mollified", bundle.g_used.values()}});
}

std::string trace_json(const ResultBundle& bundle) {
  const Provenance& p = bundle.provenance;
  json prov{{"preset", p.preset},
            {"drift", p.drift},
            {"seed", p.seed},
            {"noise_level", p.noise_level},
            {"noise_scaling", p.noise_scaling},
            {"m", p.m},
            {"n_steps", p.n_steps},
            {"horizon", p.horizon},
            {"refinement", p.refinement},
            {"data_points", p.data_points},
            {"inverse_crime", p.inverse_crime},
            {"max_iter", p.max_iter},
            {"tol", p.tol},
            {"version", p.version}};

  const IterationTrace& t = bundle.trace;
  json trace{{"iterations", t.iterates.empty() ? 0 : t.iterates.size() - 1},
             {"step_norms", array_of(t.step_norms)},
             {"residuals", array_of(t.residuals)},
             {"mono_violations", array_of(t.mono_violations)},
             {"c1_seminorms", array_of(t.c1_seminorms)},
             {"floor_hits", t.floor_hits},
             {"converged", t.converged}};

  const MollificationInfo& mi = bundle.mollification;
  json moll{{"applied", mi.applied},
            {"lambda", number_or_null(mi.lambda)},
            {"mu", number_or_null(mi.mu)},
            {"residual", number_or_null(mi.residual)},
            {"target", number_or_null(mi.target)},
            {"qualified", mi.qualified},
            {"gradient_residual", number_or_null(mi.gradient_residual)},
            {"data_points", p.data_points}};

  const AssumptionReport& a = bundle.assumptions;
  json clauses = json::array();
  for (const auto& c : a.clauses) {
    clauses.push_back({{"clause", std::string(1, c.clause)},
                       {"verdict", c.verdict == Verdict::Pass ? "pass" : "warn"},
                       {"detail", c.detail}});
  }
  json assumptions{{"c1_bound", number_or_null(a.c1_bound)},
                   {"c_v", number_or_null(a.c_v)},
                   {"lower_bound_m",
                    a.lower_bound_m ? number_or_null(*a.lower_bound_m) : json(nullptr)},
                   {"all_pass", a.all_pass()},
                   {"clauses", clauses}};

  json root{{"provenance", prov},
            {"trace", trace},
            {"mollification", moll},
            {"assumptions", assumptions},
            {"metrics", metrics_json(bundle.metrics)},
            {"metrics_away_from_kinks", metrics_json(bundle.metrics_away_from_kinks)},
            {"status", to_string(bundle.status)},
            {"message", bundle.message},
            {"exit_code", bundle.exit_code}};
  return root.dump(2) + "\n";
}

std::string figure_svg(const ResultBundle& bundle) {
  constexpr double width = 640, height = 400;
  constexpr double left = 60, right = 20, top = 20, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;

  const std::vector<double> x = bundle.grids.space.nodes();
  std::vector<std::pair<std::string, std::span<const double>>> series{
      {"q_true", bundle.q_true.values()}};
  if (!bundle.trace.iterates.empty()) {
    series.push_back({"q_final", bundle.trace.iterates.back().values()});
  }

  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& [name, ys] : series) {
    for (double y : ys) {
      if (!std::isfinite(y)) continue;
      lo = first ? y : std::min(lo, y);
      hi = first ? y : std::max(hi, y);
      first = false;
    }
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto px = [&](double v) { return left + v * pw; };
  auto py = [&](double v) { return top + (hi - std::clamp(v, lo, hi)) / (hi - lo) * ph; };

  static const char* colours[] = {"#1f77b4", "#d62728"};
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
       "viewBox=\"0 0 640 400\">\n";
  s += "<title>" + bundle.provenance.preset + ": drift</title>\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(top + ph) + "\" x2=\"" +
       fixed2(left + pw) + "\" y2=\"" + fixed2(top + ph) + "\"/>\n";
  s += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(top) + "\" x2=\"" + fixed2(left) +
       "\" y2=\"" + fixed2(top + ph) + "\"/>\n";
  s += "</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = 0.25 * k;
    s += "<text x=\"" + fixed2(px(xv)) + "\" y=\"" + fixed2(top + ph + 16) +
         "\" text-anchor=\"middle\">" + fixed2(xv) + "</text>\n";
    const double yv = lo + (hi - lo) * k / 4.0;
    s += "<text x=\"" + fixed2(left - 6) + "\" y=\"" + fixed2(py(yv) + 4) +
         "\" text-anchor=\"end\">" + format_number(std::round(yv * 1000) / 1000) + "</text>\n";
  }
  s += "<text x=\"" + fixed2(left + pw / 2) + "\" y=\"" + fixed2(height - 10) +
       "\" text-anchor=\"middle\">x</text>\n";
  s += "</g>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colours[k]) +
         "\" stroke-width=\"1.5\" data-series=\"" + series[k].first + "\" points=\"";
    const auto ys = series[k].second;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (i) s += ' ';
      s += fixed2(px(x[i])) + "," + fixed2(py(ys[i]));
    }
    s += "\"/>\n";
  }

  s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double ly = top + 12 + 16.0 * static_cast<double>(k);
    s += "<line x1=\"" + fixed2(left + pw - 110) + "\" y1=\"" + fixed2(ly) + "\" x2=\"" +
         fixed2(left + pw - 85) + "\" y2=\"" + fixed2(ly) + "\" stroke=\"" + colours[k] +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed2(left + pw - 80) + "\" y=\"" + fixed2(ly + 4) + "\">" +
         series[k].first + "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

Measurement read_measurement_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("data: cannot open '" + path.string() + "'");
  const std::string where = "data: " + path.string() + ":";
  Measurement data;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 || line.empty()) continue;
    double vals[2];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int c = 0; c < 2; ++c) {
      while (p < end && *p == ' ') ++p;
      const auto res = std::from_chars(p, end, vals[c]);
      if (res.ec != std::errc{} || !std::isfinite(vals[c])) {
        throw ConfigError(where + std::to_string(lineno) + ": expected two numbers x,g");
      }
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (c == 0) {
        if (p == end || *p != ',') {
          throw ConfigError(where + std::to_string(lineno) + ": expected ',' after x");
        }
        ++p;
      }
    }
    if (!data.x.empty() && !(vals[0] > data.x.back())) {
      throw ConfigError(where + std::to_string(lineno) + ": x must be strictly increasing");
    }
    data.x.push_back(vals[0]);
    data.noisy.push_back(vals[1]);
  }
  if (data.x.size() < 3) throw ConfigError(where + " need at least 3 data rows");
  if (std::abs(data.x.front()) > 1e-12 || std::abs(data.x.back() - 1.0) > 1e-12) {
    throw ConfigError(where + " x must run from 0 to 1");
  }
  return data;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw OutputError("write to '" + path.string() + "' failed");
}

std::vector<fs::path> emit_outputs(const ResultBundle& bundle, const OutputFormats& formats,
                                   const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw OutputError("cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<fs::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    const fs::path path = out_dir / name;
    write_text(path, text);
    written.push_back(path);
  };
  if (formats.csv) {
    put("drift.csv", drift_csv(bundle));
    put("solution.csv", solution_csv(bundle));
  }
  if (formats.json) put("trace.json", trace_json(bundle));
  if (formats.svg) put("figure-" + bundle.provenance.preset + ".svg", figure_svg(bundle));
  return written;
}

}  // namespace driftinv
