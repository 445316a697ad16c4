// io.hpp
// Plain-text file formats: dataset and model files (key=value header),
// CSV exports and an SVG line chart.
//
// Dataset file:
//   # nmq dataset
//   schema_version=1
//   kind=ad | pd
//   range_lo=<x>            range_hi=<x>
//   count=<n>               seed=<u64>
//   grid_efolds=<x>         grid_n_steps=<n>      grid_refine_tol=<x>
//   split=all | train | test
//   digest=fnv1a64:<16 hex digits over the data rows below>
//   x,y
//   <x>,<y>                 (one row per point)
//
// Doubles are written in shortest round-trip form, so write -> read -> write
// reproduces the file byte for byte.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nmq/channels.hpp"
#include "nmq/training.hpp"
#include "nmq/vqc.hpp"

namespace nmq::io {

inline constexpr int kDatasetSchema = 1;
inline constexpr int kModelSchema = 1;

// ---------------------------------------------------------------------------
// Numbers (locale independent)

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// `digits` significant digits, general notation.
inline std::string format_significant(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ValidationError("malformed number '" + std::string(s) + "'");
  return v;
}

template <class Int>
Int parse_integer(std::string_view s) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ValidationError("malformed integer '" + std::string(s) + "'");
  return v;
}

inline std::vector<double> parse_list(std::string_view s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(parse_double(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string digest_string(std::string_view bytes) {
  static constexpr char hex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out = "fnv1a64:0000000000000000";
  for (int i = 23; i >= 8; --i, h >>= 4) out[i] = hex[h & 0xf];
  return out;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace detail {

struct KeyValueText {
  std::map<std::string, std::string, std::less<>> values;
  std::string body;  // everything after the header terminator line

  const std::string& get(std::string_view key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ValidationError("missing key '" + std::string(key) + "'");
    return it->second;
  }
};

// Parses "# comment" and "key=value" lines up to `terminator` (or EOF when
// terminator is empty).
inline KeyValueText parse_key_values(std::string_view text, std::string_view magic, std::string_view terminator) {
  KeyValueText kv;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    if (first) {
      if (line != magic) throw ValidationError("not a '" + std::string(magic.substr(2)) + "' file");
      first = false;
      continue;
    }
    if (!terminator.empty() && line == terminator) {
      kv.body = std::string(text.substr(std::min(pos, text.size())));
      return kv;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError("malformed header line '" + std::string(line) + "'");
    kv.values.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  if (first) throw ValidationError("empty file");
  if (!terminator.empty()) throw ValidationError("missing '" + std::string(terminator) + "' header row");
  return kv;
}

inline void check_schema(const KeyValueText& kv, int expected, const char* what) {
  const int version = parse_integer<int>(kv.get("schema_version"));
  if (version != expected)
    throw ValidationError(std::string(what) + " schema version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(expected) + ")");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset

inline std::string dataset_rows(const LabeledDataset& ds) {
  std::string rows;
  for (std::size_t i = 0; i < ds.size(); ++i) rows += format_double(ds.xs[i]) + "," + format_double(ds.ys[i]) + "\n";
  return rows;
}

inline std::string dataset_digest(const LabeledDataset& ds) { return digest_string(dataset_rows(ds)); }

inline std::string serialize_dataset(const LabeledDataset& ds) {
  ds.validate();
  const std::string rows = dataset_rows(ds);
  std::string out = "# nmq dataset\n";
  out += "schema_version=" + std::to_string(kDatasetSchema) + "\n";
  out += "kind=" + std::string(to_string(ds.kind)) + "\n";
  out += "range_lo=" + format_double(ds.range.lo) + "\n";
  out += "range_hi=" + format_double(ds.range.hi) + "\n";
  out += "count=" + std::to_string(ds.size()) + "\n";
  out += "seed=" + std::to_string(ds.seed) + "\n";
  out += "grid_efolds=" + format_double(ds.grid.efolds) + "\n";
  out += "grid_n_steps=" + std::to_string(ds.grid.n_steps) + "\n";
  out += "grid_refine_tol=" + format_double(ds.grid.refine_tol) + "\n";
  out += "split=" + ds.split + "\n";
  out += "digest=" + digest_string(rows) + "\n";
  out += "x,y\n";
  out += rows;
  return out;
}

inline LabeledDataset parse_dataset(std::string_view text) {
  const auto kv = detail::parse_key_values(text, "# nmq dataset", "x,y");
  detail::check_schema(kv, kDatasetSchema, "dataset");
  LabeledDataset ds;
  ds.kind = parse_channel_kind(kv.get("kind"));
  ds.range = {parse_double(kv.get("range_lo")), parse_double(kv.get("range_hi"))};
  ds.seed = parse_integer<std::uint64_t>(kv.get("seed"));
  ds.grid.efolds = parse_double(kv.get("grid_efolds"));
  ds.grid.n_steps = parse_integer<int>(kv.get("grid_n_steps"));
  ds.grid.refine_tol = parse_double(kv.get("grid_refine_tol"));
  ds.split = kv.get("split");
  const auto count = parse_integer<std::size_t>(kv.get("count"));

  std::string_view body = kv.body;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto eol = body.find('\n', pos);
    if (eol == std::string_view::npos) eol = body.size();
    std::string_view line = body.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw ValidationError("malformed dataset row '" + std::string(line) + "'");
    ds.xs.push_back(parse_double(line.substr(0, comma)));
    ds.ys.push_back(parse_double(line.substr(comma + 1)));
  }
  if (ds.size() != count) throw ValidationError("dataset row count does not match its header");
  if (dataset_digest(ds) != kv.get("digest")) throw ValidationError("dataset digest mismatch (file modified or corrupted)");
  ds.validate();
  return ds;
}

inline void save_dataset(const std::string& path, const LabeledDataset& ds) { write_file(path, serialize_dataset(ds)); }
inline LabeledDataset load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

// ---------------------------------------------------------------------------
// Model

struct ModelFile {
  VqcConfig config;
  VqcParams params;
  std::string dataset_digest;
  double train_mse = std::numeric_limits<double>::quiet_NaN();
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  int restart = 0;
  int epochs = 0;
};

inline std::string serialize_model(const ModelFile& m) {
  m.params.validate(m.config);
  std::string out = "# nmq model\n";
  out += "schema_version=" + std::to_string(kModelSchema) + "\n";
  out += "kind=" + std::string(to_string(m.config.kind)) + "\n";
  out += "n_interactions=" + std::to_string(m.config.n_interactions) + "\n";
  out += "backend=" + std::string(to_string(m.config.backend)) + "\n";
  out += "phis=" + format_list(m.params.phis) + "\n";
  out += "times=" + format_list(m.params.times) + "\n";
  out += "w0=" + format_double(m.params.w0) + "\n";
  out += "w1=" + format_double(m.params.w1) + "\n";
  out += "dataset_digest=" + m.dataset_digest + "\n";
  out += "train_mse=" + format_double(m.train_mse) + "\n";
  out += "test_mse=" + format_double(m.test_mse) + "\n";
  out += "seed=" + std::to_string(m.seed) + "\n";
  out += "restart=" + std::to_string(m.restart) + "\n";
  out += "epochs=" + std::to_string(m.epochs) + "\n";
  return out;
}

inline ModelFile parse_model(std::string_view text) {
  const auto kv = detail::parse_key_values(text, "# nmq model", "");
  detail::check_schema(kv, kModelSchema, "model");
  ModelFile m;
  m.config.kind = parse_channel_kind(kv.get("kind"));
  m.config.n_interactions = parse_integer<int>(kv.get("n_interactions"));
  m.config.backend = parse_backend(kv.get("backend"));
  m.params.phis = parse_list(kv.get("phis"));
  m.params.times = parse_list(kv.get("times"));
  m.params.w0 = parse_double(kv.get("w0"));
  m.params.w1 = parse_double(kv.get("w1"));
  m.dataset_digest = kv.get("dataset_digest");
  m.train_mse = parse_double(kv.get("train_mse"));
  m.test_mse = parse_double(kv.get("test_mse"));
  m.seed = parse_integer<std::uint64_t>(kv.get("seed"));
  m.restart = parse_integer<int>(kv.get("restart"));
  m.epochs = parse_integer<int>(kv.get("epochs"));
  m.params.validate(m.config);
  return m;
}

inline void save_model(const std::string& path, const ModelFile& m) { write_file(path, serialize_model(m)); }
inline ModelFile load_model(const std::string& path) { return parse_model(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV exports

inline std::string labels_csv(const std::vector<double>& xs, const std::vector<double>& ns) {
  std::string out = "x,N\n";
  for (std::size_t i = 0; i < xs.size(); ++i) out += format_significant(xs[i]) + "," + format_significant(ns[i]) + "\n";
  return out;
}

inline std::string history_csv(const std::vector<double>& costs) {
  std::string out = "epoch,cost\n";
  for (std::size_t i = 0; i < costs.size(); ++i) out += std::to_string(i) + "," + format_double(costs[i]) + "\n";
  return out;
}

inline std::string eval_csv(const std::vector<double>& xs, const std::vector<double>& target,
                            const std::vector<double>& predicted) {
  std::string out = "x,target,predicted\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    out += format_significant(xs[i]) + "," + format_significant(target[i]) + "," + format_significant(predicted[i]) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// SVG chart: target dashed red, prediction solid blue.

inline std::string eval_svg(const std::vector<double>& xs, const std::vector<double>& target,
                            const std::vector<double>& predicted, std::string_view x_label) {
  constexpr double width = 640, height = 420, left = 70, right = 20, top = 20, bottom = 60;
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  double x_lo = xs.empty() ? 0.0 : xs[order.front()];
  double x_hi = xs.empty() ? 1.0 : xs[order.back()];
  double y_lo = 0.0, y_hi = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    y_lo = std::min({y_lo, target[i], predicted[i]});
    y_hi = std::max({y_hi, target[i], predicted[i]});
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (y - y_lo) / (y_hi - y_lo) * (height - top - bottom); };
  auto polyline = [&](const std::vector<double>& ys, std::string_view style) {
    std::string pts;
    for (std::size_t i : order) pts += format_significant(px(xs[i]), 6) + "," + format_significant(py(ys[i]), 6) + " ";
    return "<polyline fill=\"none\" " + std::string(style) + " points=\"" + pts + "\"/>\n";
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 420\" width=\"640\" height=\"420\">\n";
  svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"70\" y1=\"360\" x2=\"620\" y2=\"360\"/>\n<line x1=\"70\" y1=\"20\" x2=\"70\" y2=\"360\"/>\n</g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo + k * (x_hi - x_lo) / 4, yv = y_lo + k * (y_hi - y_lo) / 4;
    svg += "<text x=\"" + format_significant(px(xv), 6) + "\" y=\"378\" text-anchor=\"middle\">" +
           format_significant(xv, 3) + "</text>\n";
    svg += "<text x=\"64\" y=\"" + format_significant(py(yv) + 4, 6) + "\" text-anchor=\"end\">" +
           format_significant(yv, 3) + "</text>\n";
  }
  svg += "<text x=\"345\" y=\"405\" text-anchor=\"middle\">" + std::string(x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"190\" text-anchor=\"middle\" transform=\"rotate(-90 18 190)\">N</text>\n";
  svg += "<text x=\"500\" y=\"36\" fill=\"#1f5fbf\">predicted</text>\n";
  svg += "<text x=\"500\" y=\"52\" fill=\"#c0392b\">target</text>\n</g>\n";
  svg += polyline(predicted, "stroke=\"#1f5fbf\" stroke-width=\"2\"");
  svg += polyline(target, "stroke=\"#c0392b\" stroke-width=\"2\" stroke-dasharray=\"6,4\"");
  svg += "</svg>\n";
  return svg;
}

}  // namespace nmq::io
