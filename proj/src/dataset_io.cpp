#include "gci/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gci/euclidean_space.hpp"
#include "gci/frobenius_space.hpp"
#include "gci/sphere_space.hpp"
#include "gci/wasserstein_space.hpp"

namespace gci {
namespace {

constexpr const char* kMetaPrefix = "#space=";

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& field, Index row) {
  const std::string f = trim(field);
  double v = 0.0;
  const char* begin = f.data();
  const char* end = begin + f.size();
  if (!f.empty() && f.front() == '+') ++begin;  // from_chars rejects a leading '+'
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end || f.empty()) {
    throw Error(Errc::parse_error,
                "row " + std::to_string(row) + ": cannot parse number '" + field + "'");
  }
  return v;
}

long parse_param_int(const DatasetHeader& h, const std::string& key) {
  auto it = h.params.find(key);
  if (it == h.params.end()) {
    throw Error(Errc::parse_error, "space header misses parameter '" + key + "'");
  }
  const std::string f = trim(it->second);
  long v = 0;
  auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || v <= 0) {
    throw Error(Errc::parse_error, "space header parameter '" + key + "' is not a positive integer");
  }
  return v;
}

double parse_param_double(const DatasetHeader& h, const std::string& key, double fallback) {
  auto it = h.params.find(key);
  if (it == h.params.end()) return fallback;
  const std::string f = trim(it->second);
  double v = 0.0;
  auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
    throw Error(Errc::parse_error, "space header parameter '" + key + "' is not a number");
  }
  return v;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Decoded width of the outcome block in a CSV row.
Index outcome_columns(const MetricSpace& space) {
  if (const auto* fs = dynamic_cast<const FrobeniusSpace*>(&space)) {
    return fs->matrix_dim() * (fs->matrix_dim() + 1) / 2;
  }
  return space.ambient_dim();
}

Vec decode_outcome(const MetricSpace& space, const Vec& raw, Index row) {
  if (const auto* fs = dynamic_cast<const FrobeniusSpace*>(&space)) {
    Mat a = unpack_upper(raw, fs->matrix_dim());
    Vec y = Eigen::Map<const Vec>(a.data(), a.size());
    if (space.contains(y)) return y;
    Vec proj;
    try {
      proj = space.project(y);
    } catch (const Error&) {
      throw Error(Errc::validation_error,
                  "row " + std::to_string(row) + ": matrix outcome cannot be projected");
    }
    if (space.distance(y, proj) > 1e-6) {
      throw Error(Errc::validation_error,
                  "row " + std::to_string(row) + ": matrix outcome too far from the feasible set");
    }
    return proj;
  }
  if (dynamic_cast<const SphereSpace*>(&space) != nullptr) {
    // Simplex form on disk; square-root map to the sphere.
    double sum = 0.0;
    for (Index k = 0; k < raw.size(); ++k) {
      if (raw[k] < -1e-9) {
        throw Error(Errc::validation_error,
                    "row " + std::to_string(row) + ": negative simplex coordinate");
      }
      sum += raw[k];
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error(Errc::validation_error,
                  "row " + std::to_string(row) + ": simplex coordinates do not sum to 1");
    }
    Vec y = raw.cwiseMax(0.0).cwiseSqrt();
    return y / y.norm();
  }
  if (space.contains(raw)) return raw;
  Vec proj = space.project(raw);
  if (space.distance(raw, proj) > 1e-6) {
    throw Error(Errc::validation_error,
                "row " + std::to_string(row) + ": outcome violates the space invariants");
  }
  return proj;
}

}  // namespace

Vec encode_point(const MetricSpace& space, const Vec& y) {
  if (const auto* fs = dynamic_cast<const FrobeniusSpace*>(&space)) {
    return pack_upper(fs->unflatten(y));
  }
  if (dynamic_cast<const SphereSpace*>(&space) != nullptr) {
    return y.array().square();
  }
  return y;
}

std::vector<std::string> point_column_names(const MetricSpace& space) {
  std::vector<std::string> names;
  if (const auto* fs = dynamic_cast<const FrobeniusSpace*>(&space)) {
    const Index m = fs->matrix_dim();
    for (Index r = 0; r < m; ++r) {
      for (Index c = r; c < m; ++c) {
        names.push_back("a" + std::to_string(r + 1) + "_" + std::to_string(c + 1));
      }
    }
    return names;
  }
  const char* stem = dynamic_cast<const WassersteinSpace*>(&space) != nullptr ? "q" : "y";
  for (Index k = 0; k < space.ambient_dim(); ++k) {
    names.push_back(stem + std::to_string(k + 1));
  }
  return names;
}

DatasetHeader parse_space_header(const std::string& line) {
  std::string body = trim(line);
  if (body.rfind(kMetaPrefix, 0) == 0) {
    body = body.substr(std::string(kMetaPrefix).size());
  } else if (!body.empty() && body.front() == '#') {
    throw Error(Errc::parse_error, "metadata line does not start with '#space='");
  }
  if (body.rfind("space=", 0) == 0) body = body.substr(6);
  std::vector<std::string> tokens = split(body, ',');
  if (tokens.empty() || trim(tokens.front()).empty()) {
    throw Error(Errc::parse_error, "empty space header");
  }
  DatasetHeader h;
  h.space_tag = trim(tokens.front());
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string tok = trim(tokens[i]);
    if (tok.empty()) continue;
    std::size_t eq = tok.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::parse_error, "space header token '" + tok + "' is not key=value");
    }
    const std::string key = trim(tok.substr(0, eq));
    const std::string val = trim(tok.substr(eq + 1));
    if (key == "treatment") {
      h.treatment = val;
    } else {
      h.params[key] = val;
    }
  }
  return h;
}

std::string format_space_header(const MetricSpace& space, const std::string& treatment) {
  std::string out = kMetaPrefix;
  if (const auto* fs = dynamic_cast<const FrobeniusSpace*>(&space)) {
    out += "frobenius,m=" + std::to_string(fs->matrix_dim()) + ",kind=" + to_string(fs->kind());
    out += ",w_bound=" + fmt(fs->w_bound()) + ",v_bound=" + fmt(fs->v_bound());
  } else if (const auto* ss = dynamic_cast<const SphereSpace*>(&space)) {
    out += "sphere,d=" + std::to_string(ss->ambient_dim());
  } else if (const auto* ws = dynamic_cast<const WassersteinSpace*>(&space)) {
    out += "wasserstein,g=" + std::to_string(ws->grid_size());
  } else if (const auto* es = dynamic_cast<const EuclideanSpace*>(&space)) {
    out += "euclidean,dim=" + std::to_string(es->ambient_dim());
    const bool bounded = es->lower().allFinite() || es->upper().allFinite();
    if (bounded) {
      const double lo = es->lower().minCoeff(), hi = es->upper().maxCoeff();
      if (es->lower().maxCoeff() != lo || es->upper().minCoeff() != hi) {
        throw Error(Errc::io_error, "euclidean serialization supports only uniform box bounds");
      }
      out += ",lo=" + fmt(lo) + ",hi=" + fmt(hi);
    }
  } else {
    throw Error(Errc::io_error, "no serialization for space '" + space.name() + "'");
  }
  if (treatment != "T") out += ",treatment=" + treatment;
  return out;
}

std::unique_ptr<MetricSpace> make_space(const DatasetHeader& h) {
  if (h.space_tag == "frobenius") {
    const Index m = parse_param_int(h, "m");
    auto it = h.params.find("kind");
    if (it == h.params.end()) {
      throw Error(Errc::parse_error, "space header misses parameter 'kind'");
    }
    return std::make_unique<FrobeniusSpace>(m, sym_kind_from_string(it->second),
                                            parse_param_double(h, "w_bound", 1e6),
                                            parse_param_double(h, "v_bound", 1e6));
  }
  if (h.space_tag == "sphere") {
    return std::make_unique<SphereSpace>(parse_param_int(h, "d"));
  }
  if (h.space_tag == "wasserstein") {
    return std::make_unique<WassersteinSpace>(parse_param_int(h, "g"));
  }
  if (h.space_tag == "euclidean") {
    const Index dim = h.params.count("dim") ? parse_param_int(h, "dim") : 1;
    const bool has_lo = h.params.count("lo") > 0, has_hi = h.params.count("hi") > 0;
    if (has_lo != has_hi) {
      throw Error(Errc::parse_error, "euclidean bounds need both 'lo' and 'hi'");
    }
    if (!has_lo) return std::make_unique<EuclideanSpace>(dim);
    const double lo = parse_param_double(h, "lo", 0.0);
    const double hi = parse_param_double(h, "hi", 0.0);
    return std::make_unique<EuclideanSpace>(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
  }
  throw Error(Errc::parse_error, "unknown space tag '" + h.space_tag + "'");
}

Dataset read_dataset(const std::string& path, const std::string& header_override) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "' for reading");

  std::string line;
  Index row = 0;

  // Metadata line (unless overridden), then the column header.
  std::string meta = header_override;
  if (!std::getline(in, line)) throw Error(Errc::parse_error, "empty dataset file");
  ++row;
  if (trim(line).rfind(kMetaPrefix, 0) == 0) {
    if (meta.empty()) meta = line;
    if (!std::getline(in, line)) throw Error(Errc::parse_error, "dataset misses the column header");
    ++row;
  }
  if (meta.empty()) {
    throw Error(Errc::parse_error, "dataset has no '#space=' line and no header override");
  }

  Dataset ds;
  ds.header = parse_space_header(meta);
  ds.space = make_space(ds.header);

  std::vector<std::string> cols = split(trim(line), ',');
  for (auto& c : cols) c = trim(c);
  const Index d_out = outcome_columns(*ds.space);
  Index t_col = -1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == ds.header.treatment) {
      t_col = static_cast<Index>(i);
      break;
    }
  }
  if (t_col < 0) {
    throw Error(Errc::parse_error, "treatment column '" + ds.header.treatment + "' not found");
  }
  if (static_cast<Index>(cols.size()) != t_col + 1 + d_out) {
    throw Error(Errc::parse_error, "expected " + std::to_string(d_out) +
                                       " outcome columns after the treatment column");
  }
  ds.header.covariates.assign(cols.begin(), cols.begin() + t_col);
  const Index p = t_col;

  std::vector<Vec> xs;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split(line, ',');
    if (static_cast<Index>(fields.size()) != static_cast<Index>(cols.size())) {
      throw Error(Errc::parse_error, "row " + std::to_string(row) + ": expected " +
                                         std::to_string(cols.size()) + " fields, got " +
                                         std::to_string(fields.size()));
    }
    Vec x(p);
    for (Index j = 0; j < p; ++j) x[j] = parse_double(fields[static_cast<std::size_t>(j)], row);
    const double t_val = parse_double(fields[static_cast<std::size_t>(t_col)], row);
    if (t_val != 0.0 && t_val != 1.0) {
      throw Error(Errc::validation_error,
                  "row " + std::to_string(row) + ": treatment value must be 0 or 1");
    }
    Vec raw(d_out);
    for (Index j = 0; j < d_out; ++j) {
      raw[j] = parse_double(fields[static_cast<std::size_t>(t_col + 1 + j)], row);
    }
    xs.push_back(std::move(x));
    ds.sample.t.push_back(static_cast<int>(t_val));
    ds.sample.y.push_back(decode_outcome(*ds.space, raw, row));
  }

  ds.sample.x.resize(static_cast<Index>(xs.size()), p);
  for (std::size_t i = 0; i < xs.size(); ++i) ds.sample.x.row(static_cast<Index>(i)) = xs[i];
  return ds;
}

void write_dataset(const std::string& path, const MetricSpace& space, const Sample& sample,
                   const std::vector<std::string>& covariate_names) {
  const Index n = sample.x.rows();
  const Index p = sample.x.cols();
  if (static_cast<Index>(sample.t.size()) != n || static_cast<Index>(sample.y.size()) != n) {
    throw Error(Errc::shape_mismatch, "write_dataset: sample fields disagree in length");
  }
  if (!covariate_names.empty() && static_cast<Index>(covariate_names.size()) != p) {
    throw Error(Errc::shape_mismatch, "write_dataset: covariate name count mismatch");
  }

  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");

  out << format_space_header(space) << '\n';
  std::string head;
  for (Index j = 0; j < p; ++j) {
    head += covariate_names.empty() ? "x" + std::to_string(j + 1)
                                    : covariate_names[static_cast<std::size_t>(j)];
    head += ',';
  }
  head += "T";
  for (const std::string& name : point_column_names(space)) head += ',' + name;
  out << head << '\n';

  for (Index i = 0; i < n; ++i) {
    std::string row;
    for (Index j = 0; j < p; ++j) {
      row += fmt(sample.x(i, j));
      row += ',';
    }
    row += std::to_string(sample.t[static_cast<std::size_t>(i)]);
    Vec enc = encode_point(space, sample.y[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < enc.size(); ++j) {
      row += ',';
      row += fmt(enc[j]);
    }
    out << row << '\n';
  }
  if (!out) throw Error(Errc::io_error, "write failure on '" + path + "'");
}

}  // namespace gci
