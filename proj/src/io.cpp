#include "fracsphere/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fracsphere/errors.hpp"

namespace fracsphere {

namespace {

Json vec_json(const Vec4& v, int components) {
  Json a = Json::array();
  for (int i = 0; i < components; ++i) a.push_back(v[i]);
  return a;
}

Vec4 vec_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.size() < 1 || j.size() > 4) throw DomainError(std::string(what) + ": expected 1 to 4 numbers");
  Vec4 v{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DomainError(std::string(what) + ": non-numeric entry");
    v[i] = j[i].get<double>();
  }
  return v;
}

// JSON has no NaN; non-finite values are written as null
Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(const SpectralField& c, const FracOperatorSpec& spec) {
  Json j;
  j["n"] = 2;
  j["sigma"] = spec.sigma;
  j["lmax"] = c.lmax;
  Json coeffs = Json::array();
  for (int k = 0; k <= c.lmax; ++k)
    for (int m = -k; m <= k; ++m) coeffs.push_back(Json::array({k, m, c.at(k, m)}));
  j["coeffs"] = std::move(coeffs);
  return j;
}

SpectralField spectral_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("lmax") || !j.contains("coeffs")) {
    throw DomainError("spectral snapshot: needs lmax and coeffs");
  }
  if (j.value("n", 2) != 2) throw DomainError("spectral snapshot: only n = 2 is supported");
  const int lmax = j.at("lmax").get<int>();
  if (lmax < 0 || lmax > 512) throw DomainError("spectral snapshot: lmax out of range");
  SpectralField c(lmax);
  for (const Json& e : j.at("coeffs")) {
    if (!e.is_array() || e.size() != 3) throw DomainError("spectral snapshot: coefficient entries are [k, m, value]");
    const int k = e[0].get<int>(), m = e[1].get<int>();
    if (k < 0 || k > lmax || m < -k || m > k) throw DomainError("spectral snapshot: index out of range");
    c.at(k, m) = e[2].get<double>();
  }
  return c;
}

Json to_json(const GridField& f) {
  Json j;
  j["grid"] = {{"n", f.grid->dim()}, {"counts", f.grid->counts()}};
  Json values = Json::array();
  for (double v : f.values) values.push_back(num(v));
  j["values"] = std::move(values);
  return j;
}

GridField grid_field_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("grid") || !j.contains("values")) {
    throw DomainError("grid snapshot: needs grid and values");
  }
  const GridRef g = SphereGrid::build(j.at("grid").at("n").get<int>(), j.at("grid").at("counts").get<std::vector<int>>());
  std::vector<double> v;
  for (const Json& e : j.at("values")) {
    if (!e.is_number()) throw DomainError("grid snapshot: values must be finite numbers");
    v.push_back(e.get<double>());
  }
  if (v.size() != g->size()) throw DomainError("grid snapshot: value count differs from node count");
  return GridField(g, std::move(v));
}

Json to_json(const ConformalParam& c, int n) {
  Json j;
  j["P"] = vec_json(c.P, n + 1);
  j["t"] = c.t;
  return j;
}

ConformalParam conformal_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("P") || !j.contains("t")) throw DomainError("conformal param: needs P and t");
  return ConformalParam(vec_from_json(j.at("P"), "conformal param P"), j.at("t").get<double>());
}

Json to_json(const SolutionRecord& r, const FracOperatorSpec& spec) {
  Json j;
  j["p"] = r.p;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["energy"] = num(r.energy);
  j["constraint"] = num(r.constraint);
  j["lambda"] = num(r.lambda);
  j["Lambda"] = r.has_Lambda ? vec_json(r.Lambda, spec.n + 1) : Json(nullptr);
  j["el_residual"] = num(r.el_residual);
  j["kw_residual"] = num(r.kw_residual);
  j["sup_over_mean"] = num(r.sup_over_mean);
  j["abs_replaced"] = r.abs_replaced;
  j["v"] = to_json(r.v, spec);
  return j;
}

Json to_json(const DegreeResult& r, int n) {
  Json j;
  j["n"] = n;
  j["s"] = r.s;
  j["t"] = r.t;
  j["method"] = r.method;
  j["triangulation"] = {{"descriptor", r.triangulation}, {"vertices", r.vertices}, {"simplices", r.simplices}};
  j["conclusive"] = r.conclusive;
  j["degree"] = r.conclusive ? Json(r.degree) : Json(nullptr);
  j["raw"] = num(r.raw);
  j["certificate"] = {{"min_norm", num(r.min_norm)}, {"error_estimate", num(r.error_estimate)}};
  j["note"] = r.note;
  return j;
}

Json to_json(const AubinReport& r) {
  Json j;
  j["p"] = r.p;
  j["parameter"] = r.parameter;
  j["samples"] = r.samples;
  j["skipped"] = r.skipped;
  j["worst_gap"] = num(r.worst_gap);
  j["empirical_constant"] = num(r.empirical_constant);
  j["violation"] = r.violation;
  j["seed"] = r.seed;
  Json vals = Json::array();
  for (double v : r.sample_values) vals.push_back(num(v));
  j["sample_values"] = std::move(vals);
  return j;
}

Json to_json(const IndexCount& r) {
  Json j;
  j["sum"] = r.sum;
  j["criterion"] = r.criterion;
  j["predicted_degree"] = r.predicted_degree;
  j["euler_sum"] = r.euler_sum;
  j["euler_warning"] = r.euler_warning;
  return j;
}

CriticalPointModel model_from_json(const Json& j, int n) {
  if (!j.is_object() || !j.contains("location") || !j.contains("a")) {
    throw DomainError("critical point model: needs location and a");
  }
  CriticalPointModel m;
  m.location = vec_from_json(j.at("location"), "critical point model location");
  if (norm(m.location) == 0.0) throw DomainError("critical point model: zero location");
  m.location = normalized(m.location);
  m.beta = j.value("beta", 1.5);
  m.a = j.at("a").get<std::vector<double>>();
  if (j.contains("frame")) {
    for (const Json& f : j.at("frame")) m.frame.push_back(vec_from_json(f, "critical point model frame"));
  }
  if (static_cast<int>(m.a.size()) != n) throw DomainError("critical point model: needs n coefficients");
  return m;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw DomainError("csv: row width differs from header");
  rows_.push_back(std::move(row));
}

void CsvTable::add_row(const std::vector<double>& row) {
  std::vector<std::string> cells;
  for (double x : row) cells.push_back(format_double(x));
  add_row(std::move(cells));
}

std::string CsvTable::str() const {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += field(cells[i]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace fracsphere
