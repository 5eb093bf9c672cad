#include "kggraph/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "kggraph/errors.hpp"

namespace kggraph {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw DomainError("complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("invalid JSON: ") + e.what());
  }
}

double number_or_nan(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace

std::string to_json(const GraphFunction& f) {
  json edges = json::array();
  for (int j = 0; j < f.N(); ++j) {
    json e = json::array();
    for (Complex z : f.edge(j)) e.push_back(complex_json(z));
    edges.push_back(std::move(e));
  }
  json out = {{"N", f.N()},
              {"M", f.grid().M()},
              {"L", f.grid().L()},
              {"vertex", complex_json(f.vertex())},
              {"edges", std::move(edges)}};
  return out.dump();
}

GraphFunction graph_function_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    const int N = j.at("N").get<int>();
    const Grid grid(j.at("L").get<double>(), j.at("M").get<int>());
    GraphFunction f(N, grid);
    f.set_vertex(complex_from(j.at("vertex")));
    const json& edges = j.at("edges");
    if (!edges.is_array() || static_cast<int>(edges.size()) != N) throw DimensionError("edges must hold N arrays");
    for (int e = 0; e < N; ++e) {
      if (static_cast<int>(edges[e].size()) != grid.M()) throw DimensionError("each edge must hold M values");
      for (int i = 1; i <= grid.M(); ++i) f.at(e, i) = complex_from(edges[e][i - 1]);
    }
    return f;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed graph function: ") + e.what());
  }
}

std::string to_json(const SpectralReport& r) {
  json out = {{"eigenvalues", r.eigenvalues}, {"morse_index", r.morse_index}, {"nullity", r.nullity}};
  if (r.band_edges)
    out["band_edges"] = json::array({r.band_edges->sigma1, r.band_edges->sigma2});
  else
    out["band_edges"] = nullptr;
  out["tol_zero"] = r.tol_zero;
  out["dim"] = r.dim;
  out["complete"] = r.complete;
  return out.dump();
}

SpectralReport spectral_report_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    SpectralReport r;
    for (const auto& v : j.at("eigenvalues")) r.eigenvalues.push_back(number_or_nan(v));
    r.morse_index = j.at("morse_index").get<int>();
    r.nullity = j.at("nullity").get<int>();
    if (j.contains("band_edges") && !j["band_edges"].is_null()) {
      BandEdges e;
      e.sigma1 = j["band_edges"].at(0).get<double>();
      e.sigma2 = j["band_edges"].at(1).get<double>();
      e.degenerate = e.sigma1 == e.sigma2;
      r.band_edges = e;
    }
    r.tol_zero = j.value("tol_zero", 0.0);
    r.dim = j.value("dim", static_cast<int>(r.eigenvalues.size()));
    r.complete = j.value("complete", true);
    return r;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed spectral report: ") + e.what());
  }
}

std::string profile_csv(const GraphFunction& f) {
  std::ostringstream os;
  os << "edge,x,re,im\n";
  for (int j = 0; j < f.N(); ++j) {
    os << j + 1 << ",0," << format_double(f.vertex().real()) << ',' << format_double(f.vertex().imag()) << '\n';
    for (int i = 1; i <= f.grid().M(); ++i) {
      const Complex z = f.at(j, i);
      os << j + 1 << ',' << format_double(f.grid().x(i)) << ',' << format_double(z.real()) << ','
         << format_double(z.imag()) << '\n';
    }
  }
  return os.str();
}

std::string trajectory_csv(const Trajectory& tr) {
  const bool orbit = !tr.orbit_distance.empty();
  std::ostringstream os;
  os << "t,energy,charge";
  if (orbit) os << ",orbit_distance";
  os << ",x_norm\n";
  for (size_t i = 0; i < tr.times.size(); ++i) {
    os << format_double(tr.times[i]) << ',' << format_double(tr.energy_series[i]) << ','
       << format_double(tr.charge_series[i]);
    if (orbit) os << ',' << format_double(tr.orbit_distance[i]);
    os << ',' << format_double(tr.x_norm_series[i]) << '\n';
  }
  return os.str();
}

std::string slope_csv(const std::vector<std::pair<PhysParams, SlopeReport>>& rows) {
  std::ostringstream os;
  os << "alpha,omega,Q,dQ_analytic,dQ_numeric,region\n";
  for (const auto& [p, r] : rows) {
    os << format_double(p.alpha) << ',' << format_double(p.omega) << ',' << format_double(r.Q_value) << ','
       << format_double(r.dQ_analytic) << ',' << format_double(r.dQ_numeric) << ',' << to_string(r.region) << '\n';
  }
  return os.str();
}

std::string verdict_csv(const std::vector<StabilityVerdict>& rows) {
  std::ostringstream os;
  os << "N,k,alpha,m,omega,p,morse_index,nullity,slope_sign,sigma1,sigma2,verdict,clause\n";
  for (const auto& v : rows) {
    const PhysParams& p = v.params;
    os << p.N << ',' << p.k << ',' << format_double(p.alpha) << ',' << format_double(p.m) << ','
       << format_double(p.omega) << ',' << format_double(p.p) << ',' << v.evidence.morse_index << ','
       << v.evidence.nullity << ',' << v.evidence.slope_sign << ',' << format_double(v.sigma1) << ','
       << format_double(v.sigma2) << ',' << to_string(v.verdict) << ',' << to_string(v.clause) << '\n';
  }
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open output file: " + path);
  out << content;
  if (!out) throw DomainError("failed writing output file: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace kggraph
