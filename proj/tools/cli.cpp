#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "json.hpp"
#include "kggraph/conserved.hpp"
#include "kggraph/io.hpp"
#include "kggraph/operators.hpp"
#include "kggraph/profiles.hpp"
#include "kggraph/spectrum.hpp"

namespace kggraph::cli {

using nlohmann::json;

namespace {

const std::map<std::string, Command> kCommands = {
    {"profile", Command::Profile},   {"spectrum", Command::Spectrum},
    {"slope", Command::Slope},       {"evolve", Command::Evolve},
    {"classify", Command::Classify}, {"phase-diagram", Command::PhaseDiagram},
    {"accept", Command::Accept},
};

/// Raised by parse_config for --help; main_entry prints the text.
struct HelpRequested {
  std::string text;
};

/// Values that may come from the config file or from flags.
struct Settings {
  std::optional<std::string> command;
  std::optional<int> N, k, M;
  std::optional<double> alpha, m, omega, p, L, dt, T, eps;
  std::optional<std::string> out, format, restrict, which, sweep_file;

  void override_with(const Settings& o) {
    auto take = [](auto& mine, const auto& theirs) {
      if (theirs) mine = theirs;
    };
    take(command, o.command);
    take(N, o.N);
    take(k, o.k);
    take(M, o.M);
    take(alpha, o.alpha);
    take(m, o.m);
    take(omega, o.omega);
    take(p, o.p);
    take(L, o.L);
    take(dt, o.dt);
    take(T, o.T);
    take(eps, o.eps);
    take(out, o.out);
    take(format, o.format);
    take(restrict, o.restrict);
    take(which, o.which);
    take(sweep_file, o.sweep_file);
  }
};

Settings settings_from_file(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path + " must hold a JSON object");
  Settings s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "command") s.command = value.get<std::string>();
      else if (key == "N") s.N = value.get<int>();
      else if (key == "k") s.k = value.get<int>();
      else if (key == "M") s.M = value.get<int>();
      else if (key == "alpha") s.alpha = value.get<double>();
      else if (key == "m") s.m = value.get<double>();
      else if (key == "omega") s.omega = value.get<double>();
      else if (key == "p") s.p = value.get<double>();
      else if (key == "L") s.L = value.get<double>();
      else if (key == "dt") s.dt = value.get<double>();
      else if (key == "T") s.T = value.get<double>();
      else if (key == "eps") s.eps = value.get<double>();
      else if (key == "out") s.out = value.get<std::string>();
      else if (key == "format") s.format = value.get<std::string>();
      else if (key == "restrict") s.restrict = value.is_number() ? std::to_string(value.get<int>()) : value.get<std::string>();
      else if (key == "which") s.which = value.get<std::string>();
      else if (key == "sweep_file" || key == "sweep-file") s.sweep_file = value.get<std::string>();
      else throw UsageError("config " + path + ": unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  return s;
}

bool needs_profile(const RunConfig& c) {
  switch (c.command) {
    case Command::Profile:
    case Command::Slope:
    case Command::Evolve:
    case Command::Classify: return true;
    case Command::Spectrum: return c.which != "H";
    case Command::PhaseDiagram:
    case Command::Accept: return false;
  }
  return false;
}

void check_output_path(const std::string& path) {
  if (path.empty()) return;
  namespace fs = std::filesystem;
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  if (!fs::is_directory(parent)) throw UsageError("output directory does not exist: " + parent.string());
  if (fs::is_directory(path)) throw UsageError("output path is a directory: " + path);
}

/// Data to the output file (summary to `out`) or to `out` (summary to `err`).
class Sink {
 public:
  Sink(const RunConfig& cfg, std::ostream& out, std::ostream& err) : cfg_(cfg), out_(out), err_(err) {}

  void data(const std::string& text) {
    if (cfg_.output_path.empty()) {
      out_ << text;
      if (!text.empty() && text.back() != '\n') out_ << '\n';
    } else {
      write_file(cfg_.output_path, text);
    }
  }
  std::ostream& summary() { return cfg_.output_path.empty() ? err_ : out_; }
  std::ostream& diagnostics() { return err_; }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
  std::ostream& err_;
};

json params_json(const PhysParams& q) {
  return {{"N", q.N}, {"k", q.k}, {"alpha", q.alpha}, {"m", q.m}, {"omega", q.omega}, {"p", q.p}};
}

json verdict_json(const StabilityVerdict& v) {
  json j = params_json(v.params);
  j["morse_index"] = v.evidence.morse_index;
  j["nullity"] = v.evidence.nullity;
  j["slope_sign"] = v.evidence.slope_sign;
  j["band_gap_ok"] = v.evidence.band_gap_ok;
  j["sigma1"] = v.sigma1;
  j["sigma2"] = v.sigma2;
  j["verdict"] = to_string(v.verdict);
  j["clause"] = to_string(v.clause);
  j["space"] = to_string(v.space);
  j["full_morse_L1"] = v.full_morse_L1;
  j["tol_zero"] = v.tol_zero;
  j["diagnostic"] = v.diagnostic;
  return j;
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

int run_profile(const RunConfig& c, Sink& sink) {
  const GraphFunction phi = build_profile(c.params, c.grid);
  sink.data(c.format == Format::Json ? to_json(phi) : profile_csv(phi));
  sink.summary() << "profile: max " << format_double(phi.max_abs()) << ", residual "
                 << format_double(stationary_residual(phi, c.params)) << ", vertex defect "
                 << format_double(vertex_flux_defect(phi, c.params.alpha)) << "\n";
  return exit_code::ok;
}

int run_spectrum(const RunConfig& c, Sink& sink) {
  OperatorAssembly op;
  if (c.which == "H") {
    op = assemble_H_alpha(c.params, c.grid);
    if (c.restrict_k) op = restrict_to_Lk(op, *c.restrict_k);
  } else if (c.which == "L1" || c.which == "L2") {
    op = assemble_L12(c.params, c.grid, c.which == "L1" ? 1 : 2);
    if (c.restrict_k) op = restrict_to_Lk(op, *c.restrict_k);
  } else {
    op = assemble_block_L(c.params, c.grid, ProfileSource::Analytic, c.restrict_k);
  }
  const SpectralReport r = solve_spectrum(op);
  if (c.format == Format::Json) {
    sink.data(to_json(r));
  } else {
    std::string csv = "index,eigenvalue\n";
    for (size_t i = 0; i < r.eigenvalues.size(); ++i)
      csv += std::to_string(i) + "," + format_double(r.eigenvalues[i]) + "\n";
    sink.data(csv);
  }
  sink.summary() << "spectrum " << c.which << (c.restrict_k ? " on L2_" + std::to_string(*c.restrict_k) : "")
                 << ": dim " << r.dim << ", morse_index " << r.morse_index << ", nullity " << r.nullity
                 << ", tol_zero " << format_double(r.tol_zero) << "\n";
  return exit_code::ok;
}

int run_slope(const RunConfig& c, Sink& sink) {
  const SlopeReport r = slope_closed_form(c.params);
  if (c.format == Format::Json) {
    json j = params_json(c.params);
    j["Q"] = r.Q_value;
    j["dQ_analytic"] = r.dQ_analytic;
    j["dQ_numeric"] = nullable(r.dQ_numeric);
    j["region"] = to_string(r.region);
    sink.data(j.dump());
  } else {
    sink.data(slope_csv({{c.params, r}}));
  }
  sink.summary() << "slope: Q " << format_double(r.Q_value) << ", dQ/domega " << format_double(r.dQ_analytic)
                 << ", region " << to_string(r.region) << "\n";
  return exit_code::ok;
}

int run_evolve(const RunConfig& c, Sink& sink) {
  const GraphFunction phi = discrete_profile(c.params, c.grid);
  const StateVector wave = standing_wave_state(phi, c.params.omega);
  StateVector U0 = wave;
  if (c.eps > 0)
    U0 += Complex(c.eps) * perturbation_direction(c.params, c.grid, PerturbationDirection::RadialSymmetric);
  const EvolveConfig cfg = c.evolve_cfg.value_or(EvolveConfig{});
  const Trajectory tr = evolve(U0, cfg, c.params, c.grid, wave);
  if (c.format == Format::Json) {
    json j;
    j["t"] = tr.times;
    j["energy"] = tr.energy_series;
    j["charge"] = tr.charge_series;
    j["orbit_distance"] = tr.orbit_distance;
    j["x_norm"] = tr.x_norm_series;
    j["terminated"] = to_string(tr.terminated);
    j["steps"] = tr.steps_taken;
    j["final_state"] = {{"u", json::parse(to_json(tr.final_state().u))},
                        {"v", json::parse(to_json(tr.final_state().v))}};
    sink.data(j.dump());
  } else {
    sink.data(trajectory_csv(tr));
  }
  double drift = 0.0;
  for (double e : tr.energy_series) drift = std::max(drift, std::abs(e - tr.energy_series.front()));
  const double dmax = tr.orbit_distance.empty() ? 0.0 : *std::max_element(tr.orbit_distance.begin(), tr.orbit_distance.end());
  sink.summary() << "evolve: " << to_string(tr.terminated) << " at t = " << format_double(tr.times.back()) << " after "
                 << tr.steps_taken << " steps, energy drift " << format_double(drift) << ", max orbit distance "
                 << format_double(dmax) << "\n";
  return exit_code::ok;
}

int run_classify(const RunConfig& c, Sink& sink) {
  const StabilityVerdict v = classify(c.params, c.grid);
  sink.data(c.format == Format::Json ? verdict_json(v).dump() : verdict_csv({v}));
  sink.summary() << "classify: " << to_string(v.verdict) << " (" << to_string(v.clause) << "), n = "
                 << v.evidence.morse_index << ", nullity = " << v.evidence.nullity << ", slope sign "
                 << v.evidence.slope_sign << (v.diagnostic.empty() ? "" : ", " + v.diagnostic) << "\n";
  return exit_code::ok;
}

int run_phase_diagram(const RunConfig& c, Sink& sink) {
  const std::vector<PhysParams> sweep = read_sweep(c.sweep_file, c.params);
  GridSpec spec;
  spec.M = c.grid.M();
  spec.L = c.length;
  const PhaseDiagram d = phase_diagram(sweep, spec);
  std::vector<StabilityVerdict> rows;
  json arr = json::array();
  int skipped = 0;
  for (const PhaseRow& r : d.rows) {
    if (r.verdict) {
      rows.push_back(*r.verdict);
      arr.push_back(verdict_json(*r.verdict));
    } else {
      ++skipped;
      sink.diagnostics() << "skipped " << params_json(r.params).dump() << ": " << r.skipped_reason << "\n";
      json j = params_json(r.params);
      j["skipped"] = r.skipped_reason;
      arr.push_back(j);
    }
  }
  for (const std::string& w : d.warnings) sink.diagnostics() << "warning: " << w << "\n";
  sink.data(c.format == Format::Json ? arr.dump() : verdict_csv(rows));
  sink.summary() << "phase-diagram: " << rows.size() << " points classified, " << skipped << " skipped, "
                 << d.warnings.size() << " adjacency warnings\n";
  return exit_code::ok;
}

int run_accept(std::ostream& out) {
  int failed = 0;
  acceptance::run_all([&](const acceptance::CriterionResult& r) {
    out << acceptance::format_line(r) << "\n" << std::flush;
    if (!r.pass) ++failed;
  });
  out << "acceptance: " << acceptance::criterion_count - failed << "/" << acceptance::criterion_count << " passed\n";
  return failed == 0 ? exit_code::ok : exit_code::acceptance;
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [name, cmd] : kCommands)
    if (cmd == c) return name;
  return "unknown";
}

Command command_from(const std::string& name) {
  const auto it = kCommands.find(name);
  if (it == kCommands.end()) throw UsageError("unknown command '" + name + "'");
  return it->second;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Standing waves of the nonlinear Klein-Gordon equation on a star graph with a delta vertex", "kggraph"};
  Settings flags;
  std::string config_path;
  std::string names;
  for (const auto& kv : kCommands) names += (names.empty() ? "" : ", ") + kv.first;
  app.add_option("command", flags.command, "One of: " + names);
  app.add_option("--config", config_path, "JSON file with default values; flags override it");
  app.add_option("--N", flags.N, "Number of edges");
  app.add_option("--k", flags.k, "Number of edges carrying the shifted tail");
  app.add_option("--alpha", flags.alpha, "Strength of the delta interaction");
  app.add_option("--m", flags.m, "Mass");
  app.add_option("--omega", flags.omega, "Frequency of the standing wave");
  app.add_option("--p", flags.p, "Nonlinearity power");
  app.add_option("--L", flags.L, "Edge length (default 40/sqrt(m^2-omega^2))");
  app.add_option("--M", flags.M, "Grid intervals per edge (default 6000)");
  app.add_option("--dt", flags.dt, "Time step (evolve)");
  app.add_option("--T", flags.T, "Final time (evolve)");
  app.add_option("--eps", flags.eps, "Perturbation size (evolve)");
  app.add_option("--out", flags.out, "Output file (default: standard output)");
  app.add_option("--format", flags.format, "csv or json");
  app.add_option("--restrict", flags.restrict, "Restrict to L2_k: 'k' for the profile's k, an integer, or 'none'");
  app.add_option("--which", flags.which, "Operator for spectrum: H, L1, L2 or block");
  app.add_option("--sweep-file", flags.sweep_file, "CSV or JSON list of parameter points (phase-diagram)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  Settings s;
  if (!config_path.empty()) s = settings_from_file(config_path);
  s.override_with(flags);
  if (!s.command) throw UsageError("no command given (one of: " + names + ")");

  RunConfig c;
  c.command = command_from(*s.command);
  c.params.N = s.N.value_or(3);
  c.params.k = s.k.value_or(0);
  c.params.alpha = s.alpha.value_or(0.0);
  c.params.m = s.m.value_or(1.0);
  c.params.omega = s.omega.value_or(0.0);
  c.params.p = s.p.value_or(2.0);
  c.params.validate();

  c.which = s.which.value_or("L1");
  if (c.which != "H" && c.which != "L1" && c.which != "L2" && c.which != "block")
    throw UsageError("--which must be H, L1, L2 or block (got '" + c.which + "')");
  if (needs_profile(c)) c.params.validate_profile();

  const int M = s.M.value_or(6000);
  double L = 60.0;
  if (s.L) L = *s.L;
  else if (c.params.gap() > 0) L = Grid::default_length(c.params);
  c.grid = Grid(L, M);
  c.length = s.L;

  const std::string format = s.format.value_or("csv");
  if (format == "csv") c.format = Format::Csv;
  else if (format == "json") c.format = Format::Json;
  else throw UsageError("--format must be csv or json (got '" + format + "')");

  if (s.restrict && *s.restrict != "none" && *s.restrict != "full") {
    if (*s.restrict == "k") {
      c.restrict_k = c.params.k;
    } else {
      try {
        size_t used = 0;
        c.restrict_k = std::stoi(*s.restrict, &used);
        if (used != s.restrict->size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw UsageError("--restrict must be 'k', 'none' or an integer (got '" + *s.restrict + "')");
      }
    }
    if (*c.restrict_k < 0 || *c.restrict_k > c.params.N - 1)
      throw UsageError("--restrict needs 0 <= k <= N-1");
  }

  c.output_path = s.out.value_or("");
  check_output_path(c.output_path);

  if (c.command == Command::Evolve) {
    EvolveConfig e;
    e.dt = s.dt.value_or(1e-2);
    e.T = s.T.value_or(10.0);
    e.validate();
    e.record_every = static_cast<int>(std::max<long>(1, e.steps() / 1000));
    c.evolve_cfg = e;
    c.eps = s.eps.value_or(0.0);
    if (!(c.eps >= 0.0 && c.eps <= 0.1)) throw UsageError("--eps must satisfy 0 <= eps <= 0.1");
  }

  if (c.command == Command::PhaseDiagram) {
    if (!s.sweep_file) throw UsageError("phase-diagram needs --sweep-file");
    c.sweep_file = *s.sweep_file;
    if (!std::filesystem::is_regular_file(c.sweep_file)) throw UsageError("cannot read sweep file " + c.sweep_file);
  }
  return c;
}

std::vector<PhysParams> read_sweep(const std::string& path, const PhysParams& base) {
  const std::string text = read_file(path);
  std::vector<PhysParams> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    json j;
    try {
      j = json::parse(text);
      for (const json& row : j) {
        PhysParams q = base;
        q.N = row.value("N", q.N);
        q.k = row.value("k", q.k);
        q.alpha = row.value("alpha", q.alpha);
        q.m = row.value("m", q.m);
        q.omega = row.value("omega", q.omega);
        q.p = row.value("p", q.p);
        out.push_back(q);
      }
    } catch (const json::exception& e) {
      throw UsageError("sweep file " + path + ": " + e.what());
    }
    return out;
  }
  const auto rows = parse_csv(text);
  if (rows.empty()) return out;
  const std::vector<std::string>& header = rows.front();
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() == 1 && rows[r][0].empty()) continue;
    if (rows[r].size() != header.size()) throw UsageError("sweep file " + path + ": row " + std::to_string(r) + " has the wrong width");
    PhysParams q = base;
    for (size_t i = 0; i < header.size(); ++i) {
      const std::string& key = header[i];
      const std::string& v = rows[r][i];
      try {
        if (key == "N") q.N = std::stoi(v);
        else if (key == "k") q.k = std::stoi(v);
        else if (key == "alpha") q.alpha = std::stod(v);
        else if (key == "m") q.m = std::stod(v);
        else if (key == "omega") q.omega = std::stod(v);
        else if (key == "p") q.p = std::stod(v);
        else throw UsageError("sweep file " + path + ": unknown column '" + key + "'");
      } catch (const std::logic_error&) {
        throw UsageError("sweep file " + path + ": bad value '" + v + "' in column " + key);
      }
    }
    out.push_back(q);
  }
  return out;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Sink sink(cfg, out, err);
  switch (cfg.command) {
    case Command::Profile: return run_profile(cfg, sink);
    case Command::Spectrum: return run_spectrum(cfg, sink);
    case Command::Slope: return run_slope(cfg, sink);
    case Command::Evolve: return run_evolve(cfg, sink);
    case Command::Classify: return run_classify(cfg, sink);
    case Command::PhaseDiagram: return run_phase_diagram(cfg, sink);
    case Command::Accept: return run_accept(out);
  }
  return exit_code::validation;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(parse_config(args), out, err);
  } catch (const HelpRequested& h) {
    out << h.text;
    return exit_code::ok;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return exit_code::numeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::validation;
  } catch (const std::exception& e) {
    err << "numeric error: " << e.what() << "\n";
    return exit_code::numeric;
  }
}

}  // namespace kggraph::cli
