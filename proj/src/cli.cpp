#include "psdaffine/cli.hpp"

#include "psdaffine/closedform.hpp"
#include "psdaffine/io.hpp"
#include "psdaffine/montecarlo.hpp"
#include "psdaffine/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace psdaffine {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json jnum(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

/// A table written either as CSV (header row, one line per row) or as a JSON
/// array of objects keyed by column name.
class Table {
public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  struct Cell {
    std::string text;
    json value;
  };
  static Cell of(double v) { return {num(v), jnum(v)}; }
  static Cell of(long v) { return {std::to_string(v), v}; }
  static Cell of(const std::string& s) { return {s, s}; }

  void add(std::vector<Cell> row) { rows_.push_back(std::move(row)); }

  void write(std::ostream& out, bool asJson) const {
    if (asJson) {
      json arr = json::array();
      for (const auto& row : rows_) {
        json o = json::object();
        for (std::size_t k = 0; k < columns_.size(); ++k) o[columns_[k]] = row[k].value;
        arr.push_back(o);
      }
      out << arr.dump(2) << "\n";
      return;
    }
    for (std::size_t k = 0; k < columns_.size(); ++k) out << (k ? "," : "") << columns_[k];
    out << "\n";
    for (const auto& row : rows_) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k].text;
      out << "\n";
    }
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::vector<std::string> psi_columns(int d) {
  std::vector<std::string> cols;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const std::string base = "psi_" + std::to_string(i) + std::to_string(j);
      cols.push_back(base + "_re");
      cols.push_back(base + "_im");
    }
  return cols;
}

SymMatrix load_state(const std::string& path, int d) {
  if (path.empty()) return SymMatrix::identity(d);
  const SymMatrix x = state_from_json(read_json_file(path));
  if (x.dim() != d) throw InputError(path + ": state dimension does not match the parameters");
  return x;
}

UGrid load_grid(const std::string& path, int d, std::optional<double> T) {
  UGrid g = ugrid_from_json(read_json_file(path));
  for (const auto& u : g.u)
    if (u.dim() != d) throw InputError(path + ": u dimension does not match the parameters");
  if (T) {
    if (!(*T >= 0.0) || !std::isfinite(*T)) throw InputError("-T: must be finite and nonnegative");
    g.times = {*T};
  }
  if (g.times.empty() && !g.u.empty()) throw InputError(path + ": no evaluation times (give \"times\" or -T)");
  return g;
}

struct Point {
  Complex phi;
  CSymMatrix psi;
  Complex value;
  std::string status = "ok";
  double tPlus = kNaN;
  long steps = 0;
  double minLambdaRe = kNaN;
};

/// ODE values for one u at every grid time.
std::vector<Point> ode_points(const AffineParams& params, const CSymMatrix& u, const SymMatrix& x,
                              const std::vector<double>& times) {
  std::vector<Point> pts(times.size());
  const double tMax = times.empty() ? 0.0 : times.back();
  if (tMax == 0.0) {
    for (auto& p : pts) p = {0.0, u, std::exp(-trace_inner(u, x))};
    return pts;
  }
  std::vector<double> cps;
  for (double t : times)
    if (t > 0.0 && t < tMax) cps.push_back(t);
  const RiccatiSolution sol = is_interior(u) ? solve(params, u, tMax, {}, cps) : solve_boundary(params, u, tMax, {}, cps);
  const auto& dg = sol.diagnostics;
  for (std::size_t k = 0; k < times.size(); ++k) {
    Point& p = pts[k];
    p.steps = dg.accepted;
    p.minLambdaRe = dg.minLambdaRe;
    if (!sol.ok()) p.tPlus = dg.tPlusEstimate;
    if (times[k] <= sol.final_time()) {
      p.phi = sol.phi_at(times[k]);
      p.psi = sol.psi_at(times[k]);
      p.value = std::exp(-p.phi - trace_inner(p.psi, x));
    } else {
      p.phi = {kNaN, kNaN};
      p.psi = CSymMatrix(u.dim());
      p.value = {kNaN, kNaN};
      p.status = to_string(dg.status);
    }
  }
  return pts;
}

std::vector<Point> closed_points(const MBAJDSpec& spec, const CSymMatrix& u, const SymMatrix& x,
                                 const std::vector<double>& times) {
  std::vector<Point> pts;
  for (double t : times) {
    Point p;
    p.phi = mbajd_phi(spec, u, t);
    p.psi = mbajd_psi(spec, u, t);
    p.value = std::exp(-p.phi - trace_inner(p.psi, x));
    pts.push_back(p);
  }
  return pts;
}

Table point_table(int d) {
  std::vector<std::string> cols = {"t", "u_index", "method", "phi_re", "phi_im"};
  for (auto& c : psi_columns(d)) cols.push_back(c);
  for (const char* c : {"value_re", "value_im", "status", "t_plus", "steps", "min_lambda_re"}) cols.emplace_back(c);
  return Table(cols);
}

void add_point(Table& table, double t, long index, const std::string& method, const Point& p) {
  std::vector<Table::Cell> row = {Table::of(t), Table::of(index), Table::of(method), Table::of(p.phi.real()),
                                  Table::of(p.phi.imag())};
  for (int i = 0; i < p.psi.dim(); ++i)
    for (int j = i; j < p.psi.dim(); ++j) {
      row.push_back(Table::of(p.psi(i, j).real()));
      row.push_back(Table::of(p.psi(i, j).imag()));
    }
  row.push_back(Table::of(p.value.real()));
  row.push_back(Table::of(p.value.imag()));
  row.push_back(Table::of(p.status));
  row.push_back(Table::of(p.tPlus));
  row.push_back(Table::of(p.steps));
  row.push_back(Table::of(p.minLambdaRe));
  table.add(std::move(row));
}

MBAJDSpec require_mbajd(const AffineParams& params) {
  auto spec = detect_mbajd(params);
  if (!spec)
    throw DomainError(
        "closed form needs MBAJD-shaped parameters: gamma = 0, c = 0, mu empty, Lyapunov drift and b = 2 p alpha");
  return *spec;
}

// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string params;
  std::string uFile;
  std::string xFile;
  std::optional<double> T;
  std::string out = "csv";
};

int cmd_validate(const std::string& path, int pairs, double tol, const std::string& format, std::ostream& out) {
  const AffineParams params = params_from_json(read_json_file(path));
  const ValidationReport rep = validate(params, pairs, tol);
  if (format == "json") {
    json j;
    j["ok"] = rep.ok();
    j["alphaClass"] = to_string(rep.alphaClass);
    j["pairsChecked"] = rep.pairsChecked;
    j["warnings"] = rep.warnings;
    json checks = json::array();
    for (const auto& c : rep.checks)
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", jnum(c.value)}, {"threshold", jnum(c.threshold)},
                        {"detail", c.detail}});
    j["checks"] = checks;
    out << j.dump(2) << "\n";
  } else {
    for (const auto& c : rep.checks)
      out << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << num(c.value) << " threshold=" << num(c.threshold)
          << " (" << c.detail << ")\n";
    out << "alpha class: " << to_string(rep.alphaClass) << "\n";
    for (const auto& w : rep.warnings) out << "WARNING " << w << "\n";
    out << (rep.ok() ? "admissible" : "not admissible") << "\n";
  }
  return rep.ok() ? kExitOk : kExitFailure;
}

int cmd_transform(const CommonArgs& a, const std::string& method, std::ostream& out) {
  const AffineParams params = params_from_json(read_json_file(a.params));
  const UGrid grid = load_grid(a.uFile, params.d, a.T);
  const SymMatrix x = load_state(a.xFile, params.d);

  std::optional<MBAJDSpec> spec;
  if (method == "closed") spec = require_mbajd(params);
  if (method == "auto") spec = detect_mbajd(params);

  Table table = point_table(params.d);
  bool early = false;
  std::vector<std::vector<Point>> perU;
  for (const auto& u : grid.u) perU.push_back(spec ? closed_points(*spec, u, x, grid.times) : ode_points(params, u, x, grid.times));
  for (std::size_t k = 0; k < grid.times.size(); ++k)
    for (std::size_t q = 0; q < grid.u.size(); ++q) {
      const Point& p = perU[q][k];
      early = early || p.status != "ok";
      add_point(table, grid.times[k], static_cast<long>(q), spec ? "closed" : "ode", p);
    }
  table.write(out, a.out == "json");
  return early ? kExitFailure : kExitOk;
}

SimConfig sim_config(long paths, double dt, std::uint64_t seed, bool antithetic) {
  SimConfig cfg;
  cfg.nPaths = paths;
  cfg.dt = dt;
  cfg.seed = seed;
  cfg.antithetic = antithetic;
  cfg.check();
  return cfg;
}

int cmd_simulate(const CommonArgs& a, const SimConfig& cfg, std::ostream& out) {
  const AffineParams params = params_from_json(read_json_file(a.params));
  const UGrid grid = load_grid(a.uFile, params.d, a.T);
  const SymMatrix x = load_state(a.xFile, params.d);
  if (!params.conservative())
    throw DomainError("simulation requires conservative parameters (c = 0 and gamma = 0): killing is not simulated");

  Table table({"t", "u_index", "mean_re", "mean_im", "stderr", "paths", "dt", "steps"});
  for (double t : grid.times) {
    const auto est = estimate_transforms(params, grid.u, x, t, cfg);
    for (std::size_t q = 0; q < est.size(); ++q)
      table.add({Table::of(t), Table::of(static_cast<long>(q)), Table::of(est[q].mean.real()),
                 Table::of(est[q].mean.imag()), Table::of(est[q].standardError), Table::of(est[q].nPaths),
                 Table::of(est[q].dt), Table::of(est[q].steps)});
  }
  table.write(out, a.out == "json");
  return kExitOk;
}

int cmd_compare(const CommonArgs& a, const SimConfig& cfg, double allowance, std::ostream& out, std::ostream& err) {
  const AffineParams params = params_from_json(read_json_file(a.params));
  const UGrid grid = load_grid(a.uFile, params.d, a.T);
  const SymMatrix x = load_state(a.xFile, params.d);
  if (!params.conservative())
    throw DomainError("simulation requires conservative parameters (c = 0 and gamma = 0): killing is not simulated");
  const auto spec = detect_mbajd(params);
  constexpr double kClosedTol = 1e-6;

  std::vector<std::vector<Point>> ode, closed;
  for (const auto& u : grid.u) {
    ode.push_back(ode_points(params, u, x, grid.times));
    if (spec) closed.push_back(closed_points(*spec, u, x, grid.times));
  }

  Table table({"t", "u_index", "ode_re", "ode_im", "closed_re", "closed_im", "mc_re", "mc_im", "mc_stderr",
               "ode_mc_over_stderr", "ode_closed_abs", "pass"});
  std::ostringstream bad;
  for (std::size_t k = 0; k < grid.times.size(); ++k) {
    const auto mc = estimate_transforms(params, grid.u, x, grid.times[k], cfg);
    for (std::size_t q = 0; q < grid.u.size(); ++q) {
      const Complex o = ode[q][k].value;
      const Complex c = spec ? closed[q][k].value : Complex(kNaN, kNaN);
      const double dm = std::abs(o - mc[q].mean);
      const double dc = spec ? std::abs(o - c) : kNaN;
      const bool pass = dm <= 3.0 * mc[q].standardError + allowance && (!spec || dc <= kClosedTol);
      table.add({Table::of(grid.times[k]), Table::of(static_cast<long>(q)), Table::of(o.real()), Table::of(o.imag()),
                 Table::of(c.real()), Table::of(c.imag()), Table::of(mc[q].mean.real()), Table::of(mc[q].mean.imag()),
                 Table::of(mc[q].standardError),
                 Table::of(mc[q].standardError > 0.0 ? dm / mc[q].standardError : (dm == 0.0 ? 0.0 : kNaN)),
                 Table::of(dc), Table::of(std::string(pass ? "yes" : "no"))});
      if (!pass)
        bad << "t=" << num(grid.times[k]) << " u_index=" << q << " |ode-mc|=" << num(dm)
            << " stderr=" << num(mc[q].standardError) << " |ode-closed|=" << num(dc) << "\n";
    }
  }
  table.write(out, a.out == "json");
  if (!bad.str().empty()) {
    err << "comparison failed (|ode-mc| <= 3 stderr + " << num(allowance) << ", |ode-closed| <= " << num(kClosedTol)
        << "):\n"
        << bad.str();
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fourier-Laplace transforms of affine processes on positive semidefinite matrices", "psdaffine"};
  app.require_subcommand(1);

  CommonArgs common;
  int pairs = 64;
  double tol = 1e-10;
  std::string format = "text";
  auto* validateCmd = app.add_subcommand("validate", "check admissibility of a parameter file");
  validateCmd->add_option("params", common.params, "parameter file")->required();
  validateCmd->add_option("--pairs", pairs, "random boundary pairs for the inward-pointing check")->check(CLI::NonNegativeNumber);
  validateCmd->add_option("--tol", tol, "tolerance of the cone checks")->check(CLI::NonNegativeNumber);
  validateCmd->add_option("--format", format, "report format")->check(CLI::IsMember({"text", "json"}));

  std::string method = "auto";
  auto* transformCmd = app.add_subcommand("transform", "evaluate the transform on a u grid");
  transformCmd->add_option("params", common.params, "parameter file")->required();
  transformCmd->add_option("ugrid", common.uFile, "u grid file")->required();
  transformCmd->add_option("--x", common.xFile, "initial state file (default identity)");
  transformCmd->add_option("-T", common.T, "single evaluation time (overrides the grid times)");
  transformCmd->add_option("--method", method, "solver")->check(CLI::IsMember({"ode", "closed", "auto"}));
  transformCmd->add_option("--out", common.out, "output format")->check(CLI::IsMember({"csv", "json"}));

  long paths = 10000;
  double dt = 1.0 / 1024.0;
  std::uint64_t seed = 1;
  bool antithetic = false;
  double allowance = 0.005;
  auto add_sim = [&](CLI::App* cmd) {
    cmd->add_option("params", common.params, "parameter file")->required();
    cmd->add_option("--u", common.uFile, "u grid file")->required();
    cmd->add_option("--x", common.xFile, "initial state file (default identity)");
    cmd->add_option("-T", common.T, "horizon (overrides the grid times)");
    cmd->add_option("--paths", paths, "number of paths")->check(CLI::PositiveNumber);
    cmd->add_option("--dt", dt, "time step")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_flag("--antithetic", antithetic, "antithetic Brownian increments");
    cmd->add_option("--out", common.out, "output format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* simulateCmd = app.add_subcommand("simulate", "Monte Carlo estimate of the transform");
  add_sim(simulateCmd);
  auto* compareCmd = app.add_subcommand("compare", "ODE vs closed form vs Monte Carlo");
  add_sim(compareCmd);
  compareCmd->add_option("--allowance", allowance, "discretization allowance")->check(CLI::NonNegativeNumber);

  auto* mbajdCmd = app.add_subcommand("mbajd", "closed-form phi and psi");
  mbajdCmd->add_option("params", common.params, "parameter file")->required();
  mbajdCmd->add_option("--u", common.uFile, "u grid file")->required();
  mbajdCmd->add_option("--x", common.xFile, "initial state file (default identity)");
  mbajdCmd->add_option("-T", common.T, "evaluation time (overrides the grid times)");
  mbajdCmd->add_option("--out", common.out, "output format")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*validateCmd) return cmd_validate(common.params, pairs, tol, format, out);
    if (*transformCmd) return cmd_transform(common, method, out);
    if (*mbajdCmd) return cmd_transform(common, "closed", out);
    if (*simulateCmd) return cmd_simulate(common, sim_config(paths, dt, seed, antithetic), out);
    if (*compareCmd) return cmd_compare(common, sim_config(paths, dt, seed, antithetic), allowance, out, err);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DimensionError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInput;
}

}  // namespace psdaffine
