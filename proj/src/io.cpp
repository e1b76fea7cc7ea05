#include "psdaffine/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace psdaffine {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw InputError(path + ": " + what); }

const json& field(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "not finite");
  return x;
}

MatrixXd matrix(const json& v, const std::string& path, int rows, int cols) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    fail(path, "expected an array of " + std::to_string(rows) + " rows");
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != cols)
      fail(rp, "expected a row of " + std::to_string(cols) + " numbers");
    for (int j = 0; j < cols; ++j) m(i, j) = number(v[i][j], rp + "[" + std::to_string(j) + "]");
  }
  return m;
}

SymMatrix sym(const json& v, const std::string& path, int d) {
  const MatrixXd m = matrix(v, path, d, d);
  if (m != m.transpose()) fail(path, "matrix is not symmetric");
  return SymMatrix(m);
}

json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

AffineParams params_from_json(const json& j) {
  if (!j.is_object()) fail("$", "expected an object");
  const json& version = field(j, "$", "version");
  if (!version.is_number_integer() || version.get<int>() != 1) fail("$.version", "unsupported version (expected 1)");
  const json& dj = field(j, "$", "d");
  if (!dj.is_number_integer() || dj.get<int>() < 1 || dj.get<int>() > 16) fail("$.d", "expected an integer in [1, 16]");
  const int d = dj.get<int>();

  AffineParams p = AffineParams::zero(d);
  p.alpha = sym(field(j, "$", "alpha"), "$.alpha", d);
  p.b = sym(field(j, "$", "b"), "$.b", d);

  const json& drift = field(j, "$", "drift");
  if (!drift.is_object()) fail("$.drift", "expected an object");
  const json& type = field(drift, "$.drift", "type");
  if (type == "lyapunov") {
    p.B = LinearDrift::lyapunov(matrix(field(drift, "$.drift", "beta"), "$.drift.beta", d, d));
  } else if (type == "general") {
    const int D = vec_dim(d);
    p.B = LinearDrift::general(matrix(field(drift, "$.drift", "matrix"), "$.drift.matrix", D, D));
  } else {
    fail("$.drift.type", "expected \"lyapunov\" or \"general\"");
  }

  if (j.contains("c")) p.c = number(j["c"], "$.c");
  if (j.contains("gamma")) p.gamma = sym(j["gamma"], "$.gamma", d);

  if (j.contains("m")) {
    const json& atoms = field(j["m"], "$.m", "atoms");
    if (!atoms.is_array()) fail("$.m.atoms", "expected an array");
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const std::string ap = "$.m.atoms[" + std::to_string(k) + "]";
      p.m.atoms.push_back({sym(field(atoms[k], ap, "xi"), ap + ".xi", d), number(field(atoms[k], ap, "weight"), ap + ".weight")});
    }
  }
  if (j.contains("mu")) {
    const json& atoms = field(j["mu"], "$.mu", "atoms");
    if (!atoms.is_array()) fail("$.mu.atoms", "expected an array");
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const std::string ap = "$.mu.atoms[" + std::to_string(k) + "]";
      p.mu.atoms.push_back({sym(field(atoms[k], ap, "xi"), ap + ".xi", d),
                            sym(field(atoms[k], ap, "weightMatrix"), ap + ".weightMatrix", d)});
    }
  }
  return p;
}

json params_to_json(const AffineParams& p) {
  json j;
  j["version"] = 1;
  j["d"] = p.d;
  j["alpha"] = to_json(p.alpha.mat());
  j["b"] = to_json(p.b.mat());
  if (const auto* l = p.B.as_lyapunov())
    j["drift"] = {{"type", "lyapunov"}, {"beta", to_json(l->beta)}};
  else
    j["drift"] = {{"type", "general"}, {"matrix", to_json(p.B.as_general()->matrix)}};
  j["c"] = p.c;
  j["gamma"] = to_json(p.gamma.mat());
  json m = json::array();
  for (const auto& a : p.m.atoms) m.push_back({{"xi", to_json(a.xi.mat())}, {"weight", a.weight}});
  j["m"] = {{"atoms", m}};
  json mu = json::array();
  for (const auto& a : p.mu.atoms) mu.push_back({{"xi", to_json(a.xi.mat())}, {"weightMatrix", to_json(a.weightMatrix.mat())}});
  j["mu"] = {{"atoms", mu}};
  return j;
}

std::string dump_params(const AffineParams& params) { return params_to_json(params).dump(2) + "\n"; }

UGrid ugrid_from_json(const json& j) {
  if (!j.is_object()) fail("$", "expected an object");
  UGrid g;
  const json& us = field(j, "$", "u");
  if (!us.is_array()) fail("$.u", "expected an array");
  int d = -1;
  for (std::size_t k = 0; k < us.size(); ++k) {
    const std::string up = "$.u[" + std::to_string(k) + "]";
    const json& re = field(us[k], up, "re");
    if (!re.is_array() || re.empty()) fail(up + ".re", "expected a square matrix");
    if (d < 0) d = static_cast<int>(re.size());
    const SymMatrix r = sym(re, up + ".re", d);
    const SymMatrix i = us[k].contains("im") ? sym(us[k]["im"], up + ".im", d) : SymMatrix(d);
    if (!is_psd(r)) fail(up + ".re", "real part must be positive semidefinite");
    g.u.emplace_back(r, i);
  }
  if (j.contains("times")) {
    const json& ts = j["times"];
    if (!ts.is_array()) fail("$.times", "expected an array");
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const std::string tp = "$.times[" + std::to_string(k) + "]";
      const double t = number(ts[k], tp);
      if (t < 0.0) fail(tp, "times must be nonnegative");
      if (!g.times.empty() && t < g.times.back()) fail(tp, "times must be ascending");
      g.times.push_back(t);
    }
  }
  return g;
}

SymMatrix state_from_json(const json& j) {
  const json& m = (j.is_object() && j.contains("x")) ? j["x"] : j;
  const std::string path = (j.is_object() && j.contains("x")) ? "$.x" : "$";
  if (!m.is_array() || m.empty()) fail(path, "expected a square matrix");
  const SymMatrix x = sym(m, path, static_cast<int>(m.size()));
  if (!is_psd(x)) fail(path, "state must be positive semidefinite");
  return x;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

}  // namespace psdaffine
