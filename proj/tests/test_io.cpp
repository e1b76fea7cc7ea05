#include "doctest.h"
#include "oracles.hpp"

#include "psdaffine/io.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace psdaffine;
using namespace psdaffine::testing;
using nlohmann::json;

namespace {

json wishart_json() {
  return json::parse(R"({
    "version": 1, "d": 2,
    "alpha": [[1, 0], [0, 1]],
    "b": [[2, 0], [0, 2]],
    "drift": {"type": "lyapunov", "beta": [[-0.5, 0], [0, -0.5]]},
    "m": {"atoms": [{"xi": [[0.5, 0.2], [0.2, 0.3]], "weight": 1.0}]},
    "mu": {"atoms": [{"xi": [[0.3, 0.1], [0.1, 0.4]], "weightMatrix": [[0.5, 0], [0, 0.5]]}]}
  })");
}

std::string error_of(const json& j) {
  try {
    params_from_json(j);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parameter files parse into the expected model") {
  const AffineParams p = params_from_json(wishart_json());
  CHECK(p.d == 2);
  CHECK((p.alpha - SymMatrix::identity(2)).norm() == 0.0);
  REQUIRE(p.B.as_lyapunov() != nullptr);
  CHECK(p.B.as_lyapunov()->beta(0, 0) == -0.5);
  CHECK(p.c == 0.0);
  CHECK(p.gamma.norm() == 0.0);
  REQUIRE(p.m.atoms.size() == 1);
  CHECK(p.m.atoms[0].weight == 1.0);
  REQUIRE(p.mu.atoms.size() == 1);
  CHECK(p.mu.atoms[0].xi(1, 1) == 0.4);
}

TEST_CASE("serialization round trip is idempotent and exact") {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 40; ++trial) {
    RandomModelOptions o;
    o.d = 2 + trial % 3;
    o.generalDrift = trial % 2 == 1;
    o.killing = trial % 3 == 0;
    o.mAtoms = trial % 3;
    o.muAtoms = 1 + trial % 2;
    const AffineParams p = random_admissible(rng, o);
    const std::string once = dump_params(p);
    const AffineParams back = params_from_json(json::parse(once));
    CHECK(dump_params(back) == once);
    CHECK((back.alpha - p.alpha).norm() == 0.0);
    CHECK((back.b - p.b).norm() == 0.0);
    CHECK(back.c == p.c);
    if (o.generalDrift) CHECK((back.B.as_general()->matrix - p.B.as_general()->matrix).norm() == 0.0);
  }
}

TEST_CASE("input errors name the offending field") {
  json j = wishart_json();
  j["version"] = 2;
  CHECK(error_of(j).rfind("$.version", 0) == 0);

  j = wishart_json();
  j["alpha"] = json::parse("[[1, 0.5], [0, 1]]");
  CHECK(error_of(j).rfind("$.alpha", 0) == 0);

  j = wishart_json();
  j["b"] = json::parse("[[1, 0, 0], [0, 1, 0], [0, 0, 1]]");
  CHECK(error_of(j).rfind("$.b", 0) == 0);

  j = wishart_json();
  j["drift"]["type"] = "affine";
  CHECK(error_of(j).rfind("$.drift.type", 0) == 0);

  j = wishart_json();
  j["m"]["atoms"].push_back({{"xi", "oops"}, {"weight", 1.0}});
  CHECK(error_of(j).rfind("$.m.atoms[1].xi", 0) == 0);

  j = wishart_json();
  j["mu"]["atoms"][0].erase("weightMatrix");
  CHECK(error_of(j).rfind("$.mu.atoms[0].weightMatrix", 0) == 0);

  j = wishart_json();
  j["alpha"][0][0] = "x";
  CHECK(error_of(j).rfind("$.alpha", 0) == 0);

  j = wishart_json();
  j.erase("d");
  CHECK(error_of(j).rfind("$.d", 0) == 0);
}

TEST_CASE("u grids and states are validated") {
  const UGrid g = ugrid_from_json(json::parse(R"({"u": [{"re": [[1,0],[0,1]]}, {"re": [[0,0],[0,0]], "im": [[1,2],[2,1]]}],
                                                  "times": [0, 0.5, 1]})"));
  REQUIRE(g.u.size() == 2);
  CHECK(g.u[0].im().norm() == 0.0);
  CHECK(g.u[1].im()(0, 1) == 2.0);
  CHECK(g.times.size() == 3);

  auto fails = [](const char* text, const char* prefix) {
    try {
      ugrid_from_json(json::parse(text));
    } catch (const InputError& e) {
      return std::string(e.what()).rfind(prefix, 0) == 0;
    }
    return false;
  };
  CHECK(fails(R"({"u": [{"re": [[-1,0],[0,1]]}], "times": [1]})", "$.u[0].re"));
  CHECK(fails(R"({"u": [], "times": [1, 0.5]})", "$.times"));
  CHECK(fails(R"({"u": [], "times": [-1]})", "$.times"));
  CHECK(fails(R"({"u": [{"re": [[1,0],[0,1]], "im": [[0,1],[2,0]]}], "times": [1]})", "$.u[0].im"));

  CHECK((state_from_json(json::parse("[[2, 1], [1, 2]]")) - SymMatrix::symmetrize(MatrixXd{{2, 1}, {1, 2}})).norm() == 0.0);
  CHECK(state_from_json(json::parse(R"({"x": [[1]]})"))(0, 0) == 1.0);
  CHECK_THROWS_AS(state_from_json(json::parse("[[1, 2], [2, 1]]")), InputError);
}

TEST_CASE("read_json_file reports unreadable and malformed files") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/params.json"), InputError);
  const auto path = std::filesystem::temp_directory_path() / "psdaffine_io_malformed.json";
  {
    std::ofstream f(path);
    f << "{\"version\": 1,";
  }
  CHECK_THROWS_AS(read_json_file(path.string()), InputError);
  std::filesystem::remove(path);
}
