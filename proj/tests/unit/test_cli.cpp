#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <omp.h>

#include <hlx/hopflax.hpp>
#include <hlx_app/commands.hpp>
#include <hlx_app/config.hpp>

#include "support.hpp"

using namespace hlx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Workdir {
 public:
  Workdir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("hlx-cli-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~Workdir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  fs::path config(const json& j, const std::string& name = "config.json") const {
    const fs::path p = path_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

 private:
  fs::path path_;
};

json benchmark_config() {
  return json::parse(R"({
    "domain": {"lower": -12.566370614359172, "upper": 12.566370614359172, "h": 0.01},
    "cost": {"kind": "quadratic", "kappa": 0.5},
    "kernel": {"kind": "gaussian", "drift": 0.0, "sigma2": 1.0},
    "datum": {"name": "cos"},
    "t": 1.0,
    "n": [1, 2, 4],
    "order": "both",
    "seed": 3,
    "output": "out",
    "numerics": {"mc_paths": 2000, "mc_points": 2}
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GridFunction load_grid(const fs::path& p) {
  std::ifstream in(p);
  return read_csv(in);
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

template <class Cmd>
Result run(Cmd cmd, const fs::path& config, app::CommandOptions opts = {}) {
  std::ostringstream out, err;
  const int code = cmd(config, opts, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("config validation names the field") {
  Workdir w;
  auto expect = [&](json j, const std::string& field) {
    const Result r = run(app::cmd_iterate, w.config(j));
    CHECK(r.code == app::kExitConfig);
    CHECK(r.err.find(field) != std::string::npos);
  };
  json j = benchmark_config();
  j.erase("cost");
  expect(j, "cost");
  j = benchmark_config();
  j["datum"]["name"] = "sawtooth";
  expect(j, "datum.name");
  j = benchmark_config();
  j["n"] = json::array({4, 2});
  expect(j, "n");
  j = benchmark_config();
  j["n"] = json::array();
  expect(j, "n");
  j = benchmark_config();
  j["kernel"]["kind"] = "levy";
  expect(j, "kernel.kind");
  j = benchmark_config();
  j["cost"]["kappa"] = -1;
  expect(j, "cost");
  j = benchmark_config();
  j["order"] = "K";
  expect(j, "order");
  j = benchmark_config();
  j["domain"]["h"] = 0;
  expect(j, "domain.h");

  std::ofstream(w.path() / "broken.json") << "{ not json";
  const Result r = run(app::cmd_iterate, w.path() / "broken.json");
  CHECK(r.code == app::kExitConfig);
  CHECK(run(app::cmd_iterate, w.path() / "missing.json").code == app::kExitConfig);
}

TEST_CASE("iterate writes the documented files") {
  Workdir w;
  const Result r = run(app::cmd_iterate, w.config(benchmark_config()));
  REQUIRE(r.code == 0);
  const fs::path out = w.path() / "out";
  for (int n : {1, 2, 4}) {
    for (const char* o : {"I", "J"}) {
      CHECK(fs::exists(out / ("iterate_" + std::string(o) + "_n" + std::to_string(n) + ".csv")));
      CHECK(fs::exists(out / ("steps_" + std::string(o) + "_n" + std::to_string(n) + ".csv")));
    }
  }
  std::istringstream conv(slurp(out / "convergence.csv"));
  std::string line;
  std::getline(conv, line);
  CHECK(line == "n,sup_J,inf_I,measured_gap,gap_bound");
  const double tol = 4 * 0.01;
  int rows = 0;
  while (std::getline(conv, line)) {
    ++rows;
    std::vector<double> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(std::stod(c));
    REQUIRE(cells.size() == 5u);
    CHECK(cells[3] >= -2 * tol);
    CHECK(cells[3] <= cells[4] + 2 * tol);
  }
  CHECK(rows == 3);

  const json s = json::parse(slurp(out / "summary.json"));
  for (const char* key : {"t", "n", "order", "measured_gap", "gap_bound", "guarantee_n", "oracle"}) CHECK(s.contains(key));
  CHECK(s["oracle"]["hopf_cole_value"].get<double>() == doctest::Approx(0.6876).epsilon(1e-3));
  CHECK(s["oracle"]["excursion_fraction"].get<double>() == 0.0);
  CHECK(s["gap_bound"].get<double>() == doctest::Approx(0.125).epsilon(1e-3));
  for (const auto& e : fs::directory_iterator(out)) CHECK(e.path().extension() != ".tmp");

  const auto i4 = load_grid(out / "iterate_I_n4.csv");
  CHECK(i4.domain() == GridDomain::from_spacing(std::vector<double>{-4 * test::kPi}, std::vector<double>{4 * test::kPi}, 0.01));
}

TEST_CASE("dirac kernel iterates agree with the Hopf-Lax operator") {
  Workdir w;
  json j = benchmark_config();
  j["kernel"] = {{"kind", "dirac"}};
  j["n"] = json::array({1, 4});
  j["order"] = "I";
  REQUIRE(run(app::cmd_iterate, w.config(j)).code == 0);
  const auto f = test::cosine(test::line(-4 * test::kPi, 4 * test::kPi, 0.01));
  const auto phi = apply_hopf_lax(f, make_hopf_lax_step(CostFunction::quadratic(0.5), 1.0, f));
  for (int n : {1, 4}) {
    const auto g = load_grid(w.path() / "out" / ("iterate_n" + std::to_string(n) + ".csv"));
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (phi.is_trusted(i)) worst = std::max(worst, std::abs(g[i] - phi[i]));
    }
    CHECK(worst <= 4 * 0.01 * lipschitz_estimate(f));
  }
}

TEST_CASE("domain too small exits with 3") {
  Workdir w;
  json j = benchmark_config();
  j["domain"] = {{"lower", -6.0}, {"upper", 6.0}, {"h", 0.05}};
  j["t"] = 4.0;
  const Result r = run(app::cmd_iterate, w.config(j));
  CHECK(r.code == app::kExitDomain);
  CHECK(r.err.find("domain too small") != std::string::npos);
}

TEST_CASE("outputs are identical across runs and thread counts") {
  Workdir w;
  json j = benchmark_config();
  const fs::path cfg = w.config(j);
  app::CommandOptions a;
  a.out = w.path() / "a";
  app::CommandOptions b;
  b.out = w.path() / "b";
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  REQUIRE(run(app::cmd_iterate, cfg, a).code == 0);
  omp_set_num_threads(3);
  REQUIRE(run(app::cmd_iterate, cfg, b).code == 0);
  omp_set_num_threads(saved);
  for (const auto& e : fs::directory_iterator(w.path() / "a")) {
    CHECK(slurp(e.path()) == slurp(w.path() / "b" / e.path().filename()));
  }
}

TEST_CASE("verify on the benchmark passes, also in infimal mode") {
  Workdir w;
  json j = benchmark_config();
  j["eps"] = 1.0;
  const fs::path cfg = w.config(j);
  const Result r = run(app::cmd_verify, cfg);
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  const json v = json::parse(slurp(w.path() / "out" / "verify.json"));
  CHECK(v["passed"].get<bool>());

  app::CommandOptions inf;
  inf.infimal = true;
  const Result ri = run(app::cmd_verify, cfg, inf);
  CHECK(ri.code == 0);
  CHECK(ri.out.find("PASS  sandwich_n4") != std::string::npos);
}

TEST_CASE("verify reports a grid too coarse for small eps") {
  Workdir w;
  json j = benchmark_config();
  j["domain"]["h"] = 0.5;
  j["eps"] = 0.25;
  j["numerics"]["mc_paths"] = 0;
  const Result r = run(app::cmd_verify, w.config(j));
  CHECK(r.code == app::kExitFailure);
  CHECK(r.out.find("grid too coarse") != std::string::npos);
}

TEST_CASE("guarantee") {
  Workdir w;
  json j = benchmark_config();
  const fs::path cfg = w.config(j);
  CHECK(run(app::cmd_guarantee, cfg).code == app::kExitConfig);

  app::CommandOptions opts;
  opts.eps = 1.0;
  Result r = run(app::cmd_guarantee, cfg, opts);
  CHECK(r.code == 0);
  CHECK(r.out.find("guarantee_n 2\n") != std::string::npos);

  opts.eps = 0.25;
  r = run(app::cmd_guarantee, cfg, opts);
  CHECK(r.code == 0);
  const json g = json::parse(slurp(w.path() / "out" / "guarantee.json"));
  CHECK(g["guarantee_n"].get<int>() > 2);
  CHECK(g["measured_gap"].get<double>() <= 0.25 + 2 * g["tolerance"].get<double>());

  j["datum"]["name"] = "constant";
  opts.eps = 0.1;
  r = run(app::cmd_guarantee, w.config(j, "constant.json"), opts);
  CHECK(r.code == 0);
  CHECK(r.out.find("guarantee_n 1\n") != std::string::npos);
  const json c = json::parse(slurp(w.path() / "out" / "guarantee.json"));
  CHECK(c["measured_gap"].get<double>() == 0.0);
}

TEST_CASE("csv datum round trip") {
  Workdir w;
  const auto d = test::line(-10.0, 10.0, 0.05);
  const auto f = GridFunction::sample(d, app::catalog_formula("bump", 1));
  {
    std::ofstream out(w.path() / "bump.csv");
    write_csv(f, out);
  }
  json j = benchmark_config();
  j.erase("domain");
  j["datum"] = {{"name", "csv"}, {"path", "bump.csv"}};
  j["numerics"]["mc_paths"] = 0;
  const app::RunConfig cfg = app::load_config(w.config(j));
  const auto g = app::build_datum(cfg);
  REQUIRE(g.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);
  CHECK(run(app::cmd_iterate, w.path() / "config.json").code == 0);
}

TEST_CASE("catalog") {
  for (const auto& name : app::datum_catalog()) {
    for (int dim : {1, 2}) {
      const auto fn = app::catalog_formula(name, dim);
      CHECK(std::isfinite(fn({0.3, -0.2})));
    }
  }
  CHECK(app::catalog_formula("ramp-clamp", 1)({5.0, 0.0}) == 1.0);
  CHECK(app::catalog_formula("bump", 1)({0.0, 0.0}) == 1.0);
  CHECK_THROWS_AS(app::catalog_formula("nope", 1), app::ConfigError);
}
