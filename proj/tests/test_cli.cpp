#include "ncps/acceptance.hpp"
#include "ncps/conditions.hpp"
#include "ncps/commands.hpp"
#include "ncps/config.hpp"
#include "ncps/output.hpp"

#include "doctest.h"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace ncps;

namespace {

const char* kDyson = R"(system = dyson
gamma = 1
p = 3
x0 = zero
T = 1
dt = 1e-3
seed = 7
)";

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("ncps_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
    return (dir / name).string();
  }
};

bool error_names(const ConfigError& e, const std::string& key) {
  for (const auto& m : e.errors())
    if (m.rfind(key + ":", 0) == 0) return true;
  return false;
}

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool rejects(const std::string& text, const std::string& key) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return error_names(e, key);
  }
  return false;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("minimal Dyson config") {
    const RunConfig c = parse_config(kDyson);
    CHECK(c.system == "dyson");
    CHECK(c.p == 3);
    CHECK(c.seed == 7);
    CHECK_FALSE(c.seed_defaulted);
    CHECK(c.ctl.dt_base == 1e-3);
    CHECK(c.ctl.scheme == Scheme::Hybrid);
    CHECK(initial_state(c).coords().isZero());
    CHECK(std::get<DysonCepa>(*c.preset).gamma == 1.0);
  }

  TEST_CASE("config errors") {
    CHECK(rejects("system = jacobi\nq = 3\nr = 3\nbeta = 1\np = 2\nx0 = (-0.1, 0.5)\nT = 1\n", "x0"));
    CHECK(rejects(std::string(kDyson) + "n_paths = 0\n", "n_paths"));
    CHECK(rejects(std::string(kDyson) + "colour = red\n", "colour"));
    CHECK(rejects(std::string(kDyson) + "alpha = 3\n", "alpha"));
    CHECK(rejects(std::string(kDyson) + "seed = 8\n", "seed"));
    CHECK(rejects("system = dyson\ngamma = 1\np = 3\nx0 = (0, 1)\nT = 1\n", "x0"));
    CHECK(rejects("system = dyson\ngamma = 1\np = 3\nx0 = (2, 1, 0)\nT = 1\n", "x0"));
    CHECK(rejects("system = dyson\ngamma = x\np = 3\nx0 = zero\nT = 1\n", "gamma"));
    CHECK(rejects("system = dyson\ngamma = 1\np = 3\nx0 = zero\nT = 1\ndt = 0\n", "dt"));
    CHECK(rejects("system = dyson\ngamma = 1\np = 3\nx0 = zero\nT = 1\nscheme = rk4\n", "scheme"));
    CHECK(rejects("gamma = 1\np = 3\nx0 = zero\nT = 1\n", "system"));
    CHECK(rejects("system = beta_wishart\nalpha = 3\nbeta = 1\np = 2\nx0 = (-1, 2)\nT = 1\n", "x0"));
    // Every offending key is listed.
    CHECK(errors_of("system = dyson\ngamma = 1\np = 3\nx0 = zero\nT = -1\nn_paths = 0\n").size() == 2);
  }

  TEST_CASE("defaulted seed is recorded in the echo") {
    const RunConfig c = parse_config("system = dyson\ngamma = 1\np = 3\nx0 = zero\nT = 1\n");
    CHECK(c.seed_defaulted);
    CHECK(c.seed == kDefaultSeed);
    CHECK(echo(c).find("seed = 1\n") != std::string::npos);
  }

  TEST_CASE("echo round trip for every system") {
    const std::vector<std::string> configs = {
        kDyson,
        "system = nearest_neighbor\ngamma = 0.75\np = 3\nx0 = equispaced(-1, 1)\nT = 2\n",
        "system = beta_wishart\nalpha = 3\nbeta = 1\np = 3\nx0 = zero\nT = 1\nscheme = poly\n",
        "system = beta_wishart_abs\nalpha = 2.5\nbeta = 1\np = 2\nx0 = (-1, 1)\nT = 1\n",
        "system = jacobi\nq = 3\nr = 4\nbeta = 1\np = 2\nx0 = (0.25, 0.75)\nT = 1\nformat = json\n",
        "system = hyperbolic\ngamma = 0.8\np = 3\nx0 = zero\nT = 0.5\nhybrid_switch_gap = 0.1\n",
        "system = general_psi\npsi = coth(u)\ngamma = 1\np = 2\nx0 = (0, 1)\nT = 1\n",
        "system = custom\nsigma = 1\nb = -x\nH = 0.5 + 0*x*y\ndomain = real\np = 2\nx0 = (0, 0.1)\n"
        "T = 1\nadaptive = true\nsample_every = 3\nmax_refinement_depth = 12\ngap_floor = 1e-8\n"};
    for (const std::string& text : configs) {
      const RunConfig c = parse_config(text);
      const std::string e = echo(c);
      CHECK_MESSAGE(echo(parse_config(e)) == e, text);
      CHECK(e.find("output") == std::string::npos);
    }
  }

  TEST_CASE("echo is embedded in outputs and recoverable") {
    const RunConfig c = parse_config(kDyson);
    std::ostringstream csv;
    TrajectoryCsv(csv, echo(c), 3).row(0.0, ChamberPoint(Eigen::Vector3d(0, 1, 3)));
    const std::string s = csv.str();
    CHECK(s.find("t,x1,x2,x3,minGap,VN\n") != std::string::npos);
    CHECK(s.find("\n0,0,1,3,1,36\n") != std::string::npos);
    CHECK(extract_echo(s) == echo(c));

    std::ostringstream one;
    TrajectoryCsv(one, "", 1).row(0.5, ChamberPoint(VectorXd::Constant(1, 0.1)));
    CHECK(one.str() == "t,x1,minGap,VN\n0.5,0.10000000000000001,inf,1\n");

    RunConfig small = c;
    small.n_paths = 4;
    small.T = 0.01;
    const std::string json = ensemble_output(small, 1);
    CHECK(extract_echo(json) == echo(small));
    const auto j = nlohmann::json::parse(json);
    CHECK(j["n_paths"] == 4);
    CHECK(j["p"] == 3);
    CHECK(j["x"].size() == 3);
    CHECK(format_double(0.1) == "0.10000000000000001");
  }

  TEST_CASE("check exit codes") {
    TempDir tmp;
    std::ostringstream out, log;
    CommandOptions o;
    o.config_path = tmp.write("ok.cfg", kDyson);
    CHECK(cmd_check(o, out, log) == 0);
    CHECK(nlohmann::json::parse(out.str())["overall"] == "pass");

    std::ostringstream out2;
    o.config_path = tmp.write("bad.cfg", "system = dyson\ngamma = 0.4\np = 3\nx0 = zero\nT = 1\n");
    CHECK(cmd_check(o, out2, log) == 1);
    const auto j = nlohmann::json::parse(out2.str());
    CHECK(j["conditions"]["A2"]["verdict"] == "fail");
    CHECK(!j["conditions"]["A2"]["witnesses"].empty());

    std::ostringstream out3;
    o.config_path = tmp.write("nn.cfg", "system = nearest_neighbor\ngamma = 2\np = 5\nx0 = zero\nT = 1\n");
    CHECK(cmd_check(o, out3, log) == 2);

    std::ostringstream out4;
    o.config_path = tmp.write("custom.cfg",
                              "system = custom\nsigma = sqrt(|x|)\nb = 0\nH = |x| + |y|\ndomain = real\np = 3\nx0 = zero\n"
                              "T = 1\n");
    CHECK(cmd_check(o, out4, log) == 2);
    CHECK(nlohmann::json::parse(out4.str())["conditions"]["A4"]["verdict"] == "unknown");

    o.config_path = (tmp.dir / "missing.cfg").string();
    CHECK(cmd_check(o, out, log) == exit_codes::kIoError);
    o.config_path = tmp.write("broken.cfg", "system = dyson\n");
    CHECK(cmd_check(o, out, log) == exit_codes::kConfigError);
  }

  TEST_CASE("run writes byte-identical CSV twice") {
    TempDir tmp;
    std::ostringstream out, log;
    CommandOptions o;
    o.config_path = tmp.write("run.cfg", std::string(kDyson) + "T = 0.2\n" + "sample_every = 10\n");
    CHECK(cmd_run(o, out, log) == exit_codes::kConfigError);  // T given twice

    o.config_path = tmp.write("run.cfg", "system = dyson\ngamma = 1\np = 3\nx0 = zero\nT = 0.2\nseed = 7\n");
    o.out = (tmp.dir / "a.csv").string();
    CHECK(cmd_run(o, out, log) == 0);
    o.out = (tmp.dir / "b.csv").string();
    CHECK(cmd_run(o, out, log) == 0);
    const std::string a = slurp(tmp.dir / "a.csv");
    CHECK(a == slurp(tmp.dir / "b.csv"));
    CHECK(std::count(a.begin(), a.end(), '\n') > 200);

    // Re-running from the embedded echo reproduces the file.
    o.config_path = tmp.write("echo.cfg", extract_echo(a));
    o.out = (tmp.dir / "c.csv").string();
    CHECK(cmd_run(o, out, log) == 0);
    CHECK(slurp(tmp.dir / "c.csv") == a);

    // A seed override changes the path.
    o.seed = 8;
    o.out = (tmp.dir / "d.csv").string();
    CHECK(cmd_run(o, out, log) == 0);
    CHECK(slurp(tmp.dir / "d.csv") != a);

    // JSON trajectories carry the same path.
    o.seed.reset();
    o.config_path = tmp.write("json.cfg", extract_echo(a) + "format = json\n");
    o.out = (tmp.dir / "a.json").string();
    CHECK(cmd_run(o, out, log) == 0);
    const std::string js = slurp(tmp.dir / "a.json");
    CHECK(extract_echo(js) == extract_echo(a) + "format = json\n");
    const auto j = nlohmann::json::parse(js);
    const std::string ech = extract_echo(a);
    // Re-running from the JSON's own echo reproduces it.
    o.config_path = tmp.write("json2.cfg", extract_echo(js));
    o.out = (tmp.dir / "b.json").string();
    CHECK(cmd_run(o, out, log) == 0);
    CHECK(slurp(tmp.dir / "b.json") == js);
    const auto lines = [](const std::string& t) { return static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n')); };
    CHECK(j["t"].size() == lines(a) - lines(ech) - 1);
    const std::string last = a.substr(a.rfind('\n', a.size() - 2) + 1);
    CHECK(last.rfind(format_double(j["t"].back().get<double>()) + "," +
                         format_double(j["x"].back()[0].get<double>()) + ",", 0) == 0);
    o.config_path = tmp.write("ens.cfg", extract_echo(a) + "format = csv\n");
    CHECK(cmd_ensemble(o, out, log) == exit_codes::kConfigError);

    o.out = (tmp.dir / "no" / "such" / "dir.csv").string();
    CHECK(cmd_run(o, out, log) == exit_codes::kIoError);
  }

  TEST_CASE("ensemble output does not depend on workers") {
    TempDir tmp;
    std::ostringstream a, b, log;
    CommandOptions o;
    o.config_path =
        tmp.write("e.cfg", "system = beta_wishart\nalpha = 3\nbeta = 1\np = 3\nx0 = zero\nT = 0.1\nn_paths = 40\n");
    o.workers = 1;
    CHECK(cmd_ensemble(o, a, log) == 0);
    o.workers = 3;
    CHECK(cmd_ensemble(o, b, log) == 0);
    CHECK(a.str() == b.str());
    CHECK(log.str().find("no seed given") != std::string::npos);
  }

  TEST_CASE("shipped example configs") {
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(NCPS_CONFIG_DIR)) {
      if (entry.path().extension() != ".cfg") continue;
      ++n;
      const RunConfig c = parse_config(slurp(entry.path()));
      CHECK_MESSAGE(check_preset(build_system(c)).overall == Verdict::Pass, entry.path().string());
      CHECK(c.n_paths > 1);
    }
    CHECK(n == 8);
  }

  TEST_CASE("validate enumerates every criterion once") {
    AcceptanceOptions ao;
    ao.only = {1, 2};
    const Scorecard s = run_acceptance(ao);
    REQUIRE(s.criteria.size() == 2);
    CHECK(s.pass());
    const auto j = nlohmann::json::parse(scorecard_json(s));
    std::set<int> ids;
    for (const auto& c : j["criteria"]) ids.insert(c["id"].get<int>());
    CHECK(ids == std::set<int>{1, 2});
    for (const auto& c : j["criteria"])
      for (const char* k : {"observed", "expected", "tolerance", "pass", "runtime_s"}) CHECK(c.contains(k));
    CHECK(kCriterionCount == 10);
  }
}
