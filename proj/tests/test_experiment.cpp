#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "devlab/experiment.hpp"

using namespace devlab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string output;
};

Run run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + DEVLAB_CLI_PATH + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t k = std::fread(buf, 1, sizeof buf, p)) out.append(buf, k);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Scratch {
public:
  Scratch() : dir_(fs::temp_directory_path() / ("devlab_test_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return dir_ / name;
  }
  fs::path path(const std::string& name) const { return dir_ / name; }

private:
  fs::path dir_;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(split(line));
  return rows;
}

}  // namespace

TEST(Cli, ListHasTwelveExperiments) {
  const auto r = run_cli("list");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.output.begin(), r.output.end(), '\n'), 12);
  EXPECT_NE(r.output.find("ncmd_sum_max \xE2\x86\x92 "), std::string::npos);
  EXPECT_NE(r.output.find("minima_md \xE2\x86\x92 "), std::string::npos);
  EXPECT_EQ(experiment_table().size(), 12u);
}

TEST(Cli, WeibullExampleExitsZero) {
  Scratch s;
  const auto cfg = s.write("w.json",
                           R"({"experiment":"weibull_limit","distribution":{"family":"uniform01"},"n_grid":[100,1000,10000]})");
  const auto r = run_cli(cfg.string() + " --out " + s.path("w").string(), "");
  const auto r2 = run_cli("run " + cfg.string() + " --out " + s.path("w").string());
  EXPECT_EQ(r.code, 2);  // no subcommand
  ASSERT_EQ(r2.code, 0) << r2.output;
  const auto rows = read_csv(s.path("w") / "results.csv");
  ASSERT_GT(rows.size(), 1u);
  EXPECT_EQ(rows[0], split("n,speed,estimate,ci_low,ci_high,predicted,method,hits,probe"));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][6], "exact");
  const auto summary = nlohmann::json::parse(slurp(s.path("w") / "summary.json"));
  EXPECT_EQ(summary["experiment"], "weibull_limit");
  EXPECT_EQ(summary["pass"], true);
  EXPECT_TRUE(summary.contains("wall_time_seconds"));
  EXPECT_TRUE(summary["criteria"].is_array());
}

TEST(Cli, EmptyGridIsAConfigError) {
  Scratch s;
  const auto cfg = s.write("e.json", "{\n  \"experiment\": \"weibull_limit\",\n  \"distribution\": {\"family\": \"uniform01\"},\n"
                                     "  \"n_grid\": []\n}\n");
  const auto r = run_cli("run " + cfg.string() + " --out " + s.path("e").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("line 4"), std::string::npos) << r.output;
}

TEST(Cli, RegimeMismatchExitsThree) {
  Scratch s;
  const auto cfg = s.write(
      "d.json", R"({"experiment":"derivative_identities","distribution":{"family":"stretched_tail","alpha":2}})");
  const auto r = run_cli("run " + cfg.string() + " --out " + s.path("d").string());
  EXPECT_EQ(r.code, 3) << r.output;
}

TEST(Cli, OtherConfigErrors) {
  Scratch s;
  const auto missing = run_cli("run " + s.path("nope.json").string());
  EXPECT_EQ(missing.code, 2);
  const auto bad = s.write("b.json", "{\n \"experiment\": \"weibull_limit\",\n \"n_grid\": [1, 2,,]\n}");
  const auto r = run_cli("run " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("line 3"), std::string::npos) << r.output;
  const auto few = s.write("f.json", R"({"experiment":"minima_clt","n_grid":[100],"reps":50})");
  EXPECT_EQ(run_cli("run " + few.string() + " --out " + s.path("f").string()).code, 2);
}

TEST(Config, ParsesAndValidates) {
  const auto c = parse_config(R"({"experiment":"ncmd_sum_max","distribution":{"family":"neg_exp"},
    "n_grid":[10,100],"reps":2000,"seed":18446744073709551615,"scaling":{"beta":0.5},
    "tolerances":{"abs_gap":0.1},"output_dir":"x"})");
  EXPECT_EQ(c.experiment, "ncmd_sum_max");
  ASSERT_TRUE(c.distribution.has_value());
  EXPECT_EQ(c.distribution->name(), "neg_exp");
  EXPECT_EQ(c.n_grid, (std::vector<std::int64_t>{10, 100}));
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.beta, 0.5);
  EXPECT_EQ(c.tolerance("abs_gap", 9.0), 0.1);
  EXPECT_EQ(c.tolerance("other", 9.0), 9.0);
  EXPECT_EQ(c.output_dir, "x");

  auto line_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("{\n\"experiment\":\"weibull_limit\",\n\"n_grid\":[10,10]}"), 3);
  EXPECT_EQ(line_of("{\n\"experiment\":\"weibull_limit\",\n\"scaling\":\n{\"beta\":1.0}}"), 4);
  EXPECT_EQ(line_of("{\n\"experiment\":\"nope\"}"), 2);
  EXPECT_EQ(line_of("{\"experiment\":\"weibull_limit\",\n\"distribution\":{\"family\":\"cauchy\"}}"), 2);
  EXPECT_EQ(line_of("{\"n_grid\":[1]}"), 1);

  ExperimentConfig mc = parse_config(R"({"experiment":"two_speed","reps":999})");
  EXPECT_THROW(validate_config(mc), ConfigError);
  mc.reps = 1000;
  EXPECT_NO_THROW(validate_config(mc));
  const ExperimentConfig exact = parse_config(R"({"experiment":"weibull_limit","reps":5})");
  EXPECT_NO_THROW(validate_config(exact));
}

TEST(Csv, Formatting) {
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(INFINITY), "inf");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_short(0.1), "0.1");
  for (double v : {1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)})
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);

  CsvRow censored;
  censored.n = 10;
  censored.speed = "log n";
  censored.estimate = ExtReal::neg_inf();
  censored.ci_low = ExtReal::neg_inf();
  censored.ci_high = ExtReal(-1.5);
  censored.predicted = ExtReal::neg_inf();
  censored.method = Method::monte_carlo;
  censored.hits = 0;
  censored.probe = "-Delta(1)[R=0.1]";
  censored.censored = true;
  EXPECT_EQ(render_csv({censored}), csv_header() + "10,log n,,-inf,-1.5,-inf,monte-carlo,0,-Delta(1)[R=0.1]\n");
  EXPECT_EQ(csv_quote("a,b"), "\"a,b\"");
  EXPECT_EQ(detail::probe_name("I_X", {2.25}), "-I_X(2.25)");
  EXPECT_EQ(detail::probe_name("I_joint", {-1.0, 0.0}, false), "I_joint(-1;0)");
}

TEST(Cli, ByteIdenticalAcrossRunsAndWorkers) {
  Scratch s;
  const std::string cfg = std::string(DEVLAB_CONFIG_DIR) + "/ldp_sum_max.json";
  std::vector<std::string> outputs;
  int k = 0;
  for (const char* env : {"", "", "DEVLAB_THREADS=1", "DEVLAB_THREADS=4"}) {
    const auto dir = s.path("det" + std::to_string(k++));
    const auto r = run_cli("run " + cfg + " --out " + dir.string(), env);
    ASSERT_EQ(r.code, 0) << r.output;
    outputs.push_back(slurp(dir / "results.csv"));
  }
  for (const auto& o : outputs) EXPECT_EQ(o, outputs[0]);
  const auto other = run_cli("run " + cfg + " --seed 99 --out " + s.path("seed99").string());
  EXPECT_EQ(other.code, 0);
  EXPECT_NE(slurp(s.path("seed99") / "results.csv"), outputs[0]);
}

TEST(Cli, Reps) {
  Scratch s;
  const std::string cfg = std::string(DEVLAB_CONFIG_DIR) + "/ldp_sum_max.json";
  ASSERT_EQ(run_cli("run " + cfg + " --reps 2000 --out " + s.path("r").string()).code, 0);
  const auto rows = read_csv(s.path("r") / "results.csv");
  bool saw_mc = false;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i][6] == "monte-carlo") {
      saw_mc = true;
      EXPECT_LE(std::stoul(rows[i][7]), 2000u);
    }
  EXPECT_TRUE(saw_mc);
  EXPECT_EQ(nlohmann::json::parse(slurp(s.path("r") / "summary.json"))["reps"], 2000);
}

// Reads results.csv back and recomputes every finite `predicted` from the
// rate catalog at the probe point named in the row.
TEST(Cli, PredictedColumnMatchesCatalog) {
  Scratch s;
  const std::regex probe_re(R"(^-([A-Za-z_]+)\(([^)]*)\)(\[.*\])?$)");
  int checked = 0;
  for (const char* name : {"ldp_sum_max", "ncmd_sum_max", "scaled_max_ldp", "minima_ldp", "two_speed"}) {
    const std::string path = std::string(DEVLAB_CONFIG_DIR) + "/" + name + ".json";
    const auto cfg = parse_config(slurp(path));
    const auto r = run_cli("run " + path + " --out " + s.path(name).string());
    ASSERT_LE(r.code, 1) << r.output;
    rates::RateParams params;
    params.model = cfg.distribution;
    if (cfg.distribution) {
      params.r0 = cfg.distribution->mean();
      if (auto a = cfg.distribution->tail_index()) params.alpha = *a;
    }
    if (cfg.params.contains("lambda")) params.lambda = cfg.params["lambda"].get<double>();
    const auto rows = read_csv(s.path(name) / "results.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      std::smatch m;
      const std::string probe = rows[i][8];
      ASSERT_TRUE(std::regex_match(probe, m, probe_re)) << probe;
      const double predicted = std::strtod(rows[i][5].c_str(), nullptr);
      std::vector<double> args;
      std::stringstream ss(m[2].str());
      std::string a;
      while (std::getline(ss, a, ';')) args.push_back(std::strtod(a.c_str(), nullptr));
      const ExtReal want = -eval_rate(rates::make_rate(m[1].str(), params), args);
      if (std::isfinite(predicted)) {
        EXPECT_EQ(predicted, want.value()) << name << " " << probe;
        ++checked;
      } else {
        EXPECT_TRUE(want.is_neg_inf()) << name << " " << probe;
      }
    }
  }
  EXPECT_GT(checked, 10);
}
