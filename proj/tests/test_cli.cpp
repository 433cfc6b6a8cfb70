#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "signoise/cli.hpp"
#include "signoise/eval_store.hpp"
#include "signoise/io.hpp"
#include "signoise/stat_kernels.hpp"

using namespace signoise;
namespace fs = std::filesystem;

namespace {

const std::string kData = SIGNOISE_TEST_DATA;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> store_args(std::vector<std::string> extra) {
  std::vector<std::string> args{"--models", kData + "/models.csv", "--input",
                                kData + "/measurements.csv"};
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("signoise_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, SnrMatchesGolden) {
  std::ifstream golden(kData + "/snr_golden.csv");
  std::stringstream buf;
  buf << golden.rdbuf();
  const auto want = parse_csv(buf.str());
  ASSERT_EQ(want.size(), 3u);
  for (std::size_t row = 1; row < want.size(); ++row) {
    auto args = store_args({"--population", "*-large", "--benchmark", want[row][0], "--metric",
                            want[row][1]});
    args.insert(args.begin(), "snr");
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto got = parse_csv(r.out);
    ASSERT_EQ(got.size(), 2u);
    EXPECT_EQ(got[0], want[0]);
    EXPECT_EQ(got[1][0], want[row][0]);
    EXPECT_EQ(got[1][1], want[row][1]);
    for (std::size_t c = 2; c < want[0].size(); ++c) {
      const double g = std::stod(got[1][c]), w = std::stod(want[row][c]);
      EXPECT_NEAR(g, w, 1e-12 * std::fabs(w)) << want[0][c];
    }
  }
}

TEST(Cli, JsonlInputGivesSameOutput) {
  auto a = store_args({"--population", "*-large", "--benchmark", "qa,mix"});
  a.insert(a.begin(), "snr");
  auto b = a;
  b[4] = kData + "/measurements.jsonl";
  const auto ra = run(a), rb = run(b);
  ASSERT_EQ(ra.code, 0) << ra.err;
  EXPECT_EQ(ra.out, rb.out);
}

TEST(Cli, MissingFileNamesPath) {
  const auto r = run({"snr", "--models", kData + "/nope.csv", "--input", kData + "/measurements.csv",
                      "--benchmark", "qa"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nope.csv"), std::string::npos);
}

TEST(Cli, HelpAndUsageErrors) {
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  for (const char* cmd : {"snr", "noise", "signal", "decision-acc", "scaling-fit", "scaling-predict",
                          "filter-subtasks", "average", "ema", "early-stop", "min-n",
                          "within-tolerance", "resample", "subsample", "metric-compare", "synth",
                          "correlate"})
    EXPECT_NE(help.out.find(cmd), std::string::npos) << cmd;
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"min-n", "--bogus"}).code, 2);
  EXPECT_EQ(run({"min-n", "--k", "abc"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"snr", "--models", kData + "/models.csv"}).code, 2);
}

TEST(Cli, MinNTable) {
  const auto r = run({"min-n", "--k", "1,0.5", "--alpha", "0.95"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].back(), "2");
  EXPECT_EQ(rows[2].back(), "9");
}

TEST(Cli, ConfigFile) {
  const auto dir = temp_dir("config");
  {
    std::ofstream(dir / "bad.cfg") << "window-n=3\nbogus=1\n";
    std::ofstream(dir / "good.cfg") << "# comment\nwindow-n=3\npopulation=*-large\n";
  }
  auto bad = store_args({"--benchmark", "qa", "--config", (dir / "bad.cfg").string()});
  bad.insert(bad.begin(), "snr");
  EXPECT_EQ(run(bad).code, 2);

  auto cfg = store_args({"--benchmark", "qa", "--config", (dir / "good.cfg").string()});
  cfg.insert(cfg.begin(), "snr");
  auto flags = store_args({"--benchmark", "qa", "--window-n", "3", "--population", "*-large"});
  flags.insert(flags.begin(), "snr");
  const auto rc = run(cfg);
  ASSERT_EQ(rc.code, 0) << rc.err;
  EXPECT_EQ(rc.out, run(flags).out);
  EXPECT_NE(rc.out.find(",3,3"), std::string::npos);

  auto win = cfg;
  win.insert(win.end(), {"--window-n", "4"});
  const auto rw = run(win);
  ASSERT_EQ(rw.code, 0) << rw.err;
  EXPECT_NE(rw.out.find(",4,3"), std::string::npos);
}

TEST(Cli, DeterministicAcrossRunsAndThreads) {
  auto base = store_args({"--small", "*-small", "--large", "*-large", "--benchmark", "qa",
                          "--draws", "50", "--seed", "7"});
  base.insert(base.begin(), "resample");
  auto t1 = base, t8 = base;
  t1.insert(t1.end(), {"--threads", "1"});
  t8.insert(t8.end(), {"--threads", "8"});
  const auto a = run(t1), b = run(t1), c = run(t8);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(parse_csv(a.out).size(), 53u);
}

TEST(Cli, SynthOutputReingests) {
  const auto dir = temp_dir("synth");
  const auto r = run({"synth", "--out", dir.string(), "--seed", "3", "--recipes", "4", "--steps",
                      "10", "--subtasks", "3", "--clean-subtasks", "1", "--instances", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto v = run({"validate", "--models", (dir / "models.csv").string(), "--input",
                      (dir / "measurements.csv").string(), "--instances",
                      (dir / "instances.csv").string()});
  ASSERT_EQ(v.code, 0) << v.err;
  const auto again = run({"synth", "--out", dir.string(), "--seed", "3", "--recipes", "4",
                          "--steps", "10", "--subtasks", "3", "--clean-subtasks", "1",
                          "--instances", "4"});
  EXPECT_EQ(r.out, again.out);
}

TEST(Cli, EmittedTablesReingest) {
  const auto dir = temp_dir("reingest");
  auto args = store_args({"--population", "*-large", "--benchmark", "qa", "--avg-k", "2", "--out",
                          (dir / "avg.csv").string()});
  args.insert(args.begin(), "average");
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "avg.csv");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = parse_csv(buf.str());
  ASSERT_GE(rows.size(), 2u);
  const auto& header = rows[0];
  const auto col = std::find(header.begin(), header.end(), "average");
  ASSERT_NE(col, header.end());
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_TRUE(io::parse_double(rows[i][static_cast<std::size_t>(col - header.begin())]));

  auto json = store_args({"--population", "*-large", "--benchmark", "qa", "--format", "json"});
  json.insert(json.begin(), "snr");
  const auto rj = run(json);
  ASSERT_EQ(rj.code, 0) << rj.err;
  EXPECT_EQ(rj.out.front(), '[');
}

TEST(Cli, CorrelateCollinear) {
  const auto dir = temp_dir("correlate");
  {
    std::ofstream(dir / "x.csv") << "benchmark,snr\na,1\nb,2\nc,4\nd,7\n";
    std::ofstream(dir / "y.csv") << "benchmark,decision_accuracy\nd,15\nb,5\na,3\nc,9\ne,1\n";
  }
  const auto r = run({"correlate", "--input", (dir / "x.csv").string() + "," + (dir / "y.csv").string(),
                      "--x", "snr", "--y", "decision_accuracy", "--x-scale", "linear"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "y", "label"}));
  EXPECT_EQ(rows.back()[2], "summary");
  EXPECT_EQ(rows[4][2], "d");
  EXPECT_NEAR(std::stod(rows.back()[1]), 1.0, 1e-12);
  EXPECT_NEAR(std::stod(rows.back()[0]), 1.0, 1e-12);

  const auto logged = run({"correlate", "--input",
                           (dir / "x.csv").string() + "," + (dir / "y.csv").string(), "--x", "snr",
                           "--y", "decision_accuracy"});
  ASSERT_EQ(logged.code, 0) << logged.err;
  const std::vector<double> lx{0, std::log10(2.0), std::log10(4.0), std::log10(7.0)};
  const std::vector<double> y{3, 5, 9, 15};
  const auto want = pearson_r(lx, y);
  const auto summary = parse_csv(logged.out).back();
  EXPECT_NEAR(std::stod(summary[0]), want.r, 1e-12);
  EXPECT_NEAR(std::stod(summary[1]), want.r_squared, 1e-12);
}
