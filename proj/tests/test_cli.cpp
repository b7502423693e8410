#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ridgepath/cli.hpp"

using namespace ridgepath;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "ridgepath");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  set_thread_count(0);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ridgepath_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::string first_columns(const std::string& csv, std::size_t n) {
  std::string out;
  for (const auto& line : lines_of(csv)) {
    if (line.rfind("method=", 0) == 0) continue;  // summary line carries wall time
    std::istringstream is(line);
    std::string f;
    for (std::size_t i = 0; i < n && std::getline(is, f, ','); ++i) out += f + ",";
    out += '\n';
  }
  return out;
}

fs::path generated(const std::string& name, std::vector<std::string> extra = {}) {
  const fs::path dir = scratch(name);
  std::vector<std::string> args{"gen", "--n", "60", "--d", "5", "--seed", "3", "--out", dir.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  const Outcome r = run(args);
  EXPECT_EQ(r.code, 0) << r.err;
  return dir;
}

}  // namespace

TEST(Cli, GenWritesReadableMatrices) {
  const fs::path dir = generated("gen");
  const DenseMatrix x = load_matrix((dir / "X.mat").string());
  const DenseMatrix y = load_matrix((dir / "y.mat").string());
  const DenseMatrix t = load_matrix((dir / "theta_true.mat").string());
  EXPECT_EQ(x.rows(), 60u);
  EXPECT_EQ(x.cols(), 5u);
  EXPECT_EQ(y.rows(), 60u);
  EXPECT_EQ(t.rows(), 6u);
  SynthSpec spec;
  spec.n = 60;
  spec.d = 5;
  spec.seed = 3;
  const SynthData d = generate(spec);
  EXPECT_EQ(x, d.features);
  EXPECT_EQ(y.storage(), d.y);
}

TEST(Cli, GenWarnsWhenUnderdetermined) {
  const fs::path dir = scratch("under");
  const Outcome r = run({"gen", "--n", "3", "--d", "5", "--out", dir.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(run({"gen", "--spectrum", "flat", "--out", dir.string()}).code, cli::kExitUsage);
}

TEST(Cli, MatrixRoundtripAndBadFormat) {
  const fs::path dir = scratch("io");
  const DenseMatrix m = DenseMatrix::from_rows({{1.5, -2}, {0.1, 1e-300}, {3, 4}});
  save_matrix((dir / "m.mat").string(), m);
  EXPECT_EQ(load_matrix((dir / "m.mat").string()), m);
  {
    std::ofstream os(dir / "bad.mat", std::ios::binary);
    os << "NOTAMATRIX0000000000";
  }
  EXPECT_THROW(load_matrix((dir / "bad.mat").string()), BadFormat);
  EXPECT_THROW(load_matrix((dir / "missing.mat").string()), IoError);
  std::ostringstream os;
  write_csv(os, m);
  std::istringstream is(os.str());
  EXPECT_EQ(read_csv(is), m);
}

TEST(Cli, CvOnCsvFixture) {
  const fs::path dir = scratch("csv");
  {
    std::ofstream x(dir / "x.csv"), y(dir / "y.csv");
    x << "a,b\n";
    y << "y\n";
    for (int i = 0; i < 40; ++i) {
      const double a = 0.1 * i, b = std::sin(0.7 * i);
      x << a << ',' << b << '\n';
      y << 2 * a - b + 0.5 + 0.01 * std::cos(3.1 * i) << '\n';
    }
  }
  const Outcome r = run({"cv", "--x", (dir / "x.csv").string(), "--y", (dir / "y.csv").string(),
                     "--method", "chol", "--q", "5", "--folds", "4", "--csv",
                     (dir / "cv.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("method=chol best_lambda=", 0), 0u) << r.out;
  const auto lines = lines_of(slurp(dir / "cv.csv"));
  ASSERT_EQ(lines.size(), 1u + 4u * 5u + 5u);
  EXPECT_EQ(lines[0], kCvCsvHeader);
}

TEST(Cli, AllMethodsRun) {
  const fs::path dir = generated("methods");
  const std::string x = (dir / "X.mat").string(), y = (dir / "y.mat").string();
  for (const char* m : {"chol", "pichol", "mchol", "svd", "pinrmse"}) {
    const Outcome r = run({"cv", "--x", x, "--y", y, "--method", m, "--q", "9"});
    EXPECT_EQ(r.code, 0) << m << ": " << r.err;
    EXPECT_NE(r.out.find(std::string("method=") + m), std::string::npos);
  }
  for (const char* m : {"tsvd", "rsvd"}) {
    EXPECT_EQ(run({"cv", "--x", x, "--y", y, "--method", m, "--rank", "4"}).code, 0) << m;
    EXPECT_EQ(run({"cv", "--x", x, "--y", y, "--method", m}).code, cli::kExitUsage) << m;
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = generated("codes");
  const std::string x = (dir / "X.mat").string(), y = (dir / "y.mat").string();
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"cv", "--x", x}).code, cli::kExitUsage);
  EXPECT_EQ(run({"cv", "--x", x, "--y", y, "--method", "magic"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"cv", "--x", x, "--y", (dir / "nope.mat").string()}).code, cli::kExitIo);
  // An indefinite Hessian cannot be factored.
  const fs::path h = dir / "neg.csv";
  {
    std::ofstream os(h);
    os << "a,b\n-1,0\n0,-2\n";
  }
  EXPECT_EQ(run({"factor-path", "--hessian", h.string(), "--lo", "0.1", "--hi", "0.5"}).code,
            cli::kExitNumerical);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = RIDGEPATH_CLI_PATH;
  const fs::path dir = scratch("bin");
  const std::string quiet = " >" + (dir / "o.txt").string() + " 2>&1";
  auto status = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
  EXPECT_EQ(status(std::system((bin + " --help" + quiet).c_str())), 0);
  EXPECT_EQ(status(std::system((bin + " cv" + quiet).c_str())), cli::kExitUsage);
  const std::string gen = bin + " gen --n 20 --d 3 --out " + dir.string() + quiet;
  EXPECT_EQ(status(std::system(gen.c_str())), 0);
  EXPECT_TRUE(fs::exists(dir / "X.mat"));
}

TEST(Cli, DeterministicAcrossThreadCounts) {
  const fs::path dir = generated("threads");
  const std::string x = (dir / "X.mat").string(), y = (dir / "y.mat").string();
  std::string prev;
  for (const char* t : {"1", "3"}) {
    const Outcome r = run({"--threads", t, "cv", "--x", x, "--y", y, "--method", "pichol", "--q", "11",
                       "--csv", "-"});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string stable = first_columns(r.out, kCvCsvStableColumns);
    if (!prev.empty()) EXPECT_EQ(stable, prev);
    prev = stable;
  }
}

TEST(Cli, FactorPath) {
  const fs::path dir = generated("fp");
  const std::string x = (dir / "X.mat").string();
  const Outcome r = run({"factor-path", "--x", x, "--lambdas", "0.1,0.2,0.4,0.6,0.8,1.0", "--g", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "lambda,nrmse,sample");
  EXPECT_EQ(lines[1].substr(lines[1].size() - 2), ",1");
  EXPECT_EQ(run({"factor-path", "--x", x, "--lambdas", ""}).code, cli::kExitUsage);
  EXPECT_EQ(run({"factor-path", "--lo", "0.1"}).code, cli::kExitUsage);
}

TEST(Cli, DiagnoseBound) {
  const Outcome r = run({"diagnose-bound", "--order", "4", "--trials", "2", "--sweep", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], cli::kBoundCsvHeader);
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_EQ(lines[i][lines[i].size() - 3], '1');
  EXPECT_EQ(run({"diagnose-bound", "--gamma", "2"}).code, cli::kExitUsage);
}

TEST(Cli, Bench) {
  const Outcome r = run({"bench", "--sizes", "8,16", "--reps", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  EXPECT_EQ(lines[0], cli::kBenchCsvHeader);
  EXPECT_EQ(lines.size(), 1u + 2u * (1u + 3u * 3u));
}
