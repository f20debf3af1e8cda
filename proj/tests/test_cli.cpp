#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"

using namespace carkit;
namespace fs = std::filesystem;

namespace {

const std::string kCli = CARKIT_CLI_PATH;

int run_cli(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = kCli + " " + args;
  if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
  cmd += " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct CliDir {
  fs::path dir;
  CliDir() {
    dir = fs::temp_directory_path() / "carkit_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

}  // namespace

TEST_CASE("cli bins writes tables and is idempotent") {
  CliDir d;
  const fs::path table = d / "table.json";
  REQUIRE(run_cli("bins --a 1 --b 80 --k 16 -o " + table.string()) == 0);
  const DepthTable t = table_from_json(nlohmann::json::parse(slurp(table)));
  CHECK(t.k() == 16);
  CHECK(t.space == TableSpace::LogCenters);
  CHECK(t.values == make_uniform_log_table({1.0, 80.0}, 16).values);

  const std::string first = slurp(table);
  REQUIRE(run_cli("bins --a 1 --b 80 --k 16 -o " + table.string()) == 0);
  CHECK(slurp(table) == first);

  SECTION("adaptive widths") {
    const fs::path widths = d / "widths.npy";
    write_npy_file(widths.string(), std::vector<double>{1.0, 1.0, 2.0, 4.0});
    const fs::path ada = d / "ada.json";
    REQUIRE(run_cli("bins --a 0 --b 80 --k 4 --eps 0 --adaptive-widths " + widths.string() +
                    " -o " + ada.string()) == 0);
    const DepthTable at = table_from_json(nlohmann::json::parse(slurp(ada)));
    CHECK(at.space == TableSpace::LinearAdaptive);
    CHECK_THAT(at.values[0], WithinAbs(10.0, 1e-9));
    CHECK_THAT(at.values[3], WithinAbs(80.0, 1e-9));
  }

  SECTION("validation failures exit 1, missing files exit 2") {
    CHECK(run_cli("bins --a 5 --b 1 --k 4 -o " + (d / "x.json").string()) == 1);
    CHECK(run_cli("bins --a 1 --b 80 --k 4 --adaptive-widths " + (d / "nope.npy").string() +
                  " -o " + (d / "x.json").string()) == 2);
  }
}

TEST_CASE("cli encode/decode/uncert pipeline") {
  CliDir d;
  const fs::path table = d / "table.json";
  REQUIRE(run_cli("bins --a 1 --b 80 --k 8 -o " + table.string()) == 0);

  GroundTruthDepth gt;
  CounterRng rng(113);
  gt.values.resize(32);
  for (auto& v : gt.values) v = rng.next_uniform(1.0, 80.0);
  gt.mask = full_mask(32);
  gt.mask[5] = 0;
  const fs::path gt_npy = d / "gt.npy";
  const fs::path mask_npy = d / "mask.npy";
  write_npy_file(gt_npy.string(), gt.values);
  write_npy_bool_file(mask_npy.string(), gt.mask);

  const fs::path labels = d / "labels.npy";
  REQUIRE(run_cli("encode --table " + table.string() + " --scheme smooth2 --gt " +
                  gt_npy.string() + " --mask " + mask_npy.string() + " -o " +
                  labels.string()) == 0);

  const DepthTable t = make_uniform_log_table({1.0, 80.0}, 8);
  const Matrix expect = encode_smooth2(gt, t, 1.0).data;
  const Matrix got = as_matrix(read_npy(labels.string()));
  CHECK(got.data == expect.data);

  SECTION("decode soft on the smooth2 rows and score uncertainty") {
    const fs::path depth = d / "depth.npy";
    const fs::path pgm = d / "depth.pgm";
    // masked-out rows are all zero, which is not a distribution
    Mask all = full_mask(32);
    GroundTruthDepth full_gt{gt.values, all};
    write_npy_file(labels.string(), encode_smooth2(full_gt, t, 1.0).data);
    REQUIRE(run_cli("decode --table " + table.string() + " --probs " + labels.string() +
                    " --method soft -o " + depth.string() + " --pgm " + pgm.string() +
                    " --width 8") == 0);
    const std::vector<double> decoded = as_vector(read_npy(depth.string()));
    CHECK(decoded.size() == 32);
    CHECK(slurp(pgm).substr(0, 2) == "P5");

    const fs::path uncert = d / "u.npy";
    REQUIRE(run_cli("uncert --table " + table.string() + " --probs " + labels.string() +
                    " --depth " + depth.string() + " --method edist -o " +
                    uncert.string()) == 0);
    const std::vector<double> u = as_vector(read_npy(uncert.string()));
    for (double x : u) CHECK(x >= 0.0);

    REQUIRE(run_cli("uncert --probs " + labels.string() + " --method entropy -o " +
                    uncert.string()) == 0);

    SECTION("ensemble variance over two depth maps") {
      const fs::path depth2 = d / "depth2.npy";
      std::vector<double> shifted = decoded;
      for (auto& x : shifted) x += 1.0;
      write_npy_file(depth2.string(), shifted);
      REQUIRE(run_cli("uncert --method variance --depth " + depth.string() + " --depth " +
                      depth2.string() + " -o " + uncert.string()) == 0);
      const std::vector<double> var = as_vector(read_npy(uncert.string()));
      for (double x : var) CHECK_THAT(x, WithinAbs(0.25, 1e-12));
    }
  }

  SECTION("semantics validation exits 1") {
    const fs::path bad = d / "bad.npy";
    Matrix not_probs(2, 8);
    for (auto& x : not_probs.data) x = 0.3;
    write_npy_file(bad.string(), not_probs);
    CHECK(run_cli("decode --table " + table.string() + " --probs " + bad.string() +
                  " --method soft -o " + (d / "y.npy").string()) == 1);
  }
}

TEST_CASE("cli eval prints the fixed metric row") {
  CliDir d;
  const fs::path gt_npy = d / "gt.npy";
  const fs::path mask_npy = d / "mask.npy";
  write_npy_file(gt_npy.string(), std::vector<double>{2.0, 4.0, 10.0});
  write_npy_bool_file(mask_npy.string(), Mask{1, 1, 1});

  const fs::path out = d / "eval.txt";
  REQUIRE(run_cli("eval --pred " + gt_npy.string() + " --gt " + gt_npy.string() + " --mask " +
                  mask_npy.string(), out) == 0);
  CHECK(slurp(out) ==
        "rmse,abs_rel,sq_rel,rmse_log,log10,delta1,delta2,delta3,n_valid\n"
        "0.000000,0.000000,0.000000,0.000000,0.000000,1.000000,1.000000,1.000000,3\n");

  REQUIRE(run_cli("eval --pred " + gt_npy.string() + " --gt " + gt_npy.string() + " --json",
                  out) == 0);
  CHECK(slurp(out).find("\"delta1\": 1.000000") != std::string::npos);

  CHECK(run_cli("eval --pred " + gt_npy.string() + " --gt " + (d / "missing.npy").string()) ==
        2);
}

TEST_CASE("cli sparsify reproduces the anti-oracle fixture") {
  CliDir d;
  write_npy_file((d / "gt.npy").string(), std::vector<double>{1.0, 1.0, 1.0, 1.0});
  write_npy_file((d / "pred.npy").string(), std::vector<double>{5.0, 4.0, 3.0, 2.0});
  write_npy_file((d / "u.npy").string(), std::vector<double>{-4.0, -3.0, -2.0, -1.0});

  const fs::path out = d / "ause.txt";
  REQUIRE(run_cli("sparsify --pred " + (d / "pred.npy").string() + " --gt " +
                  (d / "gt.npy").string() + " --uncert " + (d / "u.npy").string() +
                  " --metric rmse --step 0.25 -o " + (d / "curve.csv").string() + " --ause",
                  out) == 0);
  CHECK(slurp(out) == "1.475819\n");

  const std::string curve = slurp(d / "curve.csv");
  CHECK(curve.substr(0, 15) == "fraction,value\n");
  CHECK(curve.find("\n0.25,") != std::string::npos);
}

TEST_CASE("cli gradcheck") {
  CliDir d;
  const fs::path out = d / "gc.txt";
  REQUIRE(run_cli("gradcheck --loss ce --trials 5", out) == 0);
  CHECK(slurp(out).find("ce") != std::string::npos);
  CHECK(slurp(out).find("ok") != std::string::npos);
  CHECK(run_cli("gradcheck --loss bogus") == 1);
}

TEST_CASE("cli synth runs and reruns byte-identically from its own report") {
  CliDir d;
  nlohmann::json cfg;
  cfg["width"] = 12;
  cfg["height"] = 12;
  cfg["k"] = 6;
  cfg["epochs"] = 15;
  cfg["step"] = 0.1;
  cfg["strategies"] = {"li-onehot-ce", "dorn-ordinal"};
  cfg["seeds"] = {0, 1};
  std::ofstream((d / "config.json").string()) << cfg.dump(2);

  const fs::path report = d / "report.json";
  REQUIRE(run_cli("synth --config " + (d / "config.json").string() + " -o " + report.string(),
                  d / "synth.txt") == 0);
  const std::string first = slurp(report);
  CHECK(first.find("\"cells\"") != std::string::npos);
  CHECK(fs::exists(d / "traces" / "li-onehot-ce_seed0.csv"));
  const std::string trace = slurp(d / "traces" / "dorn-ordinal_seed1.csv");
  CHECK(trace.substr(0, 11) == "epoch,loss\n");

  // rerun from the report's embedded config, also with more threads
  const fs::path report2 = d / "report2.json";
  REQUIRE(run_cli("synth --config " + report.string() + " --threads 3 -o " + report2.string(),
                  d / "synth2.txt") == 0);
  CHECK(slurp(report2) == first);

  CHECK(run_cli("synth --config " + (d / "nope.json").string() + " -o " + report.string()) ==
        2);
}

TEST_CASE("cli usage errors exit 1 and name the problem") {
  CliDir d;
  const int code = std::system((kCli + " decode --table x.json 2> " +
                                (d / "err.txt").string() + " >/dev/null")
                                   .c_str());
  CHECK(WEXITSTATUS(code) == 1);
  const std::string err = slurp(d / "err.txt");
  CHECK(err.find("--probs") != std::string::npos);

  CHECK(run_cli("frobnicate") == 1);
}
