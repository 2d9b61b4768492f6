#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

#include "cli.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cglkit");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Outcome o;
  o.code = cglkit::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({"curve", "--help"}).out.find("--quantile") != std::string::npos);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"nosuch"}).code == 2);
  CHECK(run_cli({"curve"}).code == 2);   // --out missing
  CHECK(run_cli({"curve", "--out", "x", "--n", "abc"}).code == 2);
  CHECK(run_cli({"bounds", "--variant", "weird"}).code == 2);
  CHECK(run_cli({"bounds", "--k", "3"}).code == 2);
  CHECK(run_cli({"bounds", "--trials", "1", "--threads", "-1"}).code == 2);
  const auto o = run_cli({"embed", "--out", "x"});
  CHECK(o.code == 2);
  CHECK(o.err.find("--points") != std::string::npos);
}

TEST_CASE("numerical failures exit with 3") {
  // eps above gamma: the bound's precondition fails.
  const auto o = run_cli({"bounds", "--n", "6", "--k", "1", "--trials", "1", "--eps", "0.9", "--seed", "1",
                          "--variant", "additive"});
  CHECK(o.code == 3);
  CHECK(o.err.find("gamma") != std::string::npos);
}

TEST_CASE("curve writes the bundle and records the seed") {
  TempDir dir("cglkit_cli_curve");
  const auto o = run_cli({"curve", "--n", "120", "--p", "120", "--knn", "15", "--out", dir / "run"});
  REQUIRE(o.code == 0);
  const auto cfg = read_json(dir.path / "run" / "config.json");
  CHECK(cfg.at("n") == 120);
  CHECK(cfg.at("subcommand") == "curve");
  REQUIRE(cfg.contains("seed"));
  for (const char* f : {"summary.json", "rankcdf_euclidean.csv", "rankcdf_zerodiag_cgl.csv",
                        "embedding_full_cgl.csv"}) {
    CHECK(fs::exists(dir.path / "run" / f));
  }
  CHECK(json::parse(o.out).contains("methods"));
  // Replaying the recorded config reproduces the run exactly.
  const auto again = run_cli({"curve", "--config", (dir.path / "run" / "config.json").string(), "--out", dir / "again"});
  REQUIRE(again.code == 0);
  std::ifstream a(dir.path / "run" / "summary.json"), b(dir.path / "again" / "summary.json");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("config files: flags override, unknown keys are rejected") {
  TempDir dir("cglkit_cli_config");
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"n": 8, "k": 1, "trials": 3, "eps": 0.02, "eta": 0.0, "seed": 42, "variant": "additive"})";
  }
  const auto o = run_cli({"bounds", "--config", dir / "cfg.json", "--trials", "2", "--out", dir / "b"});
  REQUIRE(o.code == 0);
  const auto rep = read_json(dir.path / "b" / "report.json");
  CHECK(rep.at("n") == 8);
  CHECK(rep.at("trials") == 2);
  CHECK(rep.at("seed") == 42);
  CHECK(rep.at("holds_count") == 2);
  CHECK(read_json(dir.path / "b" / "config.json").at("seed") == 42);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"n": 8, "bogus": 1})";
  }
  const auto bad = run_cli({"bounds", "--config", dir / "bad.json"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("bogus") != std::string::npos);
  {
    std::ofstream f(dir / "broken.json");
    f << "{ not json";
  }
  CHECK(run_cli({"bounds", "--config", dir / "broken.json"}).code == 2);
  CHECK(run_cli({"bounds", "--config", dir / "missing.json"}).code == 2);
  // Hyphenated and underscored keys are both accepted.
  {
    std::ofstream f(dir / "img.json");
    f << R"({"nk": 2, "nr": 5, "p": 32, "knn": 4, "c_sigma_mult": 0, "seed": 3})";
  }
  CHECK(run_cli({"images", "--config", dir / "img.json", "--out", dir / "img"}).code == 0);
  CHECK(read_json(dir.path / "img" / "config.json").at("c_sigma_mult") == 0.0);
}

TEST_CASE("generate, rid and embed on images") {
  TempDir dir("cglkit_cli_images");
  const auto g = run_cli({"generate", "--dataset", "images", "--nk", "2", "--nr", "6", "--p", "48", "--c", "0",
                          "--seed", "9", "--out", dir / "imgs.csv", "--manifest", dir / "manifest.json"});
  REQUIRE(g.code == 0);
  const auto man = read_json(dir.path / "manifest.json");
  CHECK(man.at("seed") == 9);
  CHECK(man.contains("sigma"));
  const auto r = run_cli({"rid", "--images", dir / "imgs.csv", "--out", dir / "rid.csv"});
  REQUIRE(r.code == 0);
  std::ifstream rf(dir.path / "rid.csv");
  std::string header;
  std::getline(rf, header);
  CHECK(header == "i,j,distance_sq,optimal_shift");
  std::size_t rows = 0;
  for (std::string line; std::getline(rf, line);) ++rows;
  CHECK(rows == 12 * 11 / 2);
  const auto e = run_cli({"embed", "--images", dir / "imgs.csv", "--zero-diag", "--m", "2", "--vdm-r", "4",
                          "--out", dir / "emb"});
  REQUIRE(e.code == 0);
  for (const char* f : {"embedding.csv", "eigenvalues.csv", "alignment.csv", "vdm_distance_sq.csv", "summary.json",
                        "config.json"}) {
    CHECK(fs::exists(dir.path / "emb" / f));
  }
  // Clean data: the alignment is exact within each class.
  std::ifstream af(dir.path / "emb" / "alignment.csv");
  std::getline(af, header);
  CHECK(header == "index,class_id,z_radians");
}

TEST_CASE("generate and embed a point cloud") {
  TempDir dir("cglkit_cli_points");
  REQUIRE(run_cli({"generate", "--dataset", "bell", "--n", "80", "--p", "20", "--c", "0.1", "--seed", "2",
                   "--out", dir / "bell.csv"})
              .code == 0);
  const auto e = run_cli({"embed", "--points", dir / "bell.csv", "--knn", "10", "--delta", "0.2", "--min-dim", "2",
                          "--out", dir / "emb"});
  REQUIRE(e.code == 0);
  const auto s = json::parse(e.out);
  CHECK(s.at("m").get<int>() >= 2);
  CHECK(run_cli({"generate", "--dataset", "sphere", "--out", dir / "x.csv"}).code == 2);
}

TEST_CASE("concentration subcommand") {
  const auto o = run_cli({"concentration", "--p", "64", "--n", "4", "--trials", "2", "--seed", "1"});
  REQUIRE(o.code == 0);
  const auto j = json::parse(o.out);
  CHECK(j.contains("ratio"));
  CHECK(j.contains("scale"));
}

TEST_CASE("the installed binary reports exit codes") {
  const char* exe = std::getenv("CGLKIT_CLI");
  if (exe == nullptr) return;
  auto status = [&](const std::string& args) {
    const int s = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status("--help") == 0);
  CHECK(status("curve") == 2);
  CHECK(status("bounds --n 6 --k 1 --trials 1 --eps 0.9 --seed 1 --variant additive") == 3);
  CHECK(status("bounds --n 6 --k 1 --trials 1 --seed 1") == 0);
  CHECK(status("--threads 1 bounds --n 6 --trials 1 --seed 1") == 0);
}
