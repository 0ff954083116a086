#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "simi/image_io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
};

// Runs the CLI with `args`; stderr is discarded unless redirected in `args`.
Run run(const std::string& args) {
  const std::string command = std::string(SIMI_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ext) ++n;
  return n;
}

void write_tiny_config(const fs::path& path) {
  std::ofstream(path) << R"({"batch_size": 1, "crop_size": 16, "max_iterations": 2, "checkpoint_every": 1,
    "lr": 0.001, "enhancer": {"stages": 2, "smoothing_units": 1, "feature_channels": 4}})";
}

void write_pairs(const fs::path& root) {
  fs::create_directories(root / "low");
  fs::create_directories(root / "ref");
  for (int i = 0; i < 2; ++i) {
    const std::string name = "img" + std::to_string(i) + ".png";
    simi::save_image(root / "low" / name, testutil::random_image(16, 16, 10 + i, 0, 40));
    simi::save_image(root / "ref" / name, testutil::random_image(16, 16, 20 + i, 60, 200));
  }
}

}  // namespace

TEST_CASE("usage and exit codes") {
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("decompose --in x.png").status == 2);
  const Run help = run("--help");
  CHECK(help.status == 0);
  for (const char* sub : {"decompose", "train", "enhance", "eval", "gradcheck", "ablate"})
    CHECK(help.out.find(sub) != std::string::npos);
  testutil::TempDir dir("cli_err");
  CHECK(run("decompose --in " + q(dir / "missing.png") + " --out-dir " + q(dir / "d")).status == 1);
}

TEST_CASE("decompose writes 24 plane images") {
  testutil::TempDir dir("cli_decompose");
  const simi::RawImage img = testutil::random_image(9, 6, 1);
  simi::save_image(dir / "x.png", img);
  for (const char* mode : {"bitplane", "log", "quant"}) {
    const fs::path out = dir / mode;
    REQUIRE(run(std::string("decompose --mode ") + mode + " --in " + q(dir / "x.png") + " --out-dir " + q(out)).status ==
            0);
    CHECK(count_files(out, ".png") == 24);
  }
  // Plane 7 of the red channel is the top bit.
  const simi::RawImage top = simi::load_image(dir / "bitplane" / "c0_p7.png");
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 9; ++x) CHECK(top.at(x, y, 0) == ((img.at(x, y, 0) & 128) ? 255 : 0));
  CHECK(run("decompose --mode gray --in " + q(dir / "x.png") + " --out-dir " + q(dir / "g")).status == 1);
}

TEST_CASE("train, enhance and eval") {
  testutil::TempDir dir("cli_train");
  write_pairs(dir.path());
  write_tiny_config(dir / "c.json");
  const Run trained = run("--seed 3 train --config " + q(dir / "c.json") + " --data " + q(dir / "low") + " --out-dir " +
                          q(dir / "out"));
  REQUIRE(trained.status == 0);
  const fs::path ckpt = dir / "out" / "checkpoint_00000002.simi";
  CHECK(trained.out == ckpt.string() + "\n");
  CHECK(fs::exists(dir / "out" / "checkpoint_00000001.simi"));

  const Run resumed = run("--seed 3 train --config " + q(dir / "c.json") + " --data " + q(dir / "low") +
                          " --out-dir " + q(dir / "out") + " --resume " + q(ckpt));
  CHECK(resumed.status == 0);
  CHECK(fs::exists(dir / "out" / "checkpoint_00000004.simi"));

  REQUIRE(run("enhance --checkpoint " + q(ckpt) + " --in " + q(dir / "low" / "img0.png") + " --out " +
              q(dir / "e.png") + " --dump-trace " + q(dir / "trace"))
              .status == 0);
  const simi::RawImage enhanced = simi::load_image(dir / "e.png");
  CHECK(enhanced.width == 16);
  CHECK(count_files(dir / "trace", ".png") == 3 + 2 * 2);
  CHECK(testutil::read_bytes(dir / "trace" / "image_2.png") == testutil::read_bytes(dir / "e.png"));

  const Run eval = run("eval --checkpoint " + q(ckpt) + " --low-dir " + q(dir / "low") + " --ref-dir " +
                       q(dir / "ref") + " --report " + q(dir / "report.json"));
  REQUIRE(eval.status == 0);
  const auto report = nlohmann::json::parse(testutil::read_bytes(dir / "report.json"));
  CHECK(report["images"].size() == 2);
  CHECK(report["mean_psnr"].get<double>() > 0);

  CHECK(run("enhance --checkpoint " + q(dir / "nope.simi") + " --in " + q(dir / "low" / "img0.png") + " --out " +
            q(dir / "f.png"))
            .status == 1);
}

TEST_CASE("ablate emits a table with every variant") {
  testutil::TempDir dir("cli_ablate");
  write_pairs(dir.path());
  write_tiny_config(dir / "c.json");
  const Run r = run("ablate --config " + q(dir / "c.json") + " --data " + q(dir / "low") + " --iterations 2 --out-dir " +
                    q(dir / "abl") + " --probe " + q(dir / "low" / "img1.png") + " --low-dir " + q(dir / "low") +
                    " --ref-dir " + q(dir / "ref"));
  REQUIRE(r.status == 0);
  const auto table = nlohmann::json::parse(testutil::read_bytes(dir / "abl" / "ablation.json"));
  REQUIRE(table["rows"].size() == 4);
  for (const char* variant : {"bitplane", "log", "quant", "no-SIMM"}) CHECK(r.out.find(variant) != std::string::npos);
  CHECK(testutil::read_bytes(dir / "abl" / "ablation.txt") == r.out);
}

TEST_CASE("gradcheck passes") {
  const Run r = run("gradcheck --size 8 --seed 1");
  CHECK(r.status == 0);
  CHECK(r.out.rfind("max rel err ", 0) == 0);
  const double worst = std::stod(r.out.substr(12));
  MESSAGE("gradcheck max rel err " << worst);
  CHECK(worst < 1e-4);
}
