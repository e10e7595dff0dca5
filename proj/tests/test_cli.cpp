// Copyright 2026 The idread Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Drives the idread executable end to end: exit codes, output files and
// byte-identical results across thread counts.

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "idread/raster.hpp"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using idread::testing::scratch_dir;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(IDREAD_CLI) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  for (size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_same_tree(const fs::path& a, const fs::path& b) {
  size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    REQUIRE_MESSAGE(fs::exists(b / rel), rel.string());
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / rel), rel.string());
    ++files;
  }
  size_t other = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) other += e.is_regular_file();
  CHECK(files == other);
  CHECK(files > 0);
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("gen --count 3").code == 2);
  CHECK(run("gen --count 0 --out /tmp/x").code == 2);
  CHECK(run("gen --kind poster --count 1 --out /tmp/x").code == 2);
  CHECK(run("locate --input a.png --threads many").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("configuration errors") {
  const auto dir = scratch_dir("cli_config");
  std::ofstream(dir / "bad.json") << R"({"locator": {"samplez": 3}})";
  std::ofstream(dir / "broken.json") << "{ not json";
  std::ofstream(dir / "zero.json") << R"({"locator": {"samples": 0}})";
  idread::raster::write_image(dir / "tiny.png", idread::raster::Image(64, 48, {200, 200, 200}));
  CHECK(run("--config " + (dir / "bad.json").string() + " locate --input " + (dir / "tiny.png").string()).code == 2);
  CHECK(run("--config " + (dir / "broken.json").string() + " locate --input " + (dir / "tiny.png").string()).code ==
        2);
  CHECK(run("--config " + (dir / "missing.json").string() + " locate --input x.png").code == 3);
  CHECK(run("--config " + (dir / "zero.json").string() + " locate --input " + (dir / "tiny.png").string()).code == 2);
}

TEST_CASE("io errors exit with 3") {
  const auto dir = scratch_dir("cli_io");
  CHECK(run("locate --input " + (dir / "nope.png").string()).code == 3);
  std::ofstream(dir / "junk.png") << "definitely not a png";
  CHECK(run("locate --input " + (dir / "junk.png").string()).code == 3);
  std::ofstream(dir / "junk.idrn") << "garbage";
  CHECK(run("classify --input " + (dir / "junk.png").string() + " --model " + (dir / "junk.idrn").string()).code == 3);
  CHECK(run("train --dataset " + (dir / "empty").string() + " --out " + (dir / "m.idrn").string()).code == 3);
}

TEST_CASE("gen, train, locate, read and eval are thread-count invariant") {
  const auto dir = scratch_dir("cli_pipeline");
  const auto s = [&](const char* name) { return (dir / name).string(); };

  REQUIRE(run("gen --kind main --count 3 --seed 11 --threads 1 --out " + s("main1")).code == 0);
  REQUIRE(run("gen --kind main --count 3 --seed 11 --threads 3 --out " + s("main3")).code == 0);
  check_same_tree(dir / "main1", dir / "main3");

  REQUIRE(run("gen --kind classifier --count 9 --seed 12 --threads 2 --out " + s("cls")).code == 0);
  REQUIRE(run("gen --kind classifier --count 9 --seed 12 --threads 1 --out " + s("cls1")).code == 0);
  check_same_tree(dir / "cls", dir / "cls1");

  const std::string train = "train --dataset " + s("cls") + " --epochs 2 --batch-size 4 --seed 3";
  REQUIRE(run(train + " --threads 1 --out " + s("m1.idrn") + " --history " + s("h.csv")).code == 0);
  REQUIRE(run(train + " --threads 3 --out " + s("m3.idrn")).code == 0);
  CHECK(slurp(dir / "m1.idrn") == slurp(dir / "m3.idrn"));
  const auto hist = slurp(dir / "h.csv");
  CHECK(std::count(hist.begin(), hist.end(), '\n') == 3);

  const auto manifest = slurp(dir / "main1" / "manifest.jsonl");
  const auto first = nlohmann::json::parse(manifest.substr(0, manifest.find('\n')));
  const std::string photo = (dir / "main1" / first.at("image").get<std::string>()).string();

  const auto l1 = run("locate --seed 4 --threads 1 --input " + photo);
  const auto l2 = run("locate --seed 4 --threads 2 --input " + photo);
  REQUIRE(l1.code == 0);
  CHECK(l1.out == l2.out);
  CHECK(nlohmann::json::parse(l1.out).at("quad").size() == 4);

  const auto r1 = run("read --threads 1 --input " + photo + " --model " + s("m1.idrn"));
  const auto r2 = run("read --threads 2 --input " + photo + " --model " + s("m1.idrn"));
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
  const auto readout = nlohmann::json::parse(r1.out);
  CHECK(readout.at("probs").size() == 9);
  CHECK(readout.contains("fields"));

  const auto c = run("classify --input " + photo + " --model " + s("m1.idrn") + " --quad 0,0,10,0,10,10,0,10");
  REQUIRE(c.code == 0);
  CHECK(nlohmann::json::parse(c.out).at("class").is_number_integer());

  const std::string eval = "eval --dataset " + s("main1") + " --model " + s("m1.idrn");
  REQUIRE(run(eval + " --threads 1 --report " + s("r1.json")).code == 0);
  REQUIRE(run(eval + " --threads 3 --report " + s("r3.json") + " --timing").code == 0);
  CHECK(slurp(dir / "r1.json") == slurp(dir / "r3.json"));
  CHECK(slurp(dir / "r1_breakdown.csv") == slurp(dir / "r3_breakdown.csv"));
  CHECK(fs::exists(dir / "r1_samples.csv"));
  const auto report = nlohmann::json::parse(slurp(dir / "r1.json"));
  CHECK(report.contains("vertex_success_rate"));
}
