#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include "support.hpp"

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run_cli(const std::string& args) {
  static const auto log = testing::scratch_dir("cli-log") / "out.txt";
  const int status = std::system((std::string(DIVITA_CLI) + " " + args + " > " + log.string() + " 2>&1").c_str());
  std::ifstream in(log);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, {std::istreambuf_iterator<char>(in), {}}};
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("CLI exit codes") {
  auto dir = testing::scratch_dir("cli");
  const auto d = dir.string();
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("split --manifest").code == 1);

  auto missing = run_cli("stats --manifest " + d + "/nope.jsonl --out " + d + "/stats");
  CHECK(missing.code == 2);
  CHECK(missing.output.find("nope.jsonl") != std::string::npos);

  write(dir / "bad.jsonl", "{\"id\": \"a\", \"genres\": [\"western\"]}\n");
  auto bad = run_cli("stats --manifest " + d + "/bad.jsonl --out " + d + "/stats");
  CHECK(bad.code == 1);
  CHECK(bad.output.find("western") != std::string::npos);

  auto config = run_cli("sweep --out " + d + "/sweep --source manifest --manifest " + d + "/absent.jsonl");
  CHECK(config.code == 1);
  CHECK(config.output.find("configuration error") != std::string::npos);

  write(dir / "broken.dvtm", "not a checkpoint");
  CHECK(run_cli("synth features --out " + d + "/feat --trailers 12 --width 8 --min-clips 2 --max-clips 3").code == 0);
  CHECK(run_cli("split --manifest " + d + "/feat/manifest.jsonl --out " + d + "/split.csv").code == 0);
  auto corrupt = run_cli("eval --manifest " + d + "/feat/manifest.jsonl --split " + d + "/split.csv --checkpoint " + d +
                        "/broken.dvtm --out " + d + "/eval");
  CHECK(corrupt.code == 2);
}

TEST_CASE("CLI config file supplies flags and flags override it") {
  auto dir = testing::scratch_dir("cli-config");
  const auto d = dir.string();
  write(dir / "synth.ini", "[synth.features]\ntrailers=7\nwidth=4\nmin-clips=2\nmax-clips=2\n");
  CHECK(run_cli("--config " + d + "/synth.ini synth features --out " + d + "/a").code == 0);
  CHECK(run_cli("--config " + d + "/synth.ini synth features --trailers 5 --out " + d + "/b").code == 0);
  auto lines = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string s((std::istreambuf_iterator<char>(in)), {});
    return std::count(s.begin(), s.end(), '\n');
  };
  CHECK(lines(dir / "a/manifest.jsonl") == 7);
  CHECK(lines(dir / "b/manifest.jsonl") == 5);
}
