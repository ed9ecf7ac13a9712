#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "vortexqkd/cli.hpp"
#include "vortexqkd/io.hpp"

using namespace vortexqkd;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vortexqkd_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json load(const fs::path& p) { return json::parse(read_text(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("mubs passes and fails under the swapped convention") {
  const fs::path dir = scratch("mubs");
  const Run ok = cli({"mubs", "--out", dir.string()});
  CHECK(ok.code == 0);
  const json report = load(dir / "mubs.json");
  CHECK(report.at("pass").get<bool>());
  CHECK(report.at("gram_squared").size() == 8);

  const Run bad = cli({"mubs", "--out", dir.string(), "--perturb-convention"});
  CHECK(bad.code == 3);
  CHECK_FALSE(load(dir / "mubs.json").at("pass").get<bool>());
  CHECK(load(dir / "mubs.json").at("checks").at("unbiased").get<bool>());
}

TEST_CASE("crosstalk writes the table and summary") {
  const fs::path dir = scratch("crosstalk");
  REQUIRE(cli({"crosstalk", "--out", dir.string()}).code == 0);
  const json s = load(dir / "crosstalk_summary.json");
  CHECK(s.at("mean_efficiency").get<double>() == doctest::Approx(0.994).epsilon(1e-9));
  CHECK(s.at("min_diagonal").get<double>() > 0.99);
  CHECK(read_text(dir / "crosstalk.csv").rfind("state,DH1,DV1,DH2,DV2,loss\n", 0) == 0);

  REQUIRE(cli({"crosstalk", "--out", dir.string(), "--misalignment", "0"}).code == 0);
  CHECK(load(dir / "crosstalk_summary.json").at("mean_efficiency").get<double>() == 1.0);
  REQUIRE(cli({"crosstalk", "--out", dir.string(), "--misalignment", "2.25", "--hwp-deg"})
              .code == 0);
  const double delta = 4.5 * std::numbers::pi / 180.0;
  CHECK(load(dir / "crosstalk_summary.json").at("misalignment_rad").get<double>() ==
        doctest::Approx(delta).epsilon(1e-15));
}

TEST_CASE("simulate matches the golden tally") {
  const fs::path dir = scratch("golden");
  const Run r = cli({"simulate", "--out", dir.string(), "--seed", "7", "--pulses", "100000"});
  REQUIRE(r.code == 0);
  const std::string golden =
      read_text(fs::path(VORTEXQKD_TEST_DATA_DIR) / "golden" / "tally_seed7_1e5.json");
  CHECK(read_text(dir / "tally.json") == golden);
  CHECK(r.out == golden);
}

TEST_CASE("simulate output is byte-identical across runs and batch counts") {
  const fs::path a = scratch("repeat_a");
  const fs::path b = scratch("repeat_b");
  REQUIRE(cli({"simulate", "--out", a.string(), "--seed", "3", "--pulses", "300000",
               "--records", "--keyrate", "--batches", "1"})
              .code == 0);
  REQUIRE(cli({"simulate", "--out", b.string(), "--seed", "3", "--pulses", "300000",
               "--records", "--keyrate", "--batches", "16"})
              .code == 0);
  for (const char* f : {"tally.json", "records.csv", "keyrate.json"}) {
    CHECK(read_text(a / f) == read_text(b / f));
  }
}

TEST_CASE("keyrate on the reference operating point") {
  const fs::path dir = scratch("keyrate");
  const Run r = cli({"keyrate", "--paper", "--fec", "1", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const json k = load(dir / "keyrate.json");
  CHECK(std::abs(k.at("skrpss").get<double>() - 1.849313189927) < 1e-9);

  REQUIRE(cli({"keyrate", "--paper", "--fec", "1.15", "--out", dir.string()}).code == 0);
  CHECK(std::abs(load(dir / "keyrate.json").at("skrpss").get<double>() - 1.839949461624) <
        1e-9);

  REQUIRE(cli({"keyrate", "--paper", "--e-mu", "0.75", "--out", dir.string()}).code == 0);
  const json clamped = load(dir / "keyrate.json");
  CHECK(clamped.at("skrpss").get<double>() == 0.0);
  CHECK(clamped.at("flags").at("rate_clamped").get<bool>());

  const fs::path obs = dir / "obs.json";
  write_text(obs, to_json(reference_observables()).dump());
  REQUIRE(cli({"keyrate", "--observables", obs.string(), "--out", dir.string()}).code == 0);
  CHECK(std::abs(load(dir / "keyrate.json").at("skrpss").get<double>() - 1.849313189927) <
        1e-9);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(cli({}).code == 2);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({"simulate", "--pulses", "ten"}).code == 2);
  CHECK(cli({"simulate", "--config", (dir / "none.json").string()}).code == 2);
  CHECK(cli({"keyrate", "--out", dir.string()}).code == 2);
  CHECK(cli({"keyrate", "--paper", "--e-mu", "0.9", "--out", dir.string()}).code == 2);

  write_text(dir / "bad.json", R"({"schema_version": 1, "session": {"mew": 1}})");
  const Run bad = cli({"simulate", "--config", (dir / "bad.json").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("mew") != std::string::npos);

  write_text(dir / "dark.json", R"({"schema_version": 1, "session": {"dark_rate_hz": 1e8}})");
  CHECK(cli({"simulate", "--config", (dir / "dark.json").string(), "--out", dir.string()})
            .code == 3);

  write_text(dir / "file", "x");
  CHECK(cli({"keyrate", "--paper", "--out", (dir / "file" / "sub").string()}).code == 4);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("timing outputs") {
  const fs::path dir = scratch("timing");
  REQUIRE(cli({"timing", "--out", dir.string()}).code == 0);
  const json t = load(dir / "timing.json");
  CHECK(t.at("peak_separation_ns").get<double>() == doctest::Approx(3.05).epsilon(1e-12));
  CHECK(t.at("effective_dark_rate").get<double>() == doctest::Approx(7.705e-8).epsilon(1e-12));
  CHECK(read_text(dir / "timing.csv").rfind("time_ns,relative_rate\n", 0) == 0);
}

TEST_CASE("vacuum-only session") {
  const fs::path dir = scratch("vacuum");
  write_text(dir / "cfg.json",
             R"({"schema_version": 1, "session": {"intensity_probs":
                 {"signal": 0, "decoy": 0, "vacuum": 1}, "pulses": 50000}})");
  REQUIRE(cli({"simulate", "--config", (dir / "cfg.json").string(), "--out", dir.string()})
              .code == 0);
  const json t = load(dir / "tally.json");
  CHECK(t.at("vacuum").at("sent").get<std::uint64_t>() == 50000);
  CHECK(t.at("signal").at("sent").get<std::uint64_t>() == 0);
  CHECK(cli({"simulate", "--config", (dir / "cfg.json").string(), "--out", dir.string(),
             "--keyrate"})
            .code == 2);
}

TEST_CASE("full-size session keys near the reference rate") {
  const fs::path dir = scratch("full");
  REQUIRE(cli({"simulate", "--out", dir.string(), "--pulses", "100000000", "--keyrate"})
              .code == 0);
  const double s = load(dir / "keyrate.json").at("skrpss").get<double>();
  CHECK(s >= 1.75);
  CHECK(s <= 1.95);
}

}  // TEST_SUITE
