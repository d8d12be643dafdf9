#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "adeuq/io.hpp"
#include "cli.hpp"
#include "test_support.hpp"

using adeuq::test::TempDir;
namespace cli = adeuq::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> tiny = {"--preset", "paper",  "--set", "grid.n_t=9",
                                       "--set",    "grid.n_z=8", "--set", "run.n_s=4",
                                       "--set",    "run.n_eval=3", "--set", "run.n_mc=20",
                                       "--set",    "train.hidden_units=4", "--set",
                                       "train.epochs=2"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

std::vector<double> csv_values(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) values.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  return values;
}

}  // namespace

TEST_CASE("help lists defaults and exits 0") {
  const Outcome o = run({"--help"});
  CHECK(o.code == cli::exit_ok);
  CHECK(o.out.find("generate") != std::string::npos);
  CHECK(o.out.find("\"n_mc\": 2000") != std::string::npos);
  CHECK(o.out.find("Exit codes") != std::string::npos);
  CHECK(run({"train", "--help"}).code == cli::exit_ok);
}

TEST_CASE("usage and configuration errors exit 2") {
  CHECK(run({}).code == cli::exit_config);
  CHECK(run({"frobnicate"}).code == cli::exit_config);
  CHECK(run({"show-config", "--set", "gp.nope=1"}).code == cli::exit_config);
  CHECK(run({"show-config", "--set", "run.n_mc=1"}).code == cli::exit_config);
  CHECK(run({"show-config", "--preset", "warp"}).code == cli::exit_config);
  CHECK(run({"generate"}).code == cli::exit_config);
}

TEST_CASE("show-config applies preset, overrides and seed in order") {
  const Outcome o = run({"show-config", "--preset", "paper", "--set", "run.seed=3", "--seed", "11"});
  REQUIRE(o.code == cli::exit_ok);
  const auto doc = nlohmann::json::parse(o.out);
  CHECK(doc["run"]["seed"] == 11);
  CHECK(doc["pce"]["max_degree"] == 1);
}

TEST_CASE("end-to-end run is reproducible and predict matches the surrogate mean") {
  TempDir dir;
  const auto data = (dir / "data").string();
  const auto ckpt = (dir / "ckpt").string();
  const auto report = (dir / "report.json").string();

  const Outcome gen = run(with({"generate", "--out", data}, tiny));
  REQUIRE_MESSAGE(gen.code == cli::exit_ok, gen.err);
  CHECK(gen.out.find("records 4") != std::string::npos);

  const Outcome tr = run({"train", "--data", data, "--out", ckpt});
  REQUIRE_MESSAGE(tr.code == cli::exit_ok, tr.err);
  CHECK(tr.out.find("epoch 1 mean_loss") != std::string::npos);
  CHECK(tr.out.find("epoch 2 mean_loss") != std::string::npos);
  CHECK(tr.out.find("epoch 3") == std::string::npos);

  const Outcome ev = run({"evaluate", "--data", data, "--checkpoint", ckpt, "--out", report});
  REQUIRE_MESSAGE(ev.code == cli::exit_ok, ev.err);
  const auto doc = nlohmann::json::parse(adeuq::read_text_file(report));
  CHECK(doc["loss_history"].size() == 8);
  CHECK(doc["n_heldout"] == 3);

  const auto pred = (dir / "pred.csv").string();
  REQUIRE(run({"predict", "--checkpoint", ckpt, "--xi", "0, 0", "--out", pred}).code == cli::exit_ok);
  const std::vector<double> predicted = csv_values(adeuq::read_text_file(pred));
  const std::vector<double> mean =
      csv_values(adeuq::read_text_file(dir / "report_surrogate_mean.csv"));
  REQUIRE(predicted.size() == 72);
  REQUIRE(mean.size() == 72);
  for (std::size_t i = 0; i < 72; ++i)
    CHECK(predicted[i] == doctest::Approx(mean[i]).epsilon(1e-12).scale(1e-12));

  const auto pred2 = (dir / "pred2.csv").string();
  REQUIRE(run({"predict", "--checkpoint", ckpt, "--xi", "0,0", "--out", pred2}).code == cli::exit_ok);
  CHECK(adeuq::read_text_file(pred) == adeuq::read_text_file(pred2));

  const auto data2 = (dir / "data2").string();
  REQUIRE(run(with({"generate", "--out", data2, "--threads", "3"}, tiny)).code == cli::exit_ok);
  CHECK(adeuq::read_binary_file(dir / "data" / "data.bin") ==
        adeuq::read_binary_file(dir / "data2" / "data.bin"));

  SUBCASE("predict validates the germ") {
    CHECK(run({"predict", "--checkpoint", ckpt, "--xi", "1", "--out", pred}).code == cli::exit_config);
    CHECK(run({"predict", "--checkpoint", ckpt, "--xi", "1,x", "--out", pred}).code ==
          cli::exit_config);
  }
  SUBCASE("train rejects configuration changes") {
    CHECK(run({"train", "--data", data, "--out", ckpt, "--seed", "4"}).code == cli::exit_config);
    CHECK(run({"train", "--data", data, "--out", ckpt, "--set", "grid.n_z=9"}).code ==
          cli::exit_config);
  }
  SUBCASE("corrupted data exits 5") {
    auto blob = adeuq::read_binary_file(dir / "data" / "data.bin");
    blob[0] ^= std::byte{1};
    adeuq::write_binary_file(dir / "data" / "data.bin", blob);
    CHECK(run({"train", "--data", data, "--out", ckpt}).code == cli::exit_checksum);
  }
  SUBCASE("mismatched artifacts exit 6") {
    const auto other = (dir / "other").string();
    REQUIRE(run(with(with({"generate", "--out", other}, tiny), {"--set", "grid.n_z=10"})).code ==
            cli::exit_ok);
    CHECK(run({"evaluate", "--data", other, "--checkpoint", ckpt, "--out", report}).code ==
          cli::exit_manifest);
  }
  SUBCASE("missing or unwritable paths exit 3") {
    CHECK(run({"train", "--data", (dir / "absent").string(), "--out", ckpt}).code == cli::exit_io);
    CHECK(run(with({"generate", "--out", "/proc/adeuq-nope"}, tiny)).code == cli::exit_io);
  }
}

TEST_CASE("mc-oracle with zero variance writes a zero std field") {
  TempDir dir;
  const auto prefix = (dir / "mc").string();
  const Outcome o = run(with({"mc-oracle", "--out", prefix, "--set", "gp.sigma_Y=0"}, tiny));
  REQUIRE_MESSAGE(o.code == cli::exit_ok, o.err);
  for (const double v : csv_values(adeuq::read_text_file(dir / "mc_std.csv"))) CHECK(v == 0.0);
  CHECK(csv_values(adeuq::read_text_file(dir / "mc_mean.csv")).size() == 72);
}
