#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <limits>

#include "adeuq/error.hpp"
#include "adeuq/io.hpp"
#include "adeuq/pipeline.hpp"
#include "test_support.hpp"

using namespace adeuq;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config() {
  PipelineConfig c = PipelineConfig::paper();
  c.grid.n_t = 6;
  c.grid.n_z = 5;
  c.run.n_s = 3;
  c.train.hidden_units = 4;
  return c;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  for (const double v : {1.0 / 3.0, std::exp(1.0), 1e300, 5e-324, -0.1}) {
    const std::string text = format_double(v);
    double back = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(ec == std::errc());
    CHECK(ptr == text.data() + text.size());
    CHECK(back == v);
  }
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex(std::string_view("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex(std::string_view("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("float64 blobs are little-endian") {
  const std::vector<std::byte> blob = encode_f64(std::vector<double>{1.0});
  REQUIRE(blob.size() == 8);
  // 1.0 = 0x3FF0000000000000
  CHECK(blob[7] == std::byte{0x3F});
  CHECK(blob[6] == std::byte{0xF0});
  for (int i = 0; i < 6; ++i) CHECK(blob[i] == std::byte{0});
  const std::vector<double> values{-0.0, 1e-310, std::numeric_limits<double>::max(), 3.25};
  const std::vector<double> back = decode_f64(encode_f64(values));
  CHECK(std::memcmp(back.data(), values.data(), values.size() * sizeof(double)) == 0);
  CHECK(kind_of([] { decode_f64(std::vector<std::byte>(7)); }) == ErrorKind::io);
}

TEST_CASE("dataset round trip and layout") {
  adeuq::test::TempDir dir;
  const PipelineConfig config = small_config();
  const Dataset ds = generate_training_set(config, 1);
  const DatasetWriteResult written = write_dataset(dir.path(), ds);
  CHECK(written.records == 3);
  CHECK(written.bytes == 3 * (2 + 30) * 8);
  CHECK(fs::file_size(dir / "data.bin") == written.bytes);

  const std::vector<double> flat = decode_f64(read_binary_file(dir / "data.bin"));
  CHECK(flat[0] == ds.records[0].xi[0]);
  CHECK(flat[2 + 7] == ds.records[0].solution.values()[7]);
  CHECK(flat[32 + 1] == ds.records[1].xi[1]);

  const Dataset back = read_dataset(dir.path());
  CHECK(back.manifest.seed_base == ds.manifest.seed_base);
  CHECK(back.manifest.config.to_json_text() == config.to_json_text());
  REQUIRE(back.size() == 3);
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(back.records[s].xi == ds.records[s].xi);
    CHECK(back.records[s].solution.values() == ds.records[s].solution.values());
  }

  const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  CHECK(manifest["checksum"]["value"] == written.checksum);
  CHECK(manifest["format_version"] == 1);
  CHECK(manifest["config"]["pce"]["n_dim"] == 2);
}

TEST_CASE("dataset corruption and missing files") {
  adeuq::test::TempDir dir;
  write_dataset(dir.path(), generate_training_set(small_config(), 1));
  std::vector<std::byte> blob = read_binary_file(dir / "data.bin");
  blob[40] ^= std::byte{1};
  write_binary_file(dir / "data.bin", blob);
  CHECK(kind_of([&] { read_dataset(dir.path()); }) == ErrorKind::checksum);
  fs::remove(dir / "data.bin");
  CHECK(kind_of([&] { read_dataset(dir.path()); }) == ErrorKind::io);
  CHECK(kind_of([&] { read_dataset(dir / "nowhere"); }) == ErrorKind::io);
  write_text_file(dir / "manifest.json", "{}");
  CHECK(kind_of([&] { read_dataset(dir.path()); }) == ErrorKind::config);
}

TEST_CASE("checkpoint round trip") {
  adeuq::test::TempDir dir;
  const PipelineConfig config = small_config();
  Checkpoint cp{mlp_init(config.architecture(), 4), config, 0.125, {0.5, 0.25, 0.125}};
  write_checkpoint(dir.path(), cp);
  CHECK(fs::file_size(dir / "weights.bin") == config.architecture().parameter_count() * 8);
  CHECK(read_text_file(dir / "loss_history.csv") == "step,loss\n1,0.5\n2,0.25\n3,0.125\n");

  const Checkpoint back = read_checkpoint(dir.path());
  CHECK(back.model.flatten() == cp.model.flatten());
  CHECK(back.final_loss == 0.125);
  CHECK(back.loss_history == cp.loss_history);
  CHECK(back.config.to_json_text() == config.to_json_text());

  const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  CHECK(manifest["weight_count"] == config.architecture().weight_count());
  CHECK(manifest["multi_index"]["indices"] == "0,0;0,1;1,0");
  CHECK(manifest["n_terms"] == 3);
}

TEST_CASE("checkpoint integrity errors") {
  adeuq::test::TempDir dir;
  const PipelineConfig config = small_config();
  write_checkpoint(dir.path(), Checkpoint{mlp_init(config.architecture(), 4), config, 0.0, {}});

  std::vector<std::byte> blob = read_binary_file(dir / "weights.bin");
  blob[3] ^= std::byte{4};
  write_binary_file(dir / "weights.bin", blob);
  CHECK(kind_of([&] { read_checkpoint(dir.path()); }) == ErrorKind::checksum);
  blob[3] ^= std::byte{4};
  write_binary_file(dir / "weights.bin", blob);
  CHECK_NOTHROW(read_checkpoint(dir.path()));

  auto manifest = nlohmann::ordered_json::parse(read_text_file(dir / "manifest.json"));
  manifest["multi_index"]["sha256"] = sha256_hex(std::string_view("0,0;1,0;0,1"));
  write_text_file(dir / "manifest.json", manifest.dump(2));
  CHECK(kind_of([&] { read_checkpoint(dir.path()); }) == ErrorKind::manifest);
}

TEST_CASE("field CSV") {
  const std::vector<double> values{1.0, 2.0, 0.5, -0.25};
  CHECK(field_csv(TimeGrid(2, 1.0), SpatialGrid(2), values) ==
        "t,z,value\n0,0,1\n0,1,2\n1,0,0.5\n1,1,-0.25\n");
  CHECK_THROWS_AS(field_csv(TimeGrid(2), SpatialGrid(3), values), Error);
}

TEST_CASE("report JSON schema") {
  EvalReport r;
  r.mse = 0.5;
  r.train_mse = std::nan("");
  r.relative_mse = 0.25;
  r.mean_field_rmse = 0.1;
  r.mc_mean_range = 2.0;
  r.std_field_rmse = 0.05;
  r.mc_std_range = 0.0;
  r.loss_history = {1.0, 0.5};
  const auto doc = nlohmann::json::parse(report_json(r));
  for (const char* key : {"mse", "relative_mse", "mean_field_rmse", "std_field_rmse", "loss_history",
                          "weight_count", "parameter_count"})
    CHECK(doc.contains(key));
  CHECK(doc["train_mse"].is_null());
  CHECK(doc["mean_field_rmse_fraction"] == 0.05);
  CHECK(doc["std_field_rmse_fraction"].is_null());
  CHECK(doc["loss_history"].size() == 2);
}

TEST_CASE("writes to unwritable locations are I/O errors") {
  CHECK(kind_of([] { write_text_file("/proc/adeuq-nope/x.txt", "x"); }) == ErrorKind::io);
  CHECK(kind_of([] { read_text_file("/nonexistent/adeuq.txt"); }) == ErrorKind::io);
}
