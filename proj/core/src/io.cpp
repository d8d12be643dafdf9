#include "adeuq/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <system_error>

#include "adeuq/error.hpp"

namespace adeuq {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) fail(ErrorKind::numerical, "cannot format double");
  return std::string(buf.data(), end);
}

std::string sha256_hex(std::span<const std::byte> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::io, "SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::as_bytes(std::span(text.data(), text.size())));
}

std::vector<std::byte> encode_f64(std::span<const double> values) {
  std::vector<std::byte> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (std::size_t b = 0; b < 8; ++b)
      out[i * 8 + b] = static_cast<std::byte>((bits >> (8 * b)) & 0xff);
  }
  return out;
}

std::vector<double> decode_f64(std::span<const std::byte> bytes) {
  if (bytes.size() % 8 != 0) fail(ErrorKind::io, "float64 blob length is not a multiple of 8");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(std::to_integer<unsigned>(bytes[i * 8 + b])) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

std::vector<std::byte> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

namespace {

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) fail(ErrorKind::io, "cannot create directory '" + parent.string() + "': " + ec.message());
}

void write_bytes(const fs::path& path, const char* data, std::size_t size) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(data, static_cast<std::streamsize>(size));
  out.flush();
  if (!out) fail(ErrorKind::io, "write to '" + path.string() + "' failed");
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

json config_json(const PipelineConfig& config) { return json::parse(config.to_json_text()); }

template <typename T>
T field(const json& doc, const char* key, const fs::path& source) {
  const auto it = doc.find(key);
  if (it == doc.end())
    fail(ErrorKind::config, "'" + source.string() + "' lacks key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::config, "'" + source.string() + "' has a malformed '" + key + "'");
  }
}

}  // namespace

void write_binary_file(const fs::path& path, std::span<const std::byte> bytes) {
  write_bytes(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  write_bytes(path, text.data(), text.size());
}

std::vector<std::byte> encode_dataset_blob(const Dataset& dataset) {
  std::vector<double> flat;
  flat.reserve(dataset.size() * dataset.manifest.record_size());
  for (const Record& r : dataset.records) {
    flat.insert(flat.end(), r.xi.begin(), r.xi.end());
    flat.insert(flat.end(), r.solution.values().begin(), r.solution.values().end());
  }
  return encode_f64(flat);
}

std::string dataset_manifest_json(const DatasetManifest& manifest, const std::string& checksum) {
  json doc;
  doc["kind"] = "adeuq-dataset";
  doc["format_version"] = manifest.format_version;
  doc["n_samples"] = manifest.n_samples;
  doc["seed_base"] = manifest.seed_base;
  doc["n_dim"] = manifest.config.pce.n_dim;
  doc["n_t"] = manifest.config.grid.n_t;
  doc["n_z"] = manifest.config.grid.n_z;
  doc["record_values"] = manifest.record_size();
  doc["layout"] = "per record: n_dim xi then n_t*n_z T (t-major), float64 little-endian";
  doc["checksum"] = {{"algorithm", "sha256"}, {"value", checksum}};
  doc["config"] = config_json(manifest.config);
  return doc.dump(2) + "\n";
}

DatasetWriteResult write_dataset(const fs::path& dir, const Dataset& dataset) {
  dataset.validate();
  const std::vector<std::byte> blob = encode_dataset_blob(dataset);
  DatasetWriteResult result;
  result.records = dataset.size();
  result.bytes = blob.size();
  result.checksum = sha256_hex(blob);
  write_binary_file(dir / "data.bin", blob);
  write_text_file(dir / "manifest.json", dataset_manifest_json(dataset.manifest, result.checksum));
  return result;
}

DatasetManifest read_dataset_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  const json doc = parse_json_file(path);
  if (field<std::string>(doc, "kind", path) != "adeuq-dataset")
    fail(ErrorKind::config, "'" + path.string() + "' is not a dataset manifest");
  DatasetManifest manifest;
  manifest.format_version = field<int>(doc, "format_version", path);
  if (manifest.format_version != dataset_format_version)
    fail(ErrorKind::config, "unsupported dataset format_version " +
                                std::to_string(manifest.format_version));
  manifest.n_samples = field<std::size_t>(doc, "n_samples", path);
  manifest.seed_base = field<std::uint64_t>(doc, "seed_base", path);
  manifest.config = PipelineConfig::from_json_text(field<json>(doc, "config", path).dump());
  manifest.config.validate();
  return manifest;
}

Dataset read_dataset(const fs::path& dir) {
  Dataset dataset;
  dataset.manifest = read_dataset_manifest(dir);
  const fs::path manifest_path = dir / "manifest.json";
  const json doc = parse_json_file(manifest_path);
  const std::string expected =
      field<std::string>(field<json>(doc, "checksum", manifest_path), "value", manifest_path);

  const std::vector<std::byte> blob = read_binary_file(dir / "data.bin");
  const std::string actual = sha256_hex(blob);
  if (actual != expected)
    fail(ErrorKind::checksum, "data.bin checksum mismatch: manifest " + expected + ", file " + actual);

  const std::vector<double> flat = decode_f64(blob);
  const std::size_t record = dataset.manifest.record_size();
  if (flat.size() != record * dataset.manifest.n_samples)
    fail(ErrorKind::checksum, "data.bin size does not match the manifest");

  const PipelineConfig& cfg = dataset.manifest.config;
  const std::size_t n_dim = cfg.pce.n_dim;
  dataset.records.reserve(dataset.manifest.n_samples);
  for (std::size_t s = 0; s < dataset.manifest.n_samples; ++s) {
    const auto begin = flat.begin() + static_cast<std::ptrdiff_t>(s * record);
    RandomVector xi(begin, begin + static_cast<std::ptrdiff_t>(n_dim));
    std::vector<double> values(begin + static_cast<std::ptrdiff_t>(n_dim),
                               begin + static_cast<std::ptrdiff_t>(record));
    dataset.records.push_back(
        Record{std::move(xi), SolutionField(cfg.time_grid(), cfg.spatial_grid(), std::move(values))});
  }
  return dataset;
}

void write_checkpoint(const fs::path& dir, const Checkpoint& checkpoint) {
  const MLPModel& model = checkpoint.model;
  const PipelineConfig& cfg = checkpoint.config;
  const MultiIndexSet set = cfg.multi_index_set();
  const std::vector<std::byte> blob = encode_f64(model.flatten());

  json doc;
  doc["kind"] = "adeuq-checkpoint";
  doc["format_version"] = checkpoint_format_version;
  doc["architecture"] = {{"in_dim", model.arch.in_dim},
                         {"hidden_layers", model.arch.hidden_layers},
                         {"hidden_units", model.arch.hidden_units},
                         {"out_dim", model.arch.out_dim},
                         {"hidden_activation", "relu"},
                         {"output_activation", "identity"}};
  doc["n_terms"] = set.size();
  doc["multi_index"] = {{"n_dim", set.n_dim()},
                        {"max_degree", set.max_degree()},
                        {"ordering", "total-degree-then-lex"},
                        {"indices", set.canonical_string()},
                        {"sha256", sha256_hex(set.canonical_string())}};
  doc["seed"] = cfg.run.seed;
  doc["train"] = {{"lr", cfg.train.lr},         {"beta1", cfg.train.beta1},
                  {"beta2", cfg.train.beta2},   {"eps", cfg.train.eps},
                  {"epochs", cfg.train.epochs}, {"steps", checkpoint.loss_history.size()}};
  doc["final_loss"] = checkpoint.final_loss;
  doc["weight_count"] = model.arch.weight_count();
  doc["bias_count"] = model.arch.bias_count();
  doc["parameter_count"] = model.arch.parameter_count();
  doc["weights"] = {{"file", "weights.bin"},
                    {"layout", "W1 (out x in, row-major), b1, ..., W_out, b_out; float64 LE"},
                    {"values", model.arch.parameter_count()},
                    {"sha256", sha256_hex(blob)}};
  doc["config"] = config_json(cfg);

  write_binary_file(dir / "weights.bin", blob);
  write_text_file(dir / "manifest.json", doc.dump(2) + "\n");
  write_text_file(dir / "loss_history.csv", loss_history_csv(checkpoint.loss_history));
}

Checkpoint read_checkpoint(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  const json doc = parse_json_file(path);
  if (field<std::string>(doc, "kind", path) != "adeuq-checkpoint")
    fail(ErrorKind::config, "'" + path.string() + "' is not a checkpoint manifest");
  if (field<int>(doc, "format_version", path) != checkpoint_format_version)
    fail(ErrorKind::config, "unsupported checkpoint format_version");

  Checkpoint checkpoint;
  checkpoint.config = PipelineConfig::from_json_text(field<json>(doc, "config", path).dump());
  checkpoint.config.validate();
  checkpoint.final_loss = field<double>(doc, "final_loss", path);

  const json arch = field<json>(doc, "architecture", path);
  MLPArchitecture a;
  a.in_dim = field<std::size_t>(arch, "in_dim", path);
  a.hidden_layers = field<std::size_t>(arch, "hidden_layers", path);
  a.hidden_units = field<std::size_t>(arch, "hidden_units", path);
  a.out_dim = field<std::size_t>(arch, "out_dim", path);
  a.validate();

  const MultiIndexSet set = checkpoint.config.multi_index_set();
  const json mi = field<json>(doc, "multi_index", path);
  if (field<std::string>(mi, "sha256", path) != sha256_hex(set.canonical_string()) ||
      a.out_dim != set.size())
    fail(ErrorKind::manifest, "checkpoint multi-index ordering does not match its config");

  const std::vector<std::byte> blob = read_binary_file(dir / "weights.bin");
  const json weights = field<json>(doc, "weights", path);
  if (sha256_hex(blob) != field<std::string>(weights, "sha256", path))
    fail(ErrorKind::checksum, "weights.bin checksum mismatch");

  checkpoint.model = MLPModel::zeros(a);
  checkpoint.model.unflatten(decode_f64(blob));

  const fs::path history = dir / "loss_history.csv";
  if (fs::exists(history)) {
    std::istringstream in(read_text_file(history));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      checkpoint.loss_history.push_back(std::stod(line.substr(comma + 1)));
    }
  }
  return checkpoint;
}

std::string field_csv(const TimeGrid& time, const SpatialGrid& space,
                      std::span<const double> values) {
  require(values.size() == time.size() * space.size(), "field_csv: value count mismatch");
  std::string out = "t,z,value\n";
  for (std::size_t k = 0; k < time.size(); ++k) {
    for (std::size_t m = 0; m < space.size(); ++m) {
      out += format_double(time.point(k));
      out += ',';
      out += format_double(space.point(m));
      out += ',';
      out += format_double(values[k * space.size() + m]);
      out += '\n';
    }
  }
  return out;
}

void write_field_csv(const fs::path& path, const TimeGrid& time, const SpatialGrid& space,
                     std::span<const double> values) {
  write_text_file(path, field_csv(time, space, values));
}

std::string loss_history_csv(std::span<const double> history) {
  std::string out = "step,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += format_double(history[i]);
    out += '\n';
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json doc;
  doc["mse"] = number(report.mse);
  doc["train_mse"] = number(report.train_mse);
  doc["relative_mse"] = number(report.relative_mse);
  doc["target_variance"] = number(report.target_variance);
  doc["zero_model_mse"] = number(report.zero_model_mse);
  doc["mean_field_rmse"] = number(report.mean_field_rmse);
  doc["std_field_rmse"] = number(report.std_field_rmse);
  doc["mc_mean_range"] = number(report.mc_mean_range);
  doc["mc_std_range"] = number(report.mc_std_range);
  doc["mean_field_rmse_fraction"] =
      number(report.mc_mean_range > 0 ? report.mean_field_rmse / report.mc_mean_range : NAN);
  doc["std_field_rmse_fraction"] =
      number(report.mc_std_range > 0 ? report.std_field_rmse / report.mc_std_range : NAN);
  doc["n_heldout"] = report.n_heldout;
  doc["n_mc"] = report.n_mc;
  doc["weight_count"] = report.weight_count;
  doc["parameter_count"] = report.parameter_count;
  json history = json::array();
  for (const double v : report.loss_history) history.push_back(number(v));
  doc["loss_history"] = std::move(history);
  return doc.dump(2) + "\n";
}

}  // namespace adeuq
