#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adeuq/config.hpp"
#include "adeuq/dataset.hpp"
#include "adeuq/pipeline.hpp"
#include "adeuq/surrogate.hpp"

namespace adeuq {

inline constexpr int checkpoint_format_version = 1;

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::string_view text);

/// Little-endian float64 encoding.
std::vector<std::byte> encode_f64(std::span<const double> values);
std::vector<double> decode_f64(std::span<const std::byte> bytes);

std::vector<std::byte> read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::span<const std::byte> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Dataset directory: manifest.json + data.bin. data.bin holds n_s records
// of n_dim xi values followed by n_t * n_z solution values (t-major), all
// little-endian float64.

std::vector<std::byte> encode_dataset_blob(const Dataset& dataset);
std::string dataset_manifest_json(const DatasetManifest& manifest, const std::string& checksum);

struct DatasetWriteResult {
  std::size_t records = 0;
  std::size_t bytes = 0;
  std::string checksum;
};
DatasetWriteResult write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// ErrorKind::io when files are missing, ErrorKind::checksum when data.bin
/// does not match the manifest, ErrorKind::config for a bad manifest.
Dataset read_dataset(const std::filesystem::path& dir);
DatasetManifest read_dataset_manifest(const std::filesystem::path& dir);

// Checkpoint directory: manifest.json + weights.bin (+ loss_history.csv).
// weights.bin is W1 (out x in, row-major), b1, W2, b2, ..., W_out, b_out as
// little-endian float64.

struct Checkpoint {
  MLPModel model;
  PipelineConfig config;  // training configuration, incl. grid and PCE set
  double final_loss = 0.0;
  std::vector<double> loss_history;
};

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& dir);

/// CSV with header "t,z,value", one row per grid point, t-major.
std::string field_csv(const TimeGrid& time, const SpatialGrid& space,
                      std::span<const double> values);
void write_field_csv(const std::filesystem::path& path, const TimeGrid& time,
                     const SpatialGrid& space, std::span<const double> values);

/// CSV "step,loss".
std::string loss_history_csv(std::span<const double> history);

std::string report_json(const EvalReport& report);

}  // namespace adeuq
