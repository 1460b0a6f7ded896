#pragma once

// Named-tensor checkpoint: `<stem>.json` manifest plus `<stem>.bin` holding
// the tensors back to back as little-endian doubles.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace risdelay::nn {

// 64-bit FNV-1a over the raw bytes of the values.
std::uint64_t fnv1a(std::span<const double> values);
std::string hash_hex(std::span<const double> values);

class Archive {
 public:
  nlohmann::json meta = nlohmann::json::object();

  void put(const std::string& name, std::span<const double> values);
  bool has(const std::string& name) const;
  // Throws ConfigError when absent.
  const std::vector<double>& get(const std::string& name) const;
  const std::vector<std::pair<std::string, std::vector<double>>>& tensors() const {
    return tensors_;
  }

 private:
  std::vector<std::pair<std::string, std::vector<double>>> tensors_;
};

void save_archive(const std::filesystem::path& stem, const Archive& archive);
// Throws ConfigError for a missing, truncated or hash-mismatched archive.
Archive load_archive(const std::filesystem::path& stem);
bool archive_exists(const std::filesystem::path& stem);

}  // namespace risdelay::nn
