#include "risdelay/nn/archive.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "risdelay/common.hpp"

namespace risdelay::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "archive format assumes little-endian");

constexpr const char* kFormat = "risdelay-archive";
constexpr int kVersion = 1;

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

}  // namespace

std::uint64_t fnv1a(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  for (std::size_t i = 0; i < values.size_bytes(); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::span<const double> values) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(values)));
  return buf;
}

void Archive::put(const std::string& name, std::span<const double> values) {
  for (auto& [n, v] : tensors_) {
    if (n == name) {
      v.assign(values.begin(), values.end());
      return;
    }
  }
  tensors_.emplace_back(name, std::vector<double>(values.begin(), values.end()));
}

bool Archive::has(const std::string& name) const {
  for (const auto& [n, v] : tensors_) {
    if (n == name) return true;
  }
  return false;
}

const std::vector<double>& Archive::get(const std::string& name) const {
  for (const auto& [n, v] : tensors_) {
    if (n == name) return v;
  }
  throw ConfigError("archive has no tensor named '" + name + "'");
}

void save_archive(const std::filesystem::path& stem, const Archive& archive) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  nlohmann::json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["meta"] = archive.meta;
  nlohmann::json entries = nlohmann::json::array();
  std::size_t offset = 0;
  std::ofstream bin(with_ext(stem, ".bin"), std::ios::binary | std::ios::trunc);
  if (!bin) throw ConfigError("cannot write " + with_ext(stem, ".bin").string());
  for (const auto& [name, values] : archive.tensors()) {
    entries.push_back({{"name", name},
                       {"offset", offset},
                       {"size", values.size()},
                       {"fnv1a", hash_hex(values)}});
    bin.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
    offset += values.size();
  }
  bin.close();
  manifest["tensors"] = entries;
  std::ofstream js(with_ext(stem, ".json"), std::ios::trunc);
  if (!js) throw ConfigError("cannot write " + with_ext(stem, ".json").string());
  js << manifest.dump(2) << '\n';
}

bool archive_exists(const std::filesystem::path& stem) {
  return std::filesystem::exists(with_ext(stem, ".json")) &&
         std::filesystem::exists(with_ext(stem, ".bin"));
}

Archive load_archive(const std::filesystem::path& stem) {
  const auto json_path = with_ext(stem, ".json");
  const auto bin_path = with_ext(stem, ".bin");
  if (!archive_exists(stem)) throw ConfigError("checkpoint not found: " + stem.string());
  nlohmann::json manifest;
  try {
    std::ifstream js(json_path);
    js >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("corrupt checkpoint manifest " + json_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kFormat || manifest.value("version", 0) != kVersion) {
    throw ConfigError("unsupported checkpoint format in " + json_path.string());
  }
  std::ifstream bin(bin_path, std::ios::binary);
  std::stringstream buf;
  buf << bin.rdbuf();
  const std::string raw = buf.str();

  Archive a;
  a.meta = manifest.value("meta", nlohmann::json::object());
  for (const auto& e : manifest.at("tensors")) {
    const auto name = e.at("name").get<std::string>();
    const auto offset = e.at("offset").get<std::size_t>();
    const auto size = e.at("size").get<std::size_t>();
    if ((offset + size) * sizeof(double) > raw.size()) {
      throw ConfigError("checkpoint data truncated for tensor '" + name + "'");
    }
    std::vector<double> values(size);
    std::memcpy(values.data(), raw.data() + offset * sizeof(double), size * sizeof(double));
    if (hash_hex(values) != e.at("fnv1a").get<std::string>()) {
      throw ConfigError("checkpoint hash mismatch for tensor '" + name + "'");
    }
    a.put(name, values);
  }
  return a;
}

}  // namespace risdelay::nn
