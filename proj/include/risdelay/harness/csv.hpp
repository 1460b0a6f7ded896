#pragma once

// Minimal RFC-4180-style CSV writing and reading for harness outputs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace risdelay::harness {

class CsvWriter {
 public:
  // Creates parent directories and writes the header row.
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns);

  // Throws InvalidInput when the cell count differs from the header.
  void write(const std::vector<std::string>& cells);
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::ofstream out_;
  std::vector<std::string> columns_;
};

// Cell formatting. Doubles use round-trip precision; empty optionals and
// NaN become empty fields; lists are joined with ';'.
std::string cell(double v);
std::string cell(const std::optional<double>& v);
std::string cell(std::int64_t v);
std::string cell(std::uint64_t v);
std::string cell(int v);
std::string cell(const std::string& v);
std::string cell(const char* v);
std::string cell(const std::vector<double>& v);
std::string cell(const std::vector<std::int64_t>& v);
std::string cell(const std::vector<int>& v);

std::string escape(const std::string& field);

using CsvRow = std::map<std::string, std::string>;

// Reads a header-row CSV written by CsvWriter.
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

}  // namespace risdelay::harness
