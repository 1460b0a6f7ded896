#include "risdelay/harness/csv.hpp"

#include <charconv>
#include <cmath>

#include "risdelay/common.hpp"

namespace risdelay::harness {

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns)
    : columns_(std::move(columns)) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::trunc);
  if (!out_) throw ConfigError("cannot write " + path.string());
  write(columns_);
}

void CsvWriter::write(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) {
    throw InvalidInput("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(columns_.size()));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape(cells[i]);
  }
  out_ << '\n';
  out_.flush();
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string cell(const std::optional<double>& v) { return v ? cell(*v) : std::string(); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(const std::string& v) { return v; }
std::string cell(const char* v) { return v; }

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += cell(v[i]);
  }
  return out;
}

std::vector<std::string> split_line(std::istream& in, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  ok = false;
  char c;
  bool any = false;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return fields;
  fields.push_back(std::move(field));
  ok = true;
  return fields;
}

}  // namespace

std::string cell(const std::vector<double>& v) { return join(v); }
std::string cell(const std::vector<std::int64_t>& v) { return join(v); }
std::string cell(const std::vector<int>& v) { return join(v); }

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  bool ok = false;
  const auto header = split_line(in, ok);
  if (!ok) throw ConfigError(path.string() + " is empty");
  std::vector<CsvRow> rows;
  while (true) {
    auto fields = split_line(in, ok);
    if (!ok) break;
    if (fields.size() != header.size()) {
      throw ConfigError(path.string() + ": row " + std::to_string(rows.size() + 1) +
                        " has the wrong number of fields");
    }
    CsvRow row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = std::move(fields[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace risdelay::harness
