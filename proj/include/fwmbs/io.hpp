#pragma once

// Artifact output: CSV tables with unit-annotated headers, results.json and
// manifest.json. Every file written through an ArtifactWriter carries the
// config hash and is listed in the manifest.

#include "fwmbs/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fwmbs {

/// 64-bit FNV-1a hash.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest round-trip decimal text of a double (deterministic across runs).
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// A table with a header row like "t (ps)". Cells are text so label columns can mix with numbers.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CsvTable: empty header");
  }

  CsvTable& row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
      throw std::invalid_argument("CsvTable: row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
    return *this;
  }

  CsvTable& row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    return row(std::move(cells));
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  void write(std::ostream& out, const std::string& config_hash) const {
    out << "# config_hash: " << config_hash << '\n';
    write_line(out, header_);
    for (const auto& r : rows_) write_line(out, r);
  }

 private:
  static void write_line(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out << ',';
      out << cells[k];
    }
    out << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes the files of one run into a directory and keeps the manifest.
class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, std::string config_hash)
      : dir_(std::move(dir)), hash_(std::move(config_hash)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  const std::filesystem::path& directory() const { return dir_; }
  const std::string& config_hash() const { return hash_; }

  void csv(const std::string& name, const CsvTable& table, const std::string& description) {
    std::ofstream out(open(name));
    table.write(out, hash_);
    finish(out, name, description);
  }

  void json(const std::string& name, nlohmann::json doc, const std::string& description) {
    doc["config_hash"] = hash_;
    std::ofstream out(open(name));
    out << doc.dump(2) << '\n';
    finish(out, name, description);
  }

  /// manifest.json: every file written so far, in order.
  void manifest(const nlohmann::json& extra = nlohmann::json::object()) const {
    nlohmann::json doc = extra;
    doc["config_hash"] = hash_;
    doc["files"] = files_;
    std::ofstream out(dir_ / "manifest.json");
    out << doc.dump(2) << '\n';
    if (!out) throw NumericalError("io", "failed to write " + (dir_ / "manifest.json").string());
  }

  const nlohmann::json& files() const { return files_; }

 private:
  std::filesystem::path open(const std::string& name) {
    for (const auto& f : files_)
      if (f["path"] == name) throw std::logic_error("ArtifactWriter: " + name + " written twice");
    return dir_ / name;
  }

  void finish(std::ofstream& out, const std::string& name, const std::string& description) {
    out.close();
    if (!out) throw NumericalError("io", "failed to write " + (dir_ / name).string());
    files_.push_back({{"path", name}, {"description", description}});
  }

  std::filesystem::path dir_;
  std::string hash_;
  nlohmann::json files_ = nlohmann::json::array();
};

}  // namespace fwmbs
