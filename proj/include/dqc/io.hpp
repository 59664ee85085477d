#pragma once

// Output files: CSV series, raw float64 grids with a JSON sidecar, and the
// run manifest.

#include "dqc/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dqc {

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Full-precision CSV writer; rows are flushed on close.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(const std::string& v);
  void end_row();
  std::string str() const { return out_; }
  const std::filesystem::path& path() const { return path_; }
  /// Writes the file and returns its path.
  std::filesystem::path close();

private:
  void sep();
  std::filesystem::path path_;
  std::string out_;
  bool row_started_ = false;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

/// Writes `values` (node order, row j = 0..Ny, Nx per row) as little-endian
/// float64 to `stem`.bin and a sidecar `stem`.json. Returns both paths.
std::vector<std::filesystem::path> write_grid(const std::filesystem::path& dir, const std::string& stem,
                                              const StripGeometry& g, const Vector& values, double time,
                                              const std::string& quantity);

std::vector<double> read_raw_float64(const std::filesystem::path& path);
void write_raw_float64(const std::filesystem::path& path, const Vector& values);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Records what a run produced; written as manifest.json.
class RunManifest {
public:
  RunManifest(std::string command, std::string config_canonical);

  void add_file(const std::filesystem::path& p);
  void add_files(const std::vector<std::filesystem::path>& ps) {
    for (const auto& p : ps) add_file(p);
  }
  void stage(const std::string& name, const std::string& status, const std::string& detail = "");
  const std::string& config_hash() const { return hash_; }
  /// Hashes every listed file and writes dir/manifest.json.
  std::filesystem::path write(const std::filesystem::path& dir, int exit_code);

private:
  struct Stage {
    std::string name, status, detail;
  };
  std::string command_;
  std::string hash_;
  std::string started_;
  std::vector<std::filesystem::path> files_;
  std::vector<Stage> stages_;
};

std::string utc_timestamp();
const char* version_string();

}  // namespace dqc
