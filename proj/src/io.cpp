#include "dqc/io.hpp"

#include <json.hpp>

#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#ifndef DQC_VERSION
#define DQC_VERSION "0.0.0"
#endif

namespace dqc {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << v;
  return o.str();
}

const char* version_string() { return DQC_VERSION; }

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ += (i ? "," : "") + header[i];
  out_ += '\n';
}

void CsvWriter::sep() {
  if (in_row_ >= columns_) throw std::logic_error("CsvWriter: too many values in row of " + path_.string());
  if (in_row_ > 0) out_ += ',';
  ++in_row_;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out_ += buf;
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
  sep();
  out_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  out_ += v;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("CsvWriter: short row in " + path_.string());
  out_ += '\n';
  in_row_ = 0;
}

fs::path CsvWriter::close() {
  write_text(path_, out_);
  return path_;
}

void write_raw_float64(const fs::path& path, const Vector& values) {
  std::string bytes(static_cast<std::size_t>(values.size()) * 8, '\0');
  for (Eigen::Index m = 0; m < values.size(); ++m) {
    std::uint64_t bits;
    const double d = values[m];
    std::memcpy(&bits, &d, 8);
    for (int b = 0; b < 8; ++b) bytes[static_cast<std::size_t>(m) * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  write_text(path, bytes);
}

std::vector<fs::path> write_grid(const fs::path& dir, const std::string& stem, const StripGeometry& g,
                                 const Vector& values, double time, const std::string& quantity) {
  if (values.size() != g.nodes()) throw ShapeError("write_grid: node vector has the wrong size");
  const fs::path bin = dir / (stem + ".bin");
  const fs::path side = dir / (stem + ".json");
  write_raw_float64(bin, values);
  nlohmann::json j;
  j["quantity"] = quantity;
  j["dims"] = {g.Ny() + 1, g.Nx()};
  j["layout"] = "row-major, rows y_j for j = 0..Ny, columns x_i for i = 0..Nx-1";
  j["dtype"] = "float64 little-endian";
  j["dx"] = g.hx();
  j["dy"] = g.hy();
  j["Lx"] = g.Lx();
  j["Ly"] = g.Ly();
  j["time"] = time;
  j["file"] = bin.filename().string();
  write_text(side, j.dump(2) + "\n");
  return {bin, side};
}

std::vector<double> read_raw_float64(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  if (bytes.size() % 8 != 0) throw std::runtime_error("'" + path.string() + "' is not a float64 array");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t m = 0; m < out.size(); ++m) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bytes[m * 8 + b]);
    std::memcpy(&out[m], &bits, 8);
  }
  return out;
}

RunManifest::RunManifest(std::string command, std::string config_canonical)
    : command_(std::move(command)), hash_(hex64(fnv1a64(config_canonical))), started_(utc_timestamp()) {}

void RunManifest::add_file(const fs::path& p) { files_.push_back(p); }

void RunManifest::stage(const std::string& name, const std::string& status, const std::string& detail) {
  stages_.push_back({name, status, detail});
}

fs::path RunManifest::write(const fs::path& dir, int exit_code) {
  nlohmann::json j;
  j["command"] = command_;
  j["config_hash"] = "fnv1a64:" + hash_;
  j["version"] = version_string();
  j["start"] = started_;
  j["end"] = utc_timestamp();
  j["exit_code"] = exit_code;
  j["files"] = nlohmann::json::array();
  for (const auto& f : files_) {
    nlohmann::json e;
    e["path"] = fs::relative(f, dir).generic_string();
    if (fs::exists(f)) {
      e["bytes"] = fs::file_size(f);
      e["fnv1a64"] = hex64(fnv1a64(read_bytes(f)));
    }
    j["files"].push_back(e);
  }
  j["stages"] = nlohmann::json::array();
  for (const auto& s : stages_) j["stages"].push_back({{"name", s.name}, {"status", s.status}, {"detail", s.detail}});
  const fs::path out = dir / "manifest.json";
  write_text(out, j.dump(2) + "\n");
  return out;
}

}  // namespace dqc
