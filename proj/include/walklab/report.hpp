#pragma once

// Artifact emission: RFC-4180 CSV with shortest round-trip numbers, FNV-1a
// content hashing, and the run manifest.  Byte determinism matters here:
// identical inputs must produce identical files on any platform, so all
// formatting goes through std::to_chars and files are written in binary
// mode with LF line endings.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace walklab {

/// Shortest round-trip decimal form of a double (empty string for NaN,
/// which CSV renders as an empty field).
std::string format_number(double v);
std::string format_number(long long v);
std::string format_number(int v);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a_64(std::string_view bytes);

/// Lower-case hex form, zero-padded to 16 digits.
std::string hex64(std::uint64_t v);

/// Accumulates an RFC-4180 CSV document: comma separators, LF line ends,
/// quotes only where required.  Every row must match the header width.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return buf_; }

  /// Writes the document to `path` in binary mode and returns its FNV-1a.
  std::uint64_t write(const std::string& path) const;

 private:
  std::size_t width_;
  std::string buf_;
};

/// Writes pre-rendered text to `path` (binary mode) and returns its FNV-1a.
std::uint64_t write_text_artifact(const std::string& path,
                                  std::string_view text);

/// Canonical serialization used for config hashing: sorted keys, no
/// whitespace (nlohmann objects iterate in key order).
std::uint64_t hash_config(const nlohmann::json& config);

struct ManifestInfo {
  std::string command;
  nlohmann::json config_echo;
  std::uint64_t config_hash = 0;
  std::uint64_t seed_used = 0;
  int threads = 1;
  double wall_time_s = 0.0;
  /// (file name, content hash) for every artifact written by the run.
  std::vector<std::pair<std::string, std::uint64_t>> artifacts;
};

/// Writes manifest.json into `out_dir` and returns its full path.
std::string write_manifest(const std::string& out_dir,
                           const ManifestInfo& info);

}  // namespace walklab
