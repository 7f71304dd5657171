#include "walklab/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "walklab/errors.hpp"

namespace walklab {

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_number(long long v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_number(int v) {
  return format_number(static_cast<long long>(v));
}

std::uint64_t fnv1a_64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

namespace {

void append_field(std::string& buf, const std::string& field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) {
    buf += field;
    return;
  }
  buf += '"';
  for (char c : field) {
    if (c == '"') buf += '"';
    buf += c;
  }
  buf += '"';
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> header)
    : width_(header.size()) {
  if (header.empty()) throw ValidationError("CsvWriter: empty header");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_)
    throw ValidationError("CsvWriter: row width " +
                          std::to_string(fields.size()) +
                          " does not match header width " +
                          std::to_string(width_));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) buf_ += ',';
    append_field(buf_, fields[i]);
  }
  buf_ += '\n';
}

std::uint64_t CsvWriter::write(const std::string& path) const {
  return write_text_artifact(path, buf_);
}

std::uint64_t write_text_artifact(const std::string& path,
                                  std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw ValidationError("failed writing output file: " + path);
  return fnv1a_64(text);
}

std::uint64_t hash_config(const nlohmann::json& config) {
  return fnv1a_64(config.dump());
}

std::string write_manifest(const std::string& out_dir,
                           const ManifestInfo& info) {
  nlohmann::json m;
  m["tool"] = "walklab";
  m["version"] = "1.0.0";
  m["command"] = info.command;
  m["config"] = info.config_echo;
  m["config_hash"] = hex64(info.config_hash);
  m["seed_used"] = info.seed_used;
  m["threads"] = info.threads;
  m["wall_time_s"] = info.wall_time_s;
  nlohmann::json arts = nlohmann::json::object();
  for (const auto& [name, hash] : info.artifacts) arts[name] = hex64(hash);
  m["artifacts"] = arts;
  const std::string path = out_dir + "/manifest.json";
  write_text_artifact(path, m.dump(2) + "\n");
  return path;
}

}  // namespace walklab
