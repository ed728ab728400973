#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "she/errors.hpp"

namespace she {

using json = nlohmann::json;

// FNV-1a over bytes; stable across platforms for manifest hashing
inline std::uint64_t content_hash(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) body_ << ',';
      body_ << columns_[i];
    }
    body_ << '\n';
  }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
      throw std::invalid_argument("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) body_ << ',';
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
      body_ << buf;
    }
    body_ << '\n';
  }

  std::string str() const { return body_.str(); }

 private:
  std::vector<std::string> columns_;
  std::ostringstream body_;
};

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << data;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Run manifest: reproducibility record of inputs and output hashes.
class Manifest {
 public:
  Manifest(std::string preset, std::uint64_t seed, const std::string& config_text)
      : preset_(std::move(preset)), seed_(seed) {
    config_hash_ = hash_hex(content_hash(config_text));
    config_text_ = config_text;
  }

  void add_artifact(const std::filesystem::path& path, const std::string& data) {
    artifacts_.push_back({path.filename().string(), hash_hex(content_hash(data))});
  }

  std::string str() const {
    json j;
    j["preset"] = preset_;
    j["seed"] = seed_;
    j["config_hash"] = config_hash_;
    j["config"] = config_text_;
    j["artifacts"] = json::array();
    for (const auto& [name, hash] : artifacts_)
      j["artifacts"].push_back({{"file", name}, {"hash", hash}});
    return j.dump(2) + "\n";
  }

 private:
  std::string preset_;
  std::uint64_t seed_ = 0;
  std::string config_hash_;
  std::string config_text_;
  std::vector<std::pair<std::string, std::string>> artifacts_;
};

}  // namespace she
