#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mcm {

std::string sha256_hex(std::string_view data);

// Pretty JSON with a trailing newline; the same bytes for the same document.
std::string json_text(const nlohmann::ordered_json& j);

// One output directory per run.  Every artifact written through it is listed in
// manifest.json with its size and SHA-256 digest, in write order.
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path dir);

  void write(const std::string& name, std::string_view content);
  void write_json(const std::string& name, const nlohmann::ordered_json& j) { write(name, json_text(j)); }
  // Writes manifest.json; later writes are rejected.
  void finalize(const nlohmann::ordered_json& meta = nlohmann::ordered_json::object());

  const std::filesystem::path& path() const { return dir_; }

 private:
  struct Entry {
    std::string name;
    std::size_t bytes;
    std::string sha256;
  };
  std::filesystem::path dir_;
  std::vector<Entry> entries_;
  bool finalized_ = false;
};

}  // namespace mcm
