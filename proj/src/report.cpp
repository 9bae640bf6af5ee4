#include "mcm/report.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace mcm {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

RunDirectory::RunDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void RunDirectory::write(const std::string& name, std::string_view content) {
  if (finalized_) throw std::logic_error("run directory already finalized");
  if (name == "manifest.json") throw std::invalid_argument("manifest.json is reserved");
  const auto target = dir_ / name;
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + target.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("short write to " + target.string());
  for (auto& e : entries_)
    if (e.name == name) {
      e = {name, content.size(), sha256_hex(content)};
      return;
    }
  entries_.push_back({name, content.size(), sha256_hex(content)});
}

void RunDirectory::finalize(const nlohmann::ordered_json& meta) {
  nlohmann::ordered_json m;
  m["meta"] = meta;
  auto& arts = m["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& e : entries_) arts.push_back({{"name", e.name}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  const auto text = json_text(m);
  std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write manifest");
  finalized_ = true;
}

}  // namespace mcm
