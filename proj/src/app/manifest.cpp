#include "matchrep/app/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "matchrep/error.hpp"
#include "matchrep/model/serialize.hpp"

namespace matchrep::app {

namespace {

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error("SHA-256 initialization failed");
    }
  }
  void update(const char* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error("SHA-256 final failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
};

}  // namespace

std::string sha256_bytes(const std::string& bytes) {
  Digest d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Digest d;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

void Manifest::write(const std::filesystem::path& out_dir) const {
  nlohmann::json j{{"format", "matchrep-manifest-v1"}, {"command", command}, {"config", config}};
  j["inputs"] = nlohmann::json::array();
  for (const auto& p : inputs) {
    j["inputs"].push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
  }
  j["outputs"] = nlohmann::json::array();
  for (const auto& p : outputs) {
    j["outputs"].push_back({{"path", p.generic_string()}, {"sha256", sha256_file(out_dir / p)}});
  }
  model::write_json_file(out_dir / "manifest.json", j);
}

nlohmann::json config_from_file(const std::filesystem::path& path) {
  nlohmann::json j = model::read_json_file(path);
  if (j.is_object() && j.value("format", std::string{}) == "matchrep-manifest-v1") {
    return j.at("config");
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  return j;
}

}  // namespace matchrep::app
