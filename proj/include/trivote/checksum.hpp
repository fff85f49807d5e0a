#ifndef TRIVOTE_CHECKSUM_HPP
#define TRIVOTE_CHECKSUM_HPP

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace trivote {

// Incremental SHA-256 (OpenSSL EVP).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t size);
  void update(std::string_view s) { update(s.data(), s.size()); }
  // Lowercase hex; the object must not be updated afterwards.
  std::string hex_digest();

 private:
  struct Ctx;
  std::unique_ptr<Ctx> ctx_;
};

// Streams `path` into `hash`. Throws ConfigError when it cannot be read.
void hash_file(Sha256& hash, const std::filesystem::path& path);

}  // namespace trivote

#endif  // TRIVOTE_CHECKSUM_HPP
