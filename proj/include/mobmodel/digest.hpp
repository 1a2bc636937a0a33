#ifndef MOBMODEL_DIGEST_HPP
#define MOBMODEL_DIGEST_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "mobmodel/errors.hpp"

namespace mobmodel {

// FNV-1a 64. Content fingerprints for provenance and run manifests; not
// cryptographic.
class Fnv1a64 {
public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001B3ULL;
    }
  }

  std::uint64_t value() const { return hash_; }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t h = hash_;
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    return out;
  }

private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

inline std::string digest_bytes(std::string_view bytes) {
  Fnv1a64 d;
  d.update(bytes);
  return d.hex();
}

inline std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open file for digest: " + path);
  Fnv1a64 d;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    d.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  return d.hex();
}

}  // namespace mobmodel

#endif  // MOBMODEL_DIGEST_HPP
