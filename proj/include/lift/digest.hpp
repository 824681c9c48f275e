#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace lift {

/// SHA-256 digest value.
class Digest {
 public:
  using Bytes = std::array<std::uint8_t, 32>;

  Digest() = default;
  explicit Digest(const Bytes& bytes) : bytes_(bytes) {}

  const Bytes& bytes() const { return bytes_; }
  std::string hex() const;
  /// First 8 bytes as a big-endian integer; used for seeding.
  std::uint64_t prefix64() const;

  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;

 private:
  Bytes bytes_{};
};

/// Incremental SHA-256. Fields fed through `field()` are length-prefixed so
/// ("ab", "c") and ("a", "bc") hash differently.
class Hasher {
 public:
  Hasher();
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  Hasher& update(std::string_view bytes);
  Hasher& field(std::string_view bytes);
  Digest finish();

 private:
  struct Impl;
  Impl* impl_;
};

Digest sha256(std::string_view bytes);

}  // namespace lift
