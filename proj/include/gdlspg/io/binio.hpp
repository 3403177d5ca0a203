#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are not supported");

namespace gdlspg {

inline std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Append-only byte buffer used both for hashing and for binary file payloads.
class ByteSink {
public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void f64s(std::span<const double> v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }

  const std::vector<std::byte>& bytes() const { return buf_; }
  std::uint64_t digest() const { return fnv1a64(buf_); }

private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::byte> buf_;
};

// Cursor over a byte buffer; throws std::runtime_error on underrun.
class ByteSource {
public:
  explicit ByteSource(std::span<const std::byte> bytes) : buf_(bytes) {}

  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  std::int64_t i64() { return get<std::int64_t>(); }
  double f64() { return get<double>(); }
  std::string str();
  std::vector<double> f64s();
  bool exhausted() const { return pos_ == buf_.size(); }

private:
  template <typename T>
  T get() {
    T v;
    need(sizeof v);
    std::memcpy(&v, buf_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  void need(std::size_t n);

  std::span<const std::byte> buf_;
  std::size_t pos_ = 0;
};

// Whole-file helpers; writes go to a temp file first, then rename.
std::vector<std::byte> read_file_bytes(const std::string& path);
void atomic_write_bytes(const std::string& path, std::span<const std::byte> bytes);
void atomic_write_text(const std::string& path, const std::string& text);

}  // namespace gdlspg
