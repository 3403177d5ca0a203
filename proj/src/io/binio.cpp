#include "gdlspg/io/binio.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace gdlspg {

std::string ByteSource::str() {
  const std::uint64_t n = u64();
  need(n);
  std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
  pos_ += n;
  return s;
}

std::vector<double> ByteSource::f64s() {
  const std::uint64_t n = u64();
  need(n * sizeof(double));
  std::vector<double> v(n);
  std::memcpy(v.data(), buf_.data() + pos_, n * sizeof(double));
  pos_ += n * sizeof(double);
  return v;
}

void ByteSource::need(std::size_t n) {
  if (pos_ + n > buf_.size()) throw std::runtime_error("binary read: unexpected end of data");
}

std::vector<std::byte> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw std::runtime_error("failed reading " + path);
  return bytes;
}

void atomic_write_bytes(const std::string& path, std::span<const std::byte> bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("failed renaming " + tmp + " to " + path + ": " + ec.message());
}

void atomic_write_text(const std::string& path, const std::string& text) {
  atomic_write_bytes(path, std::as_bytes(std::span(text.data(), text.size())));
}

}  // namespace gdlspg
