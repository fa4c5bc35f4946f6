#pragma once

#include "fame/common.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

// Little-endian primitive encoding shared by the binary formats.
namespace fame::byte_io {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

template <class T>
void put(std::vector<char>& out, T value) {
  const auto* p = reinterpret_cast<const char*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  Reader(const std::vector<char>& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  template <class T>
  T get() {
    require(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string(std::size_t n) {
    require(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  void require(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw Error(what_ + ": truncated at byte offset " + std::to_string(bytes_.size()) +
                  " (needed " + std::to_string(n) + " bytes at offset " + std::to_string(pos_) +
                  ")");
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<char>& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::vector<char> read_file(const std::string& path);
/// Writes via a temporary sibling and rename.
void write_file(const std::string& path, const std::vector<char>& bytes);

}  // namespace fame::byte_io
