#include "searchlab/configuration.h"

#include "searchlab/error.h"

namespace searchlab {

Configuration::Configuration(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (const auto b : bits_) {
    if (b > 1) throw ParameterError("configuration bits must be 0 or 1");
  }
}

Configuration Configuration::from_string(std::string_view s) {
  std::vector<std::uint8_t> bits;
  bits.reserve(s.size());
  for (const char c : s) {
    if (c != '0' && c != '1') {
      throw FormatError(std::string("invalid configuration character '") + c + "'");
    }
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return Configuration(std::move(bits));
}

Configuration Configuration::from_index(std::uint32_t index, int n) {
  if (n < 0 || n > 32) throw ParameterError("configuration index width out of range");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) bits[static_cast<std::size_t>(i)] = (index >> i) & 1u;
  return Configuration(std::move(bits));
}

void Configuration::set_bit(int i, std::uint8_t value) {
  if (value > 1) throw ParameterError("configuration bits must be 0 or 1");
  bits_[static_cast<std::size_t>(i)] = value;
}

std::uint32_t Configuration::to_index() const {
  std::uint32_t index = 0;
  for (int i = 0; i < size(); ++i) index |= static_cast<std::uint32_t>(bits_[static_cast<std::size_t>(i)]) << i;
  return index;
}

std::string Configuration::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (const auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

int hamming(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size()) {
    throw ParameterError("hamming: configuration lengths differ (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
  int d = 0;
  for (int i = 0; i < a.size(); ++i) d += a.bit(i) != b.bit(i);
  return d;
}

}  // namespace searchlab
