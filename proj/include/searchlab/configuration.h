#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace searchlab {

// One candidate solution: an ordered vector of binary decision states.
// Position i corresponds to the i-th decision symbol (alpha, beta, ...).
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<std::uint8_t> bits);

  // Parses a string of '0'/'1' characters, e.g. "1001001001".
  static Configuration from_string(std::string_view s);

  // Unpacks the low n bits of an index; bit i of the index becomes bit i.
  static Configuration from_index(std::uint32_t index, int n);

  int size() const { return static_cast<int>(bits_.size()); }
  std::uint8_t bit(int i) const { return bits_[static_cast<std::size_t>(i)]; }
  void set_bit(int i, std::uint8_t value);
  void flip_bit(int i) { bits_[static_cast<std::size_t>(i)] ^= 1u; }

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::uint32_t to_index() const;
  std::string to_string() const;

  bool operator==(const Configuration&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Number of positions at which a and b differ. Lengths must match.
int hamming(const Configuration& a, const Configuration& b);

}  // namespace searchlab
