#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lcm {

// Symbol <-> index bijection with PAD = 0 and UNK = 1 reserved.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadSymbol = "<PAD>";
  static constexpr std::string_view kUnkSymbol = "<UNK>";

  Vocab();

  // Ordered by descending frequency, then lexicographically; symbols seen
  // fewer than min_freq times are left out and map to UNK.
  static Vocab build(const std::vector<std::string>& occurrences, std::size_t min_freq = 1);
  static Vocab from_symbols(const std::vector<std::string>& symbols);

  int lookup(std::string_view symbol) const;
  bool contains(std::string_view symbol) const;
  const std::string& symbol(int index) const { return symbols_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return symbols_.size(); }
  // Number of symbols besides PAD and UNK.
  std::size_t content_size() const { return symbols_.size() - 2; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  bool operator==(const Vocab& other) const { return symbols_ == other.symbols_; }

 private:
  void add(const std::string& symbol);
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Splits a UTF-8 string into code points (malformed bytes become single
// units).
std::vector<std::string> utf8_chars(std::string_view text);

}  // namespace lcm
