#include "lcm/vocab.h"

#include <algorithm>
#include <map>

#include "lcm/error.h"

namespace lcm {

Vocab::Vocab() {
  add(std::string(kPadSymbol));
  add(std::string(kUnkSymbol));
}

void Vocab::add(const std::string& symbol) {
  if (index_.count(symbol)) throw ContractError("duplicate vocabulary symbol '" + symbol + "'");
  index_.emplace(symbol, static_cast<int>(symbols_.size()));
  symbols_.push_back(symbol);
}

Vocab Vocab::build(const std::vector<std::string>& occurrences, std::size_t min_freq) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& s : occurrences) ++counts[s];
  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [symbol, count] : entries) {
    if (count < min_freq) continue;
    if (symbol == kPadSymbol || symbol == kUnkSymbol) continue;
    v.add(symbol);
  }
  return v;
}

Vocab Vocab::from_symbols(const std::vector<std::string>& symbols) {
  if (symbols.size() < 2 || symbols[0] != kPadSymbol || symbols[1] != kUnkSymbol) {
    throw DataError("vocabulary must start with <PAD>, <UNK>");
  }
  Vocab v;
  for (std::size_t i = 2; i < symbols.size(); ++i) v.add(symbols[i]);
  return v;
}

int Vocab::lookup(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view symbol) const { return index_.count(std::string(symbol)) > 0; }

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace lcm
