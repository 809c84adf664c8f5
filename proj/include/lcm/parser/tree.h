#pragma once

#include <string>
#include <vector>

namespace lcm::parser {

struct ParseTree {
  std::vector<int> heads;
  std::vector<std::string> labels;

  bool operator==(const ParseTree&) const = default;
};

}  // namespace lcm::parser
