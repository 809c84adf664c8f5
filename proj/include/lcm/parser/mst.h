#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace lcm::parser {

inline constexpr double kMasked = -std::numeric_limits<double>::infinity();

// Arc scores over a sentence of n tokens: score(h, d) for head h in 0..n and
// dependent d in 1..n. Cells with h == d are masked to -inf.
class ArcScores {
 public:
  ArcScores() = default;
  explicit ArcScores(std::size_t n);
  // `dep_major` holds n rows (dependents 1..n) of n+1 head scores each.
  static ArcScores from_dep_major(std::size_t n, const std::vector<double>& dep_major);

  std::size_t size() const { return n_; }
  double operator()(std::size_t head, std::size_t dep) const { return s_[head * (n_ + 1) + dep]; }
  void set(std::size_t head, std::size_t dep, double value);

 private:
  std::size_t n_ = 0;
  std::vector<double> s_;  // (n+1) x (n+1), head-major; column 0 unused
};

// Sum of score(heads[d-1], d) over d = 1..n, in dependent order.
double tree_score(const ArcScores& scores, const std::vector<int>& heads);

// Highest-scoring head per dependent; ties go to the lowest head index. The
// result may contain cycles or several root children.
std::vector<int> decode_greedy(const ArcScores& scores);

// Maximum spanning arborescence rooted at 0 (Chu-Liu/Edmonds). With
// single_root, the root gets exactly one child: if the unconstrained tree has
// several, the decoder is rerun with each candidate as the sole root child
// and the best total is kept (lowest candidate on ties).
std::vector<int> decode_mst(const ArcScores& scores, bool single_root = true);

}  // namespace lcm::parser
