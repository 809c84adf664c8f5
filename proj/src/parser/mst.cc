#include "lcm/parser/mst.h"

#include <algorithm>

#include "lcm/error.h"

namespace lcm::parser {

namespace {

using Matrix = std::vector<std::vector<double>>;  // w[head][dep]

std::vector<int> greedy_heads(const Matrix& w) {
  const std::size_t m = w.size();
  std::vector<int> head(m, -1);
  for (std::size_t d = 1; d < m; ++d) {
    double best = kMasked;
    for (std::size_t h = 0; h < m; ++h) {
      if (h == d) continue;
      if (head[d] < 0 || w[h][d] > best) {
        best = w[h][d];
        head[d] = static_cast<int>(h);
      }
    }
  }
  return head;
}

// Nodes of one cycle in the head graph, or empty.
std::vector<int> find_cycle(const std::vector<int>& head) {
  const std::size_t m = head.size();
  std::vector<int> color(m, 0);  // 0 unseen, 1 on current path, 2 done
  color[0] = 2;
  for (std::size_t start = 1; start < m; ++start) {
    if (color[start] != 0) continue;
    std::vector<int> path;
    int v = static_cast<int>(start);
    while (v >= 0 && color[v] == 0) {
      color[v] = 1;
      path.push_back(v);
      v = head[v];
    }
    if (v >= 0 && color[v] == 1) {
      auto it = std::find(path.begin(), path.end(), v);
      std::vector<int> cycle(it, path.end());
      return cycle;
    }
    for (int p : path) color[p] = 2;
  }
  return {};
}

std::vector<int> chu_liu_edmonds(const Matrix& w) {
  std::vector<int> head = greedy_heads(w);
  const std::vector<int> cycle = find_cycle(head);
  if (cycle.empty()) return head;

  const std::size_t m = w.size();
  std::vector<bool> in_cycle(m, false);
  for (int c : cycle) in_cycle[c] = true;

  // Old node -> contracted index; the cycle becomes the last node.
  std::vector<int> to_new(m, -1);
  std::vector<int> to_old;
  for (std::size_t v = 0; v < m; ++v) {
    if (!in_cycle[v]) {
      to_new[v] = static_cast<int>(to_old.size());
      to_old.push_back(static_cast<int>(v));
    }
  }
  const std::size_t c = to_old.size();
  Matrix cw(c + 1, std::vector<double>(c + 1, kMasked));
  std::vector<int> enter(m, -1);  // for u outside: the cycle node it would enter
  std::vector<int> leave(m, -1);  // for v outside: the cycle node heading it

  for (std::size_t u = 0; u < m; ++u) {
    if (in_cycle[u]) continue;
    for (std::size_t v = 0; v < m; ++v) {
      if (in_cycle[v] || u == v) continue;
      cw[to_new[u]][to_new[v]] = w[u][v];
    }
    double best = kMasked;
    for (int v : cycle) {
      const double s = w[u][v] - w[head[v]][v];
      if (enter[u] < 0 || s > best) {
        best = s;
        enter[u] = v;
      }
    }
    cw[to_new[u]][c] = best;
  }
  for (std::size_t v = 1; v < m; ++v) {
    if (in_cycle[v]) continue;
    double best = kMasked;
    for (int u : cycle) {
      if (leave[v] < 0 || w[u][v] > best) {
        best = w[u][v];
        leave[v] = u;
      }
    }
    cw[c][to_new[v]] = best;
  }

  const std::vector<int> sub = chu_liu_edmonds(cw);
  std::vector<int> result = head;  // cycle nodes keep their cycle heads
  for (std::size_t v = 1; v < m; ++v) {
    if (in_cycle[v]) continue;
    const int h = sub[to_new[v]];
    result[v] = h == static_cast<int>(c) ? leave[v] : to_old[h];
  }
  const int entering_from = to_old[sub[c]];
  result[enter[entering_from]] = entering_from;
  return result;
}

Matrix to_matrix(const ArcScores& scores) {
  const std::size_t m = scores.size() + 1;
  Matrix w(m, std::vector<double>(m, kMasked));
  for (std::size_t h = 0; h < m; ++h) {
    for (std::size_t d = 1; d < m; ++d) w[h][d] = scores(h, d);
  }
  return w;
}

std::vector<int> strip_root(const std::vector<int>& head) { return {head.begin() + 1, head.end()}; }

}  // namespace

ArcScores::ArcScores(std::size_t n) : n_(n), s_((n + 1) * (n + 1), 0.0) {
  for (std::size_t i = 0; i <= n; ++i) {
    s_[i * (n + 1) + i] = kMasked;
    s_[i * (n + 1)] = kMasked;
  }
}

ArcScores ArcScores::from_dep_major(std::size_t n, const std::vector<double>& dep_major) {
  if (dep_major.size() != n * (n + 1)) throw ContractError("arc scores: expected n x (n+1) values");
  ArcScores s(n);
  for (std::size_t d = 1; d <= n; ++d) {
    for (std::size_t h = 0; h <= n; ++h) {
      if (h != d) s.set(h, d, dep_major[(d - 1) * (n + 1) + h]);
    }
  }
  return s;
}

void ArcScores::set(std::size_t head, std::size_t dep, double value) {
  if (head > n_ || dep == 0 || dep > n_) throw ContractError("arc scores: cell out of range");
  if (head == dep) return;
  s_[head * (n_ + 1) + dep] = value;
}

double tree_score(const ArcScores& scores, const std::vector<int>& heads) {
  double total = 0.0;
  for (std::size_t d = 1; d <= heads.size(); ++d) total += scores(static_cast<std::size_t>(heads[d - 1]), d);
  return total;
}

std::vector<int> decode_greedy(const ArcScores& scores) { return strip_root(greedy_heads(to_matrix(scores))); }

std::vector<int> decode_mst(const ArcScores& scores, bool single_root) {
  const std::size_t n = scores.size();
  if (n == 0) return {};
  const Matrix w = to_matrix(scores);
  std::vector<int> best = strip_root(chu_liu_edmonds(w));
  if (!single_root || std::count(best.begin(), best.end(), 0) == 1) return best;

  double best_total = kMasked;
  best.clear();
  for (std::size_t r = 1; r <= n; ++r) {
    Matrix constrained = w;
    for (std::size_t d = 1; d <= n; ++d) {
      if (d != r) constrained[0][d] = kMasked;
    }
    std::vector<int> heads = strip_root(chu_liu_edmonds(constrained));
    const double total = tree_score(scores, heads);
    if (best.empty() || total > best_total) {
      best_total = total;
      best = std::move(heads);
    }
  }
  return best;
}

}  // namespace lcm::parser
