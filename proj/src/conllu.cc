#include "lcm/conllu.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "lcm/error.h"

namespace lcm {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

std::optional<int> to_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

struct PendingSentence {
  Sentence sentence;
  std::vector<std::size_t> head_lines;  // source line of each token
  bool started = false;
};

void finish(PendingSentence& pending, Treebank& out) {
  if (!pending.started) return;
  Sentence& s = pending.sentence;
  const int n = static_cast<int>(s.tokens.size());
  for (int i = 0; i < n; ++i) {
    if (s.tokens[i].head < 0 || s.tokens[i].head > n) {
      throw ParseError("head out of range", pending.head_lines[i]);
    }
  }
  out.sentences.push_back(std::move(s));
  pending = PendingSentence{};
}

}  // namespace

std::vector<int> Sentence::heads() const {
  std::vector<int> h;
  h.reserve(tokens.size());
  for (const Token& t : tokens) h.push_back(t.head);
  return h;
}

std::vector<std::string> Sentence::deprels() const {
  std::vector<std::string> d;
  d.reserve(tokens.size());
  for (const Token& t : tokens) d.push_back(t.deprel);
  return d;
}

std::size_t Treebank::token_count() const {
  std::size_t n = 0;
  for (const Sentence& s : sentences) n += s.size();
  return n;
}

std::string format_feats(const Feats& feats) {
  if (feats.empty()) return "_";
  std::string out;
  for (const auto& [key, value] : feats) {
    if (!out.empty()) out += '|';
    out += key;
    out += '=';
    out += value;
  }
  return out;
}

Feats parse_feats(std::string_view text) {
  Feats feats;
  if (text == "_" || text.empty()) return feats;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t bar = text.find('|', start);
    std::string_view item = text.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw DataError("malformed feature '" + std::string(item) + "'");
    }
    feats[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return feats;
}

Treebank parse_conllu(std::string_view text, std::string name) {
  Treebank out;
  out.name = std::move(name);
  PendingSentence pending;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      finish(pending, out);
      continue;
    }
    pending.started = true;
    Sentence& s = pending.sentence;
    if (line.front() == '#') {
      s.comments.emplace_back(line);
      std::string_view body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      if (body.starts_with("sent_id")) {
        std::size_t eq = body.find('=');
        if (eq != std::string_view::npos) {
          std::string_view id = body.substr(eq + 1);
          while (!id.empty() && id.front() == ' ') id.remove_prefix(1);
          s.sent_id = std::string(id);
        }
      }
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError("expected 10 columns, found " + std::to_string(cols.size()), line_no);
    }
    if (cols[0].find_first_of("-.") != std::string_view::npos) {
      s.opaque.push_back({s.tokens.size(), std::string(line)});
      continue;
    }
    auto id = to_int(cols[0]);
    if (!id) throw ParseError("non-integer id '" + std::string(cols[0]) + "'", line_no);
    if (*id != static_cast<int>(s.tokens.size()) + 1) {
      throw ParseError("token id " + std::to_string(*id) + " out of sequence", line_no);
    }
    auto head = to_int(cols[6]);
    if (!head) throw ParseError("non-integer head '" + std::string(cols[6]) + "'", line_no);
    if (*head == *id) throw ParseError("token is its own head", line_no);

    Token t;
    t.id = *id;
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    t.xpos = cols[4];
    try {
      t.feats = parse_feats(cols[5]);
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
    t.head = *head;
    t.deprel = cols[7];
    t.deps = cols[8];
    t.misc = cols[9];
    s.tokens.push_back(std::move(t));
    pending.head_lines.push_back(line_no);
  }
  finish(pending, out);
  return out;
}

std::string write_conllu(const Treebank& treebank) {
  std::ostringstream out;
  for (const Sentence& s : treebank.sentences) {
    bool has_id_comment = false;
    for (const std::string& c : s.comments) {
      if (c.find("sent_id") != std::string::npos) has_id_comment = true;
    }
    if (s.sent_id && !has_id_comment) out << "# sent_id = " << *s.sent_id << '\n';
    for (const std::string& c : s.comments) out << c << '\n';
    std::size_t next_opaque = 0;
    for (std::size_t i = 0; i <= s.tokens.size(); ++i) {
      while (next_opaque < s.opaque.size() && s.opaque[next_opaque].before == i) {
        out << s.opaque[next_opaque++].text << '\n';
      }
      if (i == s.tokens.size()) break;
      const Token& t = s.tokens[i];
      out << t.id << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos << '\t'
          << format_feats(t.feats) << '\t' << t.head << '\t' << t.deprel << '\t' << t.deps << '\t'
          << t.misc << '\n';
    }
    out << '\n';
  }
  return out.str();
}

Treebank read_conllu_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_conllu(buf.str(), path);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_conllu_file(const Treebank& treebank, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << write_conllu(treebank);
}

std::string TreeCheck::describe() const {
  auto list = [this] {
    std::string s;
    for (int n : nodes) s += (s.empty() ? "" : ",") + std::to_string(n);
    return "{" + s + "}";
  };
  switch (violation) {
    case TreeViolation::kNone: return "ok";
    case TreeViolation::kSelfLoop: return "self-loop at " + list();
    case TreeViolation::kHeadOutOfRange: return "head out of range at " + list();
    case TreeViolation::kNoRoot: return "no root";
    case TreeViolation::kMultiRoot: return "multi-root " + list();
    case TreeViolation::kCycle: return "cycle " + list();
  }
  return "?";
}

TreeCheck validate_heads(std::span<const int> heads) {
  const int n = static_cast<int>(heads.size());
  TreeCheck check;
  for (int i = 1; i <= n; ++i) {
    if (heads[i - 1] == i) return {TreeViolation::kSelfLoop, {i}};
  }
  for (int i = 1; i <= n; ++i) {
    if (heads[i - 1] < 0 || heads[i - 1] > n) return {TreeViolation::kHeadOutOfRange, {i}};
  }
  std::vector<int> roots;
  for (int i = 1; i <= n; ++i) {
    if (heads[i - 1] == 0) roots.push_back(i);
  }
  if (roots.size() > 1) return {TreeViolation::kMultiRoot, roots};

  // Walk head chains; state 0 = unvisited, 1 = on current path, 2 = done.
  std::vector<int> state(n + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int v = start;
    while (state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = heads[v - 1];
    }
    if (state[v] == 1) {
      std::vector<int> cycle;
      auto it = std::find(path.begin(), path.end(), v);
      cycle.assign(it, path.end());
      std::sort(cycle.begin(), cycle.end());
      return {TreeViolation::kCycle, cycle};
    }
    for (int p : path) state[p] = 2;
  }
  if (roots.empty() && n > 0) return {TreeViolation::kNoRoot, {}};
  return check;
}

TreeCheck validate_tree(const Sentence& sentence) {
  auto heads = sentence.heads();
  return validate_heads(heads);
}

}  // namespace lcm
