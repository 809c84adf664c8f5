#include "lcm/nn/encoder.h"

#include <fstream>
#include <sstream>

#include "lcm/error.h"

namespace lcm::nn {

using namespace lcm::ad;

void EncoderConfig::validate() const {
  if (word_dim == 0 || char_dim == 0 || char_filters == 0 || char_kernel == 0 || lstm_hidden == 0 ||
      lstm_layers == 0) {
    throw ConfigError("encoder dimensions must be at least 1");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder dropout must lie in [0,1)");
}

CharCnn::CharCnn(ParameterStore& store, const std::string& prefix, std::size_t n_chars, std::size_t char_dim,
                 std::size_t filters, std::size_t kernel_width)
    : embedding(store.add(prefix + "char_emb", {n_chars, char_dim}, uniform_init(0.1))),
      conv_w(store.add(prefix + "char_conv.W", {kernel_width * char_dim, filters},
                       xavier_init(kernel_width * char_dim, filters))),
      conv_b(store.add(prefix + "char_conv.b", {1, filters}, zeros_init())),
      kernel(kernel_width) {}

std::vector<int> CharCnn::pad(const std::vector<int>& char_ids) const {
  const std::size_t side = (kernel - 1) / 2;
  std::vector<int> ids(side, Vocab::kPad);
  ids.insert(ids.end(), char_ids.begin(), char_ids.end());
  ids.insert(ids.end(), side, Vocab::kPad);
  while (ids.size() < kernel) ids.push_back(Vocab::kPad);
  return ids;
}

Tensor CharCnn::encode(const std::vector<int>& char_ids) const {
  const std::vector<int> ids = pad(char_ids);
  Tensor emb = embedding_lookup(embedding, ids);
  Tensor windows = unfold_rows(emb, kernel);
  return max_over_axis(add(matmul(windows, conv_w), conv_b), 0);
}

Tensor char_cnn_encode(const std::vector<int>& char_ids, const CharCnn& cnn) { return cnn.encode(char_ids); }

LstmDirection::LstmDirection(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t h)
    : wx(store.add(prefix + ".Wx", {in, 4 * h}, xavier_init(in, 4 * h))),
      wh(store.add(prefix + ".Wh", {h, 4 * h}, xavier_init(h, 4 * h))),
      b(store.add(prefix + ".b", {1, 4 * h},
                  [h](std::span<double> v, Rng&) {
                    std::fill(v.begin(), v.end(), 0.0);
                    std::fill(v.begin() + static_cast<long>(h), v.begin() + static_cast<long>(2 * h), 1.0);
                  })),
      hidden(h) {}

Tensor LstmDirection::run(const Tensor& x, bool reverse) const {
  const std::size_t m = x.rows(), h = hidden;
  Tensor xw = add(matmul(x, wx), b);
  std::vector<Tensor> outs(m);
  Tensor h_prev, c_prev;
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t t = reverse ? m - 1 - step : step;
    Tensor z = row(xw, t);
    if (h_prev.defined()) z = add(z, matmul(h_prev, wh));
    Tensor i = sigmoid(slice(z, 1, 0, h));
    Tensor f = sigmoid(slice(z, 1, h, 2 * h));
    Tensor g = tanh(slice(z, 1, 2 * h, 3 * h));
    Tensor o = sigmoid(slice(z, 1, 3 * h, 4 * h));
    Tensor c = mul(i, g);
    if (c_prev.defined()) c = add(mul(f, c_prev), c);
    Tensor hc = mul(o, tanh(c));
    outs[t] = hc;
    h_prev = hc;
    c_prev = c;
  }
  return concat(outs, 0);
}

BiLstmLayer::BiLstmLayer(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t hidden)
    : forward(store, prefix + "fw", in, hidden), backward(store, prefix + "bw", in, hidden) {}

Tensor BiLstmLayer::operator()(const Tensor& x) const {
  return concat({forward.run(x, false), backward.run(x, true)}, 1);
}

EncoderVocabs EncoderVocabs::build(const std::vector<const Sentence*>& sentences, std::size_t min_word_freq) {
  std::vector<std::string> words, chars, tags;
  for (const Sentence* s : sentences) {
    for (const Token& t : s->tokens) {
      words.push_back(t.form);
      for (auto& c : utf8_chars(t.form)) chars.push_back(std::move(c));
      tags.push_back(format_feats(t.feats));
    }
  }
  return {Vocab::build(words, min_word_freq), Vocab::build(chars, 1), Vocab::build(tags, 1)};
}

Encoder::Encoder(ParameterStore& store, std::string prefix, EncoderConfig config, EncoderVocabs vocabs)
    : prefix_(std::move(prefix)), config_(config), vocabs_(std::move(vocabs)) {
  config_.validate();
  word_embedding = store.add(prefix_ + "word_emb", {vocabs_.words.size(), config_.word_dim}, uniform_init(0.1));
  chars = CharCnn(store, prefix_, vocabs_.chars.size(), config_.char_dim, config_.char_filters, config_.char_kernel);
  if (config_.tag_dim > 0) {
    tag_embedding = store.add(prefix_ + "tag_emb", {vocabs_.tags.size(), config_.tag_dim}, uniform_init(0.1));
  }
  root = store.add(prefix_ + "root", {1, config_.input_dim()}, uniform_init(0.1));
  std::size_t in = config_.input_dim();
  for (std::size_t l = 0; l < config_.lstm_layers; ++l) {
    layers.emplace_back(store, layer_prefix(l), in, config_.lstm_hidden);
    in = config_.output_dim();
  }
}

std::vector<std::string> Encoder::input_prefixes() const {
  std::vector<std::string> p = {prefix_ + "word_emb", prefix_ + "char_", prefix_ + "root"};
  if (config_.tag_dim > 0) p.push_back(prefix_ + "tag_emb");
  return p;
}

void Encoder::add_adapters(ParameterStore& store, const std::vector<std::size_t>& after_layers,
                           std::size_t bottleneck) {
  for (std::size_t l : after_layers) {
    if (l >= layers.size()) throw ConfigError("adapter position " + std::to_string(l) + " beyond encoder depth");
    adapters_.emplace(l, Adapter(store, prefix_ + "adapter" + std::to_string(l), output_dim(), bottleneck));
  }
}

std::size_t Encoder::set_word_vectors(const std::map<std::string, std::vector<double>>& vectors) {
  std::size_t set = 0;
  auto table = word_embedding.mutable_data();
  for (std::size_t i = 2; i < vocabs_.words.size(); ++i) {
    auto it = vectors.find(vocabs_.words.symbol(static_cast<int>(i)));
    if (it == vectors.end()) continue;
    if (it->second.size() != config_.word_dim) {
      throw DataError("word vector for '" + it->first + "' has " + std::to_string(it->second.size()) +
                      " components, encoder expects " + std::to_string(config_.word_dim));
    }
    std::copy(it->second.begin(), it->second.end(), table.begin() + static_cast<long>(i * config_.word_dim));
    ++set;
  }
  return set;
}

Encoder::Output Encoder::encode(const Sentence& sentence, Mode mode, const Rng& rng,
                                const std::vector<std::string>* tags) const {
  const std::size_t n = sentence.size();
  if (config_.tag_dim > 0 && (!tags || tags->size() != n)) {
    throw ContractError("encoder expects one morphological tag per token");
  }
  std::vector<int> word_ids;
  word_ids.reserve(n);
  for (const Token& t : sentence.tokens) word_ids.push_back(vocabs_.words.lookup(t.form));

  std::vector<Tensor> char_rows;
  char_rows.reserve(n);
  for (const Token& t : sentence.tokens) {
    std::vector<int> ids;
    for (const auto& c : utf8_chars(t.form)) ids.push_back(vocabs_.chars.lookup(c));
    char_rows.push_back(chars.encode(ids));
  }

  Tensor input = root;
  if (n > 0) {
    std::vector<Tensor> parts = {embedding_lookup(word_embedding, word_ids), concat(char_rows, 0)};
    if (config_.tag_dim > 0) {
      std::vector<int> tag_ids;
      for (const std::string& tag : *tags) tag_ids.push_back(vocabs_.tags.lookup(tag));
      parts.push_back(embedding_lookup(tag_embedding, tag_ids));
    }
    input = concat({root, concat(parts, 1)}, 0);
  }
  Rng drop = rng.split(prefix_);
  Rng input_rng = drop.split("input");
  Tensor h = dropout(input, config_.dropout, training(mode), input_rng);

  Output out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = layers[l](h);
    if (auto it = adapters_.find(l); it != adapters_.end()) h = it->second(h);
    out.layers.push_back(h);
    Rng layer_rng = drop.split(l);
    h = dropout(h, config_.dropout, training(mode), layer_rng);
  }
  out.top = h;
  return out;
}

std::map<std::string, std::vector<double>> load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word vectors " + path);
  std::map<std::string, std::vector<double>> out;
  std::string line;
  std::size_t line_no = 0, dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) continue;
    std::vector<double> v;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw DataError(path + ": non-numeric component '" + tok + "', line " + std::to_string(line_no));
      }
    }
    if (line_no == 1 && v.size() == 1) continue;  // "count dim" header
    if (dim == 0) dim = v.size();
    if (v.size() != dim || dim == 0) {
      throw DataError(path + ": expected " + std::to_string(dim) + " components, line " + std::to_string(line_no));
    }
    out[word] = std::move(v);
  }
  return out;
}

}  // namespace lcm::nn
