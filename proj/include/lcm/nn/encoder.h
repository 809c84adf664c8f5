#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcm/conllu.h"
#include "lcm/nn/layers.h"
#include "lcm/rng.h"
#include "lcm/vocab.h"

namespace lcm::nn {

struct EncoderConfig {
  std::size_t word_dim = 300;
  std::size_t char_dim = 100;
  std::size_t char_filters = 100;
  std::size_t char_kernel = 3;
  std::size_t lstm_hidden = 1024;
  std::size_t lstm_layers = 2;
  double dropout = 0.33;
  // Width of the optional morphological-tag input embedding; 0 disables it.
  std::size_t tag_dim = 0;

  void validate() const;
  std::size_t input_dim() const { return word_dim + char_filters + tag_dim; }
  std::size_t output_dim() const { return 2 * lstm_hidden; }
  bool operator==(const EncoderConfig&) const = default;
};

// Character CNN word representation: embed characters, convolve with
// `filters` kernels of width `kernel`, max-pool over positions.
class CharCnn {
 public:
  CharCnn() = default;
  CharCnn(ParameterStore& store, const std::string& prefix, std::size_t chars, std::size_t char_dim,
          std::size_t filters, std::size_t kernel);

  // One PAD on each side of the word, then right-padded to the kernel width.
  std::vector<int> pad(const std::vector<int>& char_ids) const;
  Tensor encode(const std::vector<int>& char_ids) const;  // [1 x filters]

  Tensor embedding;  // [chars x char_dim]
  Tensor conv_w;     // [kernel*char_dim x filters]
  Tensor conv_b;     // [1 x filters]
  std::size_t kernel = 3;
};

Tensor char_cnn_encode(const std::vector<int>& char_ids, const CharCnn& cnn);

class LstmDirection {
 public:
  LstmDirection() = default;
  LstmDirection(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t hidden);
  // Runs over the rows of x in order (or reversed); returns [m x hidden] in
  // the original row order.
  Tensor run(const Tensor& x, bool reverse) const;

  Tensor wx;  // [in x 4h], gate order i, f, g, o
  Tensor wh;  // [h x 4h]
  Tensor b;   // [1 x 4h], forget slice starts at 1
  std::size_t hidden = 0;
};

class BiLstmLayer {
 public:
  BiLstmLayer() = default;
  BiLstmLayer(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t hidden);
  Tensor operator()(const Tensor& x) const;  // [m x 2h]

  LstmDirection forward;
  LstmDirection backward;
};

struct EncoderVocabs {
  Vocab words;
  Vocab chars;
  Vocab tags;  // only used when tag_dim > 0

  static EncoderVocabs build(const std::vector<const Sentence*>& sentences, std::size_t min_word_freq = 2);
};

// Word + char-CNN (+ tag) input, a learned ROOT row, and stacked BiLSTMs.
// Output row 0 is ROOT, row i the i-th token.
class Encoder {
 public:
  struct Output {
    Tensor top;                 // [(n+1) x 2h]
    std::vector<Tensor> layers; // every BiLSTM layer's output, bottom first
  };

  Encoder() = default;
  Encoder(ParameterStore& store, std::string prefix, EncoderConfig config, EncoderVocabs vocabs);

  // `tags` supplies one morphological tag per token when tag_dim > 0.
  Output encode(const Sentence& sentence, Mode mode, const Rng& rng,
                const std::vector<std::string>* tags = nullptr) const;

  // Inserts a bottleneck adapter after each of the given BiLSTM layers.
  void add_adapters(ParameterStore& store, const std::vector<std::size_t>& after_layers, std::size_t bottleneck);

  // Copies rows of pretrained vectors for words present in the vocabulary;
  // returns how many rows were set.
  std::size_t set_word_vectors(const std::map<std::string, std::vector<double>>& vectors);

  const EncoderConfig& config() const { return config_; }
  const EncoderVocabs& vocabs() const { return vocabs_; }
  const std::string& prefix() const { return prefix_; }
  std::string layer_prefix(std::size_t layer) const { return prefix_ + "lstm" + std::to_string(layer) + "."; }
  // Parameter-name prefixes of the input layer (embeddings, char CNN, ROOT).
  std::vector<std::string> input_prefixes() const;
  std::size_t output_dim() const { return config_.output_dim(); }
  const std::map<std::size_t, Adapter>& adapters() const { return adapters_; }

  Tensor word_embedding;
  Tensor tag_embedding;
  Tensor root;
  CharCnn chars;
  std::vector<BiLstmLayer> layers;

 private:
  std::string prefix_;
  EncoderConfig config_;
  EncoderVocabs vocabs_;
  std::map<std::size_t, Adapter> adapters_;
};

// Whitespace-separated text: word followed by its vector components. An
// optional "count dim" header line is skipped.
std::map<std::string, std::vector<double>> load_word_vectors(const std::string& path);

}  // namespace lcm::nn
