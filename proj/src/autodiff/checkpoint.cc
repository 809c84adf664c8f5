#include "lcm/autodiff/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lcm/error.h"
#include "lcm/rng.h"

namespace lcm::ad {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'L', 'C', 'M', 'P', 'A', 'R', 'A', 'M'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw CheckpointError("checkpoint truncated");
  }
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_parameters(const ParameterStore& store) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.parameters().size()));
  for (const auto& [name, p] : store.parameters()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put<std::uint64_t>(out, d);
    const auto data = p.value.data();
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
  }
  put<std::uint64_t>(out, fnv1a64(out));
  return out;
}

std::map<std::string, Tensor> deserialize_parameters(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a parameter checkpoint");
  }
  const std::size_t body = bytes.size() - sizeof(std::uint64_t);
  Reader r(bytes, body);
  r.get_bytes(sizeof(kMagic));
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint format version " + std::to_string(version) + " but this build reads version " +
                          std::to_string(kCheckpointVersion));
  }
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, sizeof(stored));
  if (stored != fnv1a64(std::string_view(bytes.data(), body))) throw CheckpointError("checkpoint checksum mismatch");

  const auto count = r.get<std::uint32_t>();
  std::map<std::string, Tensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.get_bytes(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw CheckpointError("implausible rank for '" + name + "'");
    Shape shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
    std::vector<double> values(shape_size(shape));
    std::string raw = r.get_bytes(values.size() * sizeof(double));
    std::memcpy(values.data(), raw.data(), raw.size());
    out.emplace(std::move(name), Tensor::from(std::move(shape), std::move(values)));
  }
  if (r.pos() != body) throw CheckpointError("trailing bytes in checkpoint");
  return out;
}

void save_checkpoint(const ParameterStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const std::string bytes = serialize_parameters(store);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::map<std::string, Tensor> read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_parameters(buf.str());
  } catch (const CheckpointError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

void load_parameters(ParameterStore& store, const std::map<std::string, Tensor>& values) {
  for (auto& [name, p] : store.parameters()) {
    auto it = values.find(name);
    if (it == values.end()) throw CheckpointError("checkpoint lacks parameter '" + name + "'");
    if (it->second.shape() != p.value.shape()) {
      throw CheckpointError("shape mismatch for '" + name + "': model " + shape_string(p.value.shape()) +
                            ", checkpoint " + shape_string(it->second.shape()));
    }
    std::copy(it->second.data().begin(), it->second.data().end(), p.value.mutable_data().begin());
  }
  if (values.size() != store.parameters().size()) {
    for (const auto& [name, t] : values) {
      if (!store.contains(name)) throw CheckpointError("checkpoint has unexpected parameter '" + name + "'");
    }
  }
}

void load_checkpoint(ParameterStore& store, const std::string& path) { load_parameters(store, read_checkpoint(path)); }

}  // namespace lcm::ad
