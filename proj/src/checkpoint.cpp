#include "idxsel/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "idxsel/errors.hpp"

namespace idxsel {

namespace {

constexpr char kMagic[8] = {'I', 'D', 'X', 'S', 'E', 'L', 'Q', 'N'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, std::size_t end) : in_(in), end_(end) {}
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw FormatError("checkpoint truncated");
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint64_t checksum(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::pair<std::string, double>> hyperparam_entries(const Hyperparams& hp) {
  return {
      {"learning_rate", hp.learning_rate},
      {"gamma", hp.gamma},
      {"epsilon", hp.epsilon},
      {"epsilon_is_exploit", hp.epsilon_is_exploit ? 1.0 : 0.0},
      {"batch_size", static_cast<double>(hp.batch_size)},
      {"target_sync_every", static_cast<double>(hp.target_sync_every)},
      {"update_every_steps", static_cast<double>(hp.update_every_steps)},
      {"updates_per_step", static_cast<double>(hp.updates_per_step)},
      {"replay_capacity", static_cast<double>(hp.replay_capacity)},
      {"optimizer", static_cast<double>(hp.optimizer)},
      {"loss", static_cast<double>(hp.loss)},
      {"huber_delta", hp.huber_delta},
      {"lr_decay", hp.lr_decay},
  };
}

void apply_hyperparam(Hyperparams& hp, const std::string& name, double v) {
  const auto count = [&] { return static_cast<std::size_t>(v); };
  if (name == "learning_rate") hp.learning_rate = v;
  else if (name == "gamma") hp.gamma = v;
  else if (name == "epsilon") hp.epsilon = v;
  else if (name == "epsilon_is_exploit") hp.epsilon_is_exploit = v != 0.0;
  else if (name == "batch_size") hp.batch_size = count();
  else if (name == "target_sync_every") hp.target_sync_every = count();
  else if (name == "update_every_steps") hp.update_every_steps = count();
  else if (name == "updates_per_step") hp.updates_per_step = count();
  else if (name == "replay_capacity") hp.replay_capacity = count();
  else if (name == "optimizer") hp.optimizer = static_cast<OptimizerKind>(count());
  else if (name == "loss") hp.loss = static_cast<LossKind>(count());
  else if (name == "huber_delta") hp.huber_delta = v;
  else if (name == "lr_decay") hp.lr_decay = v;
  // Unknown names are skipped so newer writers stay readable.
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  const auto& net = checkpoint.net;
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.le(kCheckpointVersion);
  w.le(static_cast<std::uint32_t>(net.input_dim()));
  w.le(static_cast<std::uint32_t>(net.action_count()));
  const auto hidden = net.hidden();
  w.le(static_cast<std::uint32_t>(hidden.size()));
  for (auto h : hidden) w.le(static_cast<std::uint32_t>(h));

  const auto entries = hyperparam_entries(checkpoint.hyperparams);
  w.le(static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, value] : entries) {
    w.le(static_cast<std::uint16_t>(name.size()));
    w.raw(name.data(), name.size());
    w.f64(value);
  }

  std::vector<std::pair<const double*, std::pair<Eigen::Index, Eigen::Index>>> tensors;
  const auto& p = net.params();
  const auto add = [&](const DenseLayer<double>& l) {
    tensors.push_back({l.weight.data(), {l.weight.rows(), l.weight.cols()}});
    tensors.push_back({l.bias.data(), {l.bias.rows(), 1}});
  };
  for (const auto& l : p.trunk) add(l);
  add(p.value);
  add(p.advantage);

  w.le(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [data, shape] : tensors) {
    const auto [rows, cols] = shape;
    w.le(static_cast<std::uint32_t>(rows));
    w.le(static_cast<std::uint32_t>(cols));
    // Eigen storage is column-major; the file is row-major.
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) w.f64(data[c * rows + r]);
    }
  }
  auto& bytes = w.bytes();
  w.le(checksum(bytes.data(), bytes.size()));
  return std::move(bytes);
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kMagic + 8) throw FormatError("checkpoint truncated");
  const std::size_t body = bytes.size() - 8;
  {
    Reader tail(bytes, bytes.size());
    std::vector<std::uint8_t> skip(body);
    tail.raw(skip.data(), body);
    if (tail.le<std::uint64_t>() != checksum(bytes.data(), body)) {
      throw FormatError("checkpoint checksum mismatch");
    }
  }
  Reader r(bytes, body);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw FormatError("not an idxsel checkpoint");
  const auto version = r.le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto input_dim = r.le<std::uint32_t>();
  const auto actions = r.le<std::uint32_t>();
  const auto hidden_count = r.le<std::uint32_t>();
  if (hidden_count == 0 || hidden_count > 64) throw FormatError("bad hidden layer count");
  std::vector<Eigen::Index> hidden;
  for (std::uint32_t i = 0; i < hidden_count; ++i) hidden.push_back(r.le<std::uint32_t>());

  Checkpoint cp;
  cp.hyperparams.hidden = hidden;
  const auto hp_count = r.le<std::uint32_t>();
  for (std::uint32_t i = 0; i < hp_count; ++i) {
    std::string name(r.le<std::uint16_t>(), '\0');
    r.raw(name.data(), name.size());
    apply_hyperparam(cp.hyperparams, name, r.f64());
  }

  // Shapes must account for the remaining bytes before anything is allocated.
  std::uint64_t values = 0, in = input_dim;
  for (auto h : hidden) {
    values += (in + 1) * static_cast<std::uint64_t>(h);
    in = static_cast<std::uint64_t>(h);
  }
  values += (in + 1) * (1 + static_cast<std::uint64_t>(actions));
  if (input_dim == 0 || actions == 0 || actions > 32 ||
      std::find(hidden.begin(), hidden.end(), 0) != hidden.end() || values * 8 > body) {
    throw FormatError("checkpoint shape header is inconsistent");
  }
  cp.net = QNetwork(input_dim, hidden, actions);
  const auto tensor_count = r.le<std::uint32_t>();
  if (tensor_count != 2 * (hidden.size() + 2)) throw FormatError("checkpoint tensor count mismatch");

  const auto read_layer = [&](DenseLayer<double>& l) {
    const auto rows_w = r.le<std::uint32_t>();
    const auto cols_w = r.le<std::uint32_t>();
    if (rows_w != l.weight.rows() || cols_w != l.weight.cols()) {
      throw FormatError("checkpoint weight shape mismatch");
    }
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = r.f64();
    }
    const auto rows_b = r.le<std::uint32_t>();
    const auto cols_b = r.le<std::uint32_t>();
    if (rows_b != l.bias.rows() || cols_b != 1) throw FormatError("checkpoint bias shape mismatch");
    for (Eigen::Index i = 0; i < l.bias.rows(); ++i) l.bias(i) = r.f64();
  };
  auto& p = cp.net.params();
  for (auto& l : p.trunk) read_layer(l);
  read_layer(p.value);
  read_layer(p.advantage);
  if (r.pos() != body) throw FormatError("trailing bytes in checkpoint");
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace idxsel
