#include "advscene/tensor_io.hpp"

#include <bit>
#include <limits>

#include "advscene/error.hpp"

namespace advscene::attn {
namespace {

class ByteWriter {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw ParseError("tensor container truncated at byte " + std::to_string(pos_));
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

const NamedTensor& find(std::span<const NamedTensor> tensors, const std::string& name) {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw ParseError("tensor '" + name + "' not found");
}

}  // namespace

std::vector<std::uint8_t> write_tensors(std::span<const NamedTensor> tensors) {
  ByteWriter w;
  for (const auto& t : tensors) {
    std::uint64_t count = 1;
    for (auto d : t.dims) count *= d;
    if (count != t.values.size()) throw InvalidArgument("tensor '" + t.name + "': dims do not match value count");
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.raw(t.name);
    w.u32(static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) w.u64(d);
    for (double v : t.values) w.f64(v);
  }
  return w.take();
}

std::vector<NamedTensor> read_tensors(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::vector<NamedTensor> out;
  while (!r.done()) {
    NamedTensor t;
    t.name = r.raw(r.u32());
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw ParseError("tensor '" + t.name + "': unsupported rank " + std::to_string(rank));
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint64_t d = r.u64();
      if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / d) {
        throw ParseError("tensor '" + t.name + "': dimension overflow");
      }
      count *= d;
      t.dims.push_back(d);
    }
    if (count > r.remaining() / 8) throw ParseError("tensor '" + t.name + "': truncated values");
    t.values.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) t.values.push_back(r.f64());
    out.push_back(std::move(t));
  }
  return out;
}

NamedTensor to_tensor(std::string name, const Matrix& m) {
  NamedTensor t{std::move(name), {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
  t.values.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.values.push_back(m(r, c));
  }
  return t;
}

NamedTensor to_tensor(std::string name, const Vector& v) {
  return {std::move(name), {static_cast<std::uint64_t>(v.size())}, {v.data(), v.data() + v.size()}};
}

Matrix to_matrix(const NamedTensor& t) {
  if (t.dims.size() != 2) throw ParseError("tensor '" + t.name + "' is not rank 2");
  Matrix m(static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]));
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.values[i++];
  }
  return m;
}

Vector to_vector(const NamedTensor& t) {
  if (t.dims.size() != 1) throw ParseError("tensor '" + t.name + "' is not rank 1");
  return Eigen::Map<const Vector>(t.values.data(), static_cast<Eigen::Index>(t.values.size()));
}

void export_attention(const AttentionParams& p, const std::string& prefix, std::vector<NamedTensor>& out) {
  out.push_back(to_tensor(prefix + ".wq", p.wq));
  out.push_back(to_tensor(prefix + ".wk", p.wk));
  out.push_back(to_tensor(prefix + ".wv", p.wv));
  out.push_back(to_tensor(prefix + ".wo", p.wo));
  out.push_back(to_tensor(prefix + ".rel_bias", p.rel_bias));
  out.push_back(to_tensor(prefix + ".head_weights", p.head_weights));
}

AttentionParams import_attention(std::span<const NamedTensor> tensors, const std::string& prefix) {
  AttentionParams p;
  p.wq = to_matrix(find(tensors, prefix + ".wq"));
  p.wk = to_matrix(find(tensors, prefix + ".wk"));
  p.wv = to_matrix(find(tensors, prefix + ".wv"));
  p.wo = to_matrix(find(tensors, prefix + ".wo"));
  p.rel_bias = to_matrix(find(tensors, prefix + ".rel_bias"));
  p.head_weights = to_vector(find(tensors, prefix + ".head_weights"));
  p.heads = static_cast<int>(p.head_weights.size());
  try {
    p.validate(p.channels());
  } catch (const InvalidArgument& e) {
    throw ParseError(prefix + ": " + e.what());
  }
  return p;
}

void export_block(const SwinBlockParams& p, const std::string& prefix, std::vector<NamedTensor>& out) {
  export_attention(p.attention, prefix + ".attention", out);
  out.push_back(to_tensor(prefix + ".norm_attention.scale", p.norm_attention.scale));
  out.push_back(to_tensor(prefix + ".norm_attention.offset", p.norm_attention.offset));
  out.push_back(to_tensor(prefix + ".norm_mlp.scale", p.norm_mlp.scale));
  out.push_back(to_tensor(prefix + ".norm_mlp.offset", p.norm_mlp.offset));
  out.push_back(to_tensor(prefix + ".mlp.w1", p.mlp.w1));
  out.push_back(to_tensor(prefix + ".mlp.b1", p.mlp.b1));
  out.push_back(to_tensor(prefix + ".mlp.w2", p.mlp.w2));
  out.push_back(to_tensor(prefix + ".mlp.b2", p.mlp.b2));
}

SwinBlockParams import_block(std::span<const NamedTensor> tensors, const std::string& prefix) {
  SwinBlockParams p;
  p.attention = import_attention(tensors, prefix + ".attention");
  p.norm_attention.scale = to_vector(find(tensors, prefix + ".norm_attention.scale"));
  p.norm_attention.offset = to_vector(find(tensors, prefix + ".norm_attention.offset"));
  p.norm_mlp.scale = to_vector(find(tensors, prefix + ".norm_mlp.scale"));
  p.norm_mlp.offset = to_vector(find(tensors, prefix + ".norm_mlp.offset"));
  p.mlp.w1 = to_matrix(find(tensors, prefix + ".mlp.w1"));
  p.mlp.b1 = to_vector(find(tensors, prefix + ".mlp.b1"));
  p.mlp.w2 = to_matrix(find(tensors, prefix + ".mlp.w2"));
  p.mlp.b2 = to_vector(find(tensors, prefix + ".mlp.b2"));
  return p;
}

}  // namespace advscene::attn
