#pragma once

// Flat binary tensor container. Each record is
//   u32 name_length | name bytes | u32 rank | u64 dims[rank] | f64 values[prod(dims)]
// with every integer and real little-endian and values in row-major order. Records are
// concatenated until end of file.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advscene/attention.hpp"

namespace advscene::attn {

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> values;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

std::vector<std::uint8_t> write_tensors(std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_tensors(std::span<const std::uint8_t> bytes);

NamedTensor to_tensor(std::string name, const Matrix& m);
NamedTensor to_tensor(std::string name, const Vector& v);
Matrix to_matrix(const NamedTensor& t);
Vector to_vector(const NamedTensor& t);

// Records named "<prefix>.wq", ".wk", ".wv", ".wo", ".rel_bias", ".head_weights".
void export_attention(const AttentionParams& params, const std::string& prefix,
                      std::vector<NamedTensor>& out);
AttentionParams import_attention(std::span<const NamedTensor> tensors, const std::string& prefix);

// Attention records plus ".norm_attention.scale/offset", ".norm_mlp.scale/offset",
// ".mlp.w1/b1/w2/b2".
void export_block(const SwinBlockParams& params, const std::string& prefix,
                  std::vector<NamedTensor>& out);
SwinBlockParams import_block(std::span<const NamedTensor> tensors, const std::string& prefix);

}  // namespace advscene::attn
