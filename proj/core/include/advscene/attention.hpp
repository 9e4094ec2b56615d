#pragma once

// Forward-only kernels for windowed self-attention encoders and query-driven
// cross-attention decoders. Token matrices are N x C with one token per row.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace advscene::attn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// H x W grid of C-channel tokens, stored row-major as an (H*W) x C matrix.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels)
      : height_(height), width_(width), tokens_(Matrix::Zero(static_cast<Eigen::Index>(height) * width, channels)) {}
  FeatureMap(int height, int width, Matrix tokens);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return static_cast<int>(tokens_.cols()); }

  double& at(int row, int col, int ch) { return tokens_(index(row, col), ch); }
  double at(int row, int col, int ch) const { return tokens_(index(row, col), ch); }

  const Matrix& tokens() const { return tokens_; }
  Matrix& tokens() { return tokens_; }

 private:
  Eigen::Index index(int row, int col) const { return static_cast<Eigen::Index>(row) * width_ + col; }

  int height_ = 0;
  int width_ = 0;
  Matrix tokens_;
};

struct WindowSpec {
  int window = 1;  // M
  int shift = 0;   // s, 0 <= s < M

  // No padding is applied: M must divide both H and W.
  void validate(int height, int width) const;
};

// Cyclic roll by (-s, -s), then M*M-token windows in row-major window order.
std::vector<Matrix> window_partition(const FeatureMap& map, const WindowSpec& spec);
FeatureMap window_reverse(std::span<const Matrix> windows, const WindowSpec& spec, int height,
                          int width);

// Row-wise numerically stable softmax.
Matrix softmax_rows(const Matrix& logits);

// softmax(q k^T / sqrt(d) + bias); bias may be empty (no bias).
Matrix attention_weights(const Matrix& q, const Matrix& k, const Matrix& bias);

struct HeadInputs {
  Matrix q, k, v;  // N x d (q may have a different row count from k and v)
};

// concat_i( w_i * softmax(Q_i K_i^T / sqrt(d) + B_i) V_i ), giving N x (h*d).
// `bias` is either empty or holds one matrix per head.
Matrix attention(std::span<const HeadInputs> heads, std::span<const Matrix> bias,
                 std::span<const double> head_weights);

struct AttentionParams {
  int heads = 1;
  Matrix wq, wk, wv, wo;  // C x C, applied as X * W
  Matrix rel_bias;        // (2M-1)^2 x heads
  Vector head_weights;    // heads, defaults to ones

  int channels() const { return static_cast<int>(wq.rows()); }
  int head_dim() const { return channels() / heads; }
  // M recovered from the bias table, 0 when the table is empty.
  int window() const;
  // Throws InvalidArgument on inconsistent shapes.
  void validate(int channels) const;
};

// Per-head N x N bias (N = M*M) gathered from the (2M-1)^2 table by relative offset.
std::vector<Matrix> relative_position_bias(const AttentionParams& params, int window);

// Multi-head self-attention applied independently in every (shifted) window. Wrapped
// windows are not masked.
FeatureMap window_attention(const FeatureMap& map, const AttentionParams& params,
                            const WindowSpec& spec);

struct LayerNormParams {
  Vector scale, offset;
  double eps = 1e-12;
};

struct MlpParams {
  Matrix w1;  // C x 4C
  Vector b1;  // 4C
  Matrix w2;  // 4C x C
  Vector b2;  // C
};

struct SwinBlockParams {
  AttentionParams attention;
  LayerNormParams norm_attention, norm_mlp;
  MlpParams mlp;
};

// Non-shifted block followed by the shifted block.
struct SwinBlockPairParams {
  SwinBlockParams regular, shifted;
};

// Per-token normalization over channels, then scale/offset.
Matrix layer_norm(const Matrix& tokens, const LayerNormParams& params);
double gelu(double x);
Matrix mlp(const Matrix& tokens, const MlpParams& params);

// z1 = WMSA(LN(z0)) + z0;  z2 = MLP(LN(z1)) + z1;
// z3 = SWMSA(LN(z2)) + z2; z4 = MLP(LN(z3)) + z3.
FeatureMap swin_block_pair(const FeatureMap& map, const SwinBlockPairParams& params, int window);

// 2x2 neighbourhoods concatenated in (0,0), (1,0), (0,1), (1,1) order, then X * W with
// W of shape 4C x 2C.
FeatureMap patch_merge(const FeatureMap& map, const Matrix& weights);

// Learnable queries (K x C) attend over the flattened memory; no positional bias.
Matrix cross_attention(const Matrix& queries, const FeatureMap& memory, const AttentionParams& params);

// Gaussian(0, stddev) weights from a seeded stream; unit head weights, LN scale 1, offset 0.
AttentionParams random_attention_params(int channels, int heads, int window, std::uint64_t seed,
                                        double stddev = 0.02);
SwinBlockParams random_block_params(int channels, int heads, int window, std::uint64_t seed,
                                    double stddev = 0.02);
SwinBlockPairParams random_block_pair_params(int channels, int heads, int window,
                                             std::uint64_t seed, double stddev = 0.02);

}  // namespace advscene::attn
