#include "advscene/attention.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "advscene/error.hpp"
#include "advscene/rng.hpp"

namespace advscene::attn {
namespace {

int positive_mod(int a, int m) { return ((a % m) + m) % m; }

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, stddev);
  }
  return m;
}

// Multi-head attention of `queries` over `keys_values` (both already in token form),
// including the output projection.
Matrix multi_head(const Matrix& queries, const Matrix& keys_values, const AttentionParams& p,
                  std::span<const Matrix> bias) {
  const Matrix q = queries * p.wq;
  const Matrix k = keys_values * p.wk;
  const Matrix v = keys_values * p.wv;
  const int d = p.head_dim();
  std::vector<HeadInputs> heads;
  heads.reserve(p.heads);
  for (int i = 0; i < p.heads; ++i) {
    heads.push_back({q.middleCols(i * d, d), k.middleCols(i * d, d), v.middleCols(i * d, d)});
  }
  std::vector<double> weights(p.head_weights.data(), p.head_weights.data() + p.head_weights.size());
  return attention(heads, bias, weights) * p.wo;
}

}  // namespace

FeatureMap::FeatureMap(int height, int width, Matrix tokens)
    : height_(height), width_(width), tokens_(std::move(tokens)) {
  if (tokens_.rows() != static_cast<Eigen::Index>(height) * width) {
    throw InvalidArgument("feature map token count does not match H*W");
  }
}

void WindowSpec::validate(int height, int width) const {
  if (window <= 0) throw InvalidArgument("window size must be positive");
  if (shift < 0 || shift >= window) throw InvalidArgument("shift must satisfy 0 <= s < M");
  if (height % window != 0 || width % window != 0) {
    throw InvalidArgument("window size " + std::to_string(window) + " does not divide " +
                          std::to_string(height) + "x" + std::to_string(width));
  }
}

std::vector<Matrix> window_partition(const FeatureMap& map, const WindowSpec& spec) {
  spec.validate(map.height(), map.width());
  const int m = spec.window;
  const int rows = map.height() / m, cols = map.width() / m;
  std::vector<Matrix> windows;
  windows.reserve(static_cast<std::size_t>(rows) * cols);
  for (int wr = 0; wr < rows; ++wr) {
    for (int wc = 0; wc < cols; ++wc) {
      Matrix block(m * m, map.channels());
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          const int src_r = (wr * m + i + spec.shift) % map.height();
          const int src_c = (wc * m + j + spec.shift) % map.width();
          block.row(i * m + j) =
              map.tokens().row(static_cast<Eigen::Index>(src_r) * map.width() + src_c);
        }
      }
      windows.push_back(std::move(block));
    }
  }
  return windows;
}

FeatureMap window_reverse(std::span<const Matrix> windows, const WindowSpec& spec, int height,
                          int width) {
  spec.validate(height, width);
  const int m = spec.window;
  const int rows = height / m, cols = width / m;
  if (windows.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidArgument("window count does not match the feature map dimensions");
  }
  const int channels = windows.empty() ? 0 : static_cast<int>(windows.front().cols());
  FeatureMap out(height, width, channels);
  for (int wr = 0; wr < rows; ++wr) {
    for (int wc = 0; wc < cols; ++wc) {
      const Matrix& block = windows[static_cast<std::size_t>(wr) * cols + wc];
      if (block.rows() != m * m || block.cols() != channels) {
        throw InvalidArgument("window block has the wrong shape");
      }
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          const int dst_r = positive_mod(wr * m + i + spec.shift, height);
          const int dst_c = positive_mod(wc * m + j + spec.shift, width);
          out.tokens().row(static_cast<Eigen::Index>(dst_r) * width + dst_c) = block.row(i * m + j);
        }
      }
    }
  }
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - peak).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Matrix attention_weights(const Matrix& q, const Matrix& k, const Matrix& bias) {
  if (q.cols() != k.cols() || q.cols() == 0) throw InvalidArgument("q and k need the same d > 0");
  Matrix logits = (q * k.transpose()) / std::sqrt(static_cast<double>(q.cols()));
  if (bias.size() != 0) {
    if (bias.rows() != logits.rows() || bias.cols() != logits.cols()) {
      throw InvalidArgument("attention bias has the wrong shape");
    }
    logits += bias;
  }
  return softmax_rows(logits);
}

Matrix attention(std::span<const HeadInputs> heads, std::span<const Matrix> bias,
                 std::span<const double> head_weights) {
  if (heads.empty()) throw InvalidArgument("attention needs at least one head");
  if (!bias.empty() && bias.size() != heads.size()) throw InvalidArgument("one bias per head expected");
  if (head_weights.size() != heads.size()) throw InvalidArgument("one weight per head expected");
  const Eigen::Index n = heads.front().q.rows();
  const Eigen::Index d = heads.front().v.cols();
  Matrix out(n, d * static_cast<Eigen::Index>(heads.size()));
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const auto& h = heads[i];
    if (h.q.rows() != n || h.v.cols() != d || h.k.rows() != h.v.rows()) {
      throw InvalidArgument("inconsistent head shapes");
    }
    const Matrix weights = attention_weights(h.q, h.k, bias.empty() ? Matrix() : bias[i]);
    out.middleCols(static_cast<Eigen::Index>(i) * d, d) = head_weights[i] * (weights * h.v);
  }
  return out;
}

int AttentionParams::window() const {
  if (rel_bias.rows() == 0) return 0;
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rel_bias.rows()))));
  return (side + 1) / 2;
}

void AttentionParams::validate(int c) const {
  if (heads <= 0 || c % heads != 0) throw InvalidArgument("channels must be divisible by heads");
  for (const Matrix* w : {&wq, &wk, &wv, &wo}) {
    if (w->rows() != c || w->cols() != c) throw InvalidArgument("projection weights must be C x C");
  }
  if (head_weights.size() != heads) throw InvalidArgument("head_weights must have one entry per head");
  if (rel_bias.size() != 0) {
    const int m = window();
    if (rel_bias.rows() != (2 * m - 1) * (2 * m - 1) || rel_bias.cols() != heads) {
      throw InvalidArgument("relative bias table must be (2M-1)^2 x heads");
    }
  }
}

std::vector<Matrix> relative_position_bias(const AttentionParams& params, int window) {
  const int n = window * window;
  const int side = 2 * window - 1;
  std::vector<Matrix> out(params.heads, Matrix::Zero(n, n));
  if (params.rel_bias.size() == 0) return out;
  if (params.window() != window) throw InvalidArgument("bias table was built for another window size");
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int dy = a / window - b / window + window - 1;
      const int dx = a % window - b % window + window - 1;
      for (int h = 0; h < params.heads; ++h) out[h](a, b) = params.rel_bias(dy * side + dx, h);
    }
  }
  return out;
}

FeatureMap window_attention(const FeatureMap& map, const AttentionParams& params,
                            const WindowSpec& spec) {
  params.validate(map.channels());
  const auto bias = relative_position_bias(params, spec.window);
  auto windows = window_partition(map, spec);
  for (auto& w : windows) w = multi_head(w, w, params, bias);
  return window_reverse(windows, spec, map.height(), map.width());
}

Matrix layer_norm(const Matrix& tokens, const LayerNormParams& params) {
  const Eigen::Index c = tokens.cols();
  if (params.scale.size() != c || params.offset.size() != c) {
    throw InvalidArgument("layer norm parameters must have one entry per channel");
  }
  Matrix out(tokens.rows(), c);
  for (Eigen::Index r = 0; r < tokens.rows(); ++r) {
    const double mean = tokens.row(r).mean();
    const Eigen::RowVectorXd centered = tokens.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(c);
    out.row(r) = centered / std::sqrt(var + params.eps);
  }
  out.array().rowwise() *= params.scale.transpose().array();
  out.rowwise() += params.offset.transpose();
  return out;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

Matrix mlp(const Matrix& tokens, const MlpParams& p) {
  if (p.w1.rows() != tokens.cols() || p.b1.size() != p.w1.cols() || p.w2.rows() != p.w1.cols() ||
      p.w2.cols() != tokens.cols() || p.b2.size() != tokens.cols()) {
    throw InvalidArgument("MLP parameter shapes do not match the channel count");
  }
  Matrix hidden = tokens * p.w1;
  hidden.rowwise() += p.b1.transpose();
  hidden = hidden.unaryExpr([](double x) { return gelu(x); });
  Matrix out = hidden * p.w2;
  out.rowwise() += p.b2.transpose();
  return out;
}

FeatureMap swin_block_pair(const FeatureMap& map, const SwinBlockPairParams& params, int window) {
  const int h = map.height(), w = map.width();
  const WindowSpec regular{window, 0};
  const WindowSpec shifted{window, window / 2};
  regular.validate(h, w);

  auto block = [&](const Matrix& z, const SwinBlockParams& p, const WindowSpec& spec) {
    const FeatureMap normed(h, w, layer_norm(z, p.norm_attention));
    const Matrix z_hat = window_attention(normed, p.attention, spec).tokens() + z;
    return Matrix(mlp(layer_norm(z_hat, p.norm_mlp), p.mlp) + z_hat);
  };

  Matrix z = block(map.tokens(), params.regular, regular);
  z = block(z, params.shifted, shifted);
  return FeatureMap(h, w, std::move(z));
}

FeatureMap patch_merge(const FeatureMap& map, const Matrix& weights) {
  if (map.height() % 2 != 0 || map.width() % 2 != 0) {
    throw InvalidArgument("patch merging needs even height and width");
  }
  const int c = map.channels();
  if (weights.rows() != 4 * c || weights.cols() != 2 * c) {
    throw InvalidArgument("patch merge weights must be 4C x 2C");
  }
  const int oh = map.height() / 2, ow = map.width() / 2;
  Matrix concat(static_cast<Eigen::Index>(oh) * ow, 4 * c);
  constexpr int kOffsets[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (int r = 0; r < oh; ++r) {
    for (int col = 0; col < ow; ++col) {
      for (int k = 0; k < 4; ++k) {
        const int sr = 2 * r + kOffsets[k][0], sc = 2 * col + kOffsets[k][1];
        concat.block(static_cast<Eigen::Index>(r) * ow + col, k * c, 1, c) =
            map.tokens().row(static_cast<Eigen::Index>(sr) * map.width() + sc);
      }
    }
  }
  return FeatureMap(oh, ow, concat * weights);
}

Matrix cross_attention(const Matrix& queries, const FeatureMap& memory, const AttentionParams& params) {
  params.validate(memory.channels());
  if (queries.cols() != memory.channels()) throw InvalidArgument("queries must have C columns");
  return multi_head(queries, memory.tokens(), params, {});
}

AttentionParams random_attention_params(int channels, int heads, int window, std::uint64_t seed,
                                        double stddev) {
  Rng rng(seed);
  AttentionParams p;
  p.heads = heads;
  p.wq = gaussian(channels, channels, rng, stddev);
  p.wk = gaussian(channels, channels, rng, stddev);
  p.wv = gaussian(channels, channels, rng, stddev);
  p.wo = gaussian(channels, channels, rng, stddev);
  const int side = 2 * window - 1;
  p.rel_bias = window > 0 ? gaussian(side * side, heads, rng, stddev) : Matrix();
  p.head_weights = Vector::Ones(heads);
  p.validate(channels);
  return p;
}

SwinBlockParams random_block_params(int channels, int heads, int window, std::uint64_t seed,
                                    double stddev) {
  SwinBlockParams p;
  p.attention = random_attention_params(channels, heads, window, derive_seed(seed, 0), stddev);
  p.norm_attention = {Vector::Ones(channels), Vector::Zero(channels)};
  p.norm_mlp = {Vector::Ones(channels), Vector::Zero(channels)};
  Rng rng(derive_seed(seed, 1));
  p.mlp.w1 = gaussian(channels, 4 * channels, rng, stddev);
  p.mlp.b1 = Vector::Zero(4 * channels);
  p.mlp.w2 = gaussian(4 * channels, channels, rng, stddev);
  p.mlp.b2 = Vector::Zero(channels);
  return p;
}

SwinBlockPairParams random_block_pair_params(int channels, int heads, int window,
                                             std::uint64_t seed, double stddev) {
  return {random_block_params(channels, heads, window, derive_seed(seed, 0), stddev),
          random_block_params(channels, heads, window, derive_seed(seed, 1), stddev)};
}

}  // namespace advscene::attn
