#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polyg2p {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Where layer normalization sits relative to the residual stream.
//   Pre:  x + f(LN(x))
//   Post: LN(x + f(x))
enum class NormPlacement { Pre, Post };

// The toy runs pre-normalization; post-normalization stays available for A/B runs.
inline constexpr NormPlacement kDefaultNormPlacement = NormPlacement::Pre;

struct ToyGlmConfig {
  int vocab_size = 0;
  int n_layers = 2;
  int d_model = 64;
  int n_heads = 4;
  int d_ff = 256;
  int max_seq_len = 256;
  int prefix_len = 64;
  std::uint64_t seed = 0;
  NormPlacement norm = kDefaultNormPlacement;

  int head_dim() const { return d_model / n_heads; }
  // Throws Error(InvalidArgument) on a non-positive dimension or d_model % n_heads != 0.
  void validate() const;
};

// Two position ids per token: pos1 is the sequence position (answer tokens
// reuse the MASK position) and pos2 counts 1..span_len inside the answer
// span, 0 elsewhere.
struct PositionPair {
  int pos1 = 0;
  int pos2 = 0;
  friend bool operator==(const PositionPair&, const PositionPair&) = default;
};

// Throws Error(InvalidIndex) unless 0 <= mask_index < context_len and span_len >= 1.
std::vector<PositionPair> encode_positions(int context_len, int mask_index, int span_len);

struct LayerParams {
  Matrix wq, wk, wv, wo;  // d_model x d_model
  Matrix bq, bk, bv, bo;  // 1 x d_model
  Matrix ln1_gain, ln1_bias, ln2_gain, ln2_bias;  // 1 x d_model
  Matrix w1;  // d_model x d_ff
  Matrix b1;  // 1 x d_ff
  Matrix w2;  // d_ff x d_model
  Matrix b2;  // 1 x d_model
  Matrix prefix_key, prefix_value;  // prefix_len x d_model
};

enum class TensorKind { Embedding, Weight, Bias, Gain, Prefix };

struct TensorInfo {
  std::string name;
  TensorKind kind;

  bool is_prefix() const { return kind == TensorKind::Prefix; }
  // Only projection matrices receive decoupled weight decay.
  bool decays() const { return kind == TensorKind::Weight; }
};

struct ModelParams {
  Matrix token_embedding;  // vocab x d_model
  Matrix pos1_embedding;  // max_seq_len x d_model
  Matrix pos2_embedding;  // (max_seq_len + 1) x d_model
  std::vector<LayerParams> layers;
  Matrix final_gain, final_bias;  // 1 x d_model
  Matrix output_head;  // d_model x vocab
  Matrix output_bias;  // 1 x vocab

  static ModelParams zeros(const ToyGlmConfig& config);
  // Gaussian init (std 0.02) from config.seed; norms start at gain 1, bias 0.
  static ModelParams initialize(const ToyGlmConfig& config);

  // Visits every tensor in a fixed order.
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  std::size_t parameter_count() const;

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    f(TensorInfo{"token_embedding", TensorKind::Embedding}, self.token_embedding);
    f(TensorInfo{"pos1_embedding", TensorKind::Embedding}, self.pos1_embedding);
    f(TensorInfo{"pos2_embedding", TensorKind::Embedding}, self.pos2_embedding);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      auto& L = self.layers[l];
      const std::string p = "layer" + std::to_string(l) + ".";
      f(TensorInfo{p + "wq", TensorKind::Weight}, L.wq);
      f(TensorInfo{p + "bq", TensorKind::Bias}, L.bq);
      f(TensorInfo{p + "wk", TensorKind::Weight}, L.wk);
      f(TensorInfo{p + "bk", TensorKind::Bias}, L.bk);
      f(TensorInfo{p + "wv", TensorKind::Weight}, L.wv);
      f(TensorInfo{p + "bv", TensorKind::Bias}, L.bv);
      f(TensorInfo{p + "wo", TensorKind::Weight}, L.wo);
      f(TensorInfo{p + "bo", TensorKind::Bias}, L.bo);
      f(TensorInfo{p + "ln1_gain", TensorKind::Gain}, L.ln1_gain);
      f(TensorInfo{p + "ln1_bias", TensorKind::Bias}, L.ln1_bias);
      f(TensorInfo{p + "ln2_gain", TensorKind::Gain}, L.ln2_gain);
      f(TensorInfo{p + "ln2_bias", TensorKind::Bias}, L.ln2_bias);
      f(TensorInfo{p + "w1", TensorKind::Weight}, L.w1);
      f(TensorInfo{p + "b1", TensorKind::Bias}, L.b1);
      f(TensorInfo{p + "w2", TensorKind::Weight}, L.w2);
      f(TensorInfo{p + "b2", TensorKind::Bias}, L.b2);
      f(TensorInfo{p + "prefix_key", TensorKind::Prefix}, L.prefix_key);
      f(TensorInfo{p + "prefix_value", TensorKind::Prefix}, L.prefix_value);
    }
    f(TensorInfo{"final_gain", TensorKind::Gain}, self.final_gain);
    f(TensorInfo{"final_bias", TensorKind::Bias}, self.final_bias);
    f(TensorInfo{"output_head", TensorKind::Weight}, self.output_head);
    f(TensorInfo{"output_bias", TensorKind::Bias}, self.output_bias);
  }
};

// A packed training or inference sequence: context (prompt + MASK) followed
// by the answer span. Rows with target -1 carry no loss.
struct PackedSequence {
  std::vector<int> ids;
  std::vector<PositionPair> positions;
  int context_len = 0;
  std::vector<int> targets;

  int size() const { return static_cast<int>(ids.size()); }
};

// prompt + [MASK] | [BOS] answer..., targets answer... [EOS] on the span.
PackedSequence pack_example(std::span<const int> prompt_ids, std::span<const int> answer_ids);

// Logits for every position (seq_len x vocab). Context rows attend to the
// whole context; answer rows attend to the context and to answer rows up to
// themselves; every row also attends to the layer's prefix keys/values.
// Throws Error(SequenceTooLong) if the sequence exceeds max_seq_len.
Matrix forward(const ModelParams& params, const ToyGlmConfig& config, std::span<const int> ids,
               std::span<const PositionPair> positions, int context_len);

// Logits for the last row only.
Eigen::RowVectorXd forward_last(const ModelParams& params, const ToyGlmConfig& config,
                                std::span<const int> ids, std::span<const PositionPair> positions,
                                int context_len);

// Sum of token cross-entropies over rows whose target is >= 0. When dlogits
// is given it receives d(sum)/d(logits) (zero rows for masked positions).
double masked_cross_entropy(const Matrix& logits, std::span<const int> targets, Matrix* dlogits = nullptr);

// Forward + backward for one sequence. Returns the summed token loss and
// adds scale * d(loss)/d(theta) into grads when grads is non-null.
double sequence_loss(const ModelParams& params, const ToyGlmConfig& config, const PackedSequence& seq,
                     double scale, ModelParams* grads);

}  // namespace polyg2p
