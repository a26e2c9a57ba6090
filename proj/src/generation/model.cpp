#include "generation/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "generation/tokenizer.hpp"
#include "random.hpp"

namespace polyg2p {

void ToyGlmConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
  };
  positive(vocab_size, "vocab_size");
  positive(n_layers, "n_layers");
  positive(d_model, "d_model");
  positive(n_heads, "n_heads");
  positive(d_ff, "d_ff");
  positive(max_seq_len, "max_seq_len");
  if (prefix_len < 0) throw Error(ErrorKind::InvalidArgument, "prefix_len must be >= 0");
  if (d_model % n_heads != 0) throw Error(ErrorKind::InvalidArgument, "d_model must be divisible by n_heads");
}

std::vector<PositionPair> encode_positions(int context_len, int mask_index, int span_len) {
  if (context_len < 1 || mask_index < 0 || mask_index >= context_len) {
    throw Error(ErrorKind::InvalidIndex, "mask index " + std::to_string(mask_index) +
                                             " outside context of length " + std::to_string(context_len));
  }
  if (span_len < 1) throw Error(ErrorKind::InvalidIndex, "span length must be >= 1");
  std::vector<PositionPair> out;
  out.reserve(static_cast<std::size_t>(context_len + span_len));
  for (int i = 0; i < context_len; ++i) out.push_back({i, 0});
  for (int j = 0; j < span_len; ++j) out.push_back({mask_index, j + 1});
  return out;
}

ModelParams ModelParams::zeros(const ToyGlmConfig& c) {
  c.validate();
  const int d = c.d_model;
  ModelParams p;
  p.token_embedding = Matrix::Zero(c.vocab_size, d);
  p.pos1_embedding = Matrix::Zero(c.max_seq_len, d);
  p.pos2_embedding = Matrix::Zero(c.max_seq_len + 1, d);
  p.layers.resize(static_cast<std::size_t>(c.n_layers));
  for (auto& L : p.layers) {
    L.wq = L.wk = L.wv = L.wo = Matrix::Zero(d, d);
    L.bq = L.bk = L.bv = L.bo = Matrix::Zero(1, d);
    L.ln1_gain = L.ln1_bias = L.ln2_gain = L.ln2_bias = Matrix::Zero(1, d);
    L.w1 = Matrix::Zero(d, c.d_ff);
    L.b1 = Matrix::Zero(1, c.d_ff);
    L.w2 = Matrix::Zero(c.d_ff, d);
    L.b2 = Matrix::Zero(1, d);
    L.prefix_key = L.prefix_value = Matrix::Zero(c.prefix_len, d);
  }
  p.final_gain = p.final_bias = Matrix::Zero(1, d);
  p.output_head = Matrix::Zero(d, c.vocab_size);
  p.output_bias = Matrix::Zero(1, c.vocab_size);
  return p;
}

ModelParams ModelParams::initialize(const ToyGlmConfig& c) {
  ModelParams p = zeros(c);
  Rng rng(c.seed);
  constexpr double kStd = 0.02;
  p.for_each([&](const TensorInfo& info, Matrix& m) {
    if (info.kind == TensorKind::Gain) {
      m.setOnes();
    } else if (info.kind == TensorKind::Bias) {
      m.setZero();
    } else {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = kStd * rng.normal();
    }
  });
  return p;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const TensorInfo&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

PackedSequence pack_example(std::span<const int> prompt_ids, std::span<const int> answer_ids) {
  PackedSequence seq;
  seq.ids.assign(prompt_ids.begin(), prompt_ids.end());
  seq.ids.push_back(Vocabulary::kMask);
  seq.context_len = static_cast<int>(seq.ids.size());
  seq.ids.push_back(Vocabulary::kBos);
  seq.ids.insert(seq.ids.end(), answer_ids.begin(), answer_ids.end());
  const int span_len = static_cast<int>(answer_ids.size()) + 1;
  seq.positions = encode_positions(seq.context_len, seq.context_len - 1, span_len);
  seq.targets.assign(static_cast<std::size_t>(seq.context_len), -1);
  seq.targets.insert(seq.targets.end(), answer_ids.begin(), answer_ids.end());
  seq.targets.push_back(Vocabulary::kEos);
  return seq;
}

namespace {

constexpr double kNormEps = 1e-5;

struct NormCache {
  Matrix xhat;
  Eigen::VectorXd rstd;
};

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, NormCache* cache) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index d = x.cols();
  Matrix xhat(rows, d);
  Eigen::VectorXd rstd(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).mean();
    const auto centered = x.row(i).array() - mean;
    const double var = centered.square().sum() / static_cast<double>(d);
    rstd(i) = 1.0 / std::sqrt(var + kNormEps);
    xhat.row(i) = centered * rstd(i);
  }
  Matrix y = (xhat.array().rowwise() * gain.row(0).array()).rowwise() + bias.row(0).array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& gain, const NormCache& c, Matrix& dgain, Matrix& dbias) {
  dgain += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  dbias += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double m1 = dxhat.row(i).mean();
    const double m2 = (dxhat.row(i).array() * c.xhat.row(i).array()).mean();
    dx.row(i) = (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2) * c.rstd(i);
  }
  return dx;
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

// Number of visible keys (prefix included) for row i.
inline Eigen::Index key_limit(Eigen::Index i, Eigen::Index prefix, Eigen::Index context_len) {
  return prefix + (i < context_len ? context_len : i + 1);
}

struct AttentionCache {
  Matrix input;
  Matrix q, kf, vf;  // kf/vf include the prefix rows on top
  std::vector<Matrix> probs;  // per head, rows x (prefix + rows)
  Matrix o;
};

Matrix attention(const LayerParams& p, const ToyGlmConfig& c, const Matrix& h, int context_len,
                 AttentionCache* cache) {
  const Eigen::Index L = h.rows();
  const Eigen::Index P = c.prefix_len;
  const Eigen::Index dh = c.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix q = affine(h, p.wq, p.bq);
  Matrix kf(P + L, c.d_model);
  Matrix vf(P + L, c.d_model);
  kf.topRows(P) = p.prefix_key;
  vf.topRows(P) = p.prefix_value;
  kf.bottomRows(L) = affine(h, p.wk, p.bk);
  vf.bottomRows(L) = affine(h, p.wv, p.bv);

  Matrix o(L, c.d_model);
  std::vector<Matrix> probs;
  if (cache) probs.reserve(static_cast<std::size_t>(c.n_heads));
  for (int head = 0; head < c.n_heads; ++head) {
    const Eigen::Index col = head * dh;
    Matrix s = (q.middleCols(col, dh) * kf.middleCols(col, dh).transpose()) * scale;
    for (Eigen::Index i = 0; i < L; ++i) {
      const Eigen::Index lim = key_limit(i, P, context_len);
      auto row = s.row(i);
      const double mx = row.head(lim).maxCoeff();
      row.head(lim) = (row.head(lim).array() - mx).exp();
      row.head(lim) /= row.head(lim).sum();
      row.tail(P + L - lim).setZero();
    }
    o.middleCols(col, dh) = s * vf.middleCols(col, dh);
    if (cache) probs.push_back(std::move(s));
  }
  Matrix out = affine(o, p.wo, p.bo);
  if (cache) {
    cache->input = h;
    cache->q = std::move(q);
    cache->kf = std::move(kf);
    cache->vf = std::move(vf);
    cache->probs = std::move(probs);
    cache->o = std::move(o);
  }
  return out;
}

Matrix attention_backward(const LayerParams& p, LayerParams& g, const ToyGlmConfig& c, const AttentionCache& a,
                          const Matrix& dout) {
  const Eigen::Index L = a.input.rows();
  const Eigen::Index P = c.prefix_len;
  const Eigen::Index dh = c.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  g.wo.noalias() += a.o.transpose() * dout;
  g.bo += dout.colwise().sum();
  const Matrix d_o = dout * p.wo.transpose();

  Matrix dq(L, c.d_model);
  Matrix dkf(P + L, c.d_model);
  Matrix dvf(P + L, c.d_model);
  for (int head = 0; head < c.n_heads; ++head) {
    const Eigen::Index col = head * dh;
    const Matrix& probs = a.probs[static_cast<std::size_t>(head)];
    const auto d_oh = d_o.middleCols(col, dh);
    dvf.middleCols(col, dh).noalias() = probs.transpose() * d_oh;
    Matrix ds = d_oh * a.vf.middleCols(col, dh).transpose();
    // softmax backward; masked entries have zero probability and stay zero
    for (Eigen::Index i = 0; i < L; ++i) {
      const double dot = (ds.row(i).array() * probs.row(i).array()).sum();
      ds.row(i) = (probs.row(i).array() * (ds.row(i).array() - dot)).matrix();
    }
    ds *= scale;
    dq.middleCols(col, dh).noalias() = ds * a.kf.middleCols(col, dh);
    dkf.middleCols(col, dh).noalias() = ds.transpose() * a.q.middleCols(col, dh);
  }
  g.prefix_key += dkf.topRows(P);
  g.prefix_value += dvf.topRows(P);
  const auto dk = dkf.bottomRows(L);
  const auto dv = dvf.bottomRows(L);

  g.wq.noalias() += a.input.transpose() * dq;
  g.bq += dq.colwise().sum();
  g.wk.noalias() += a.input.transpose() * dk;
  g.bk += dk.colwise().sum();
  g.wv.noalias() += a.input.transpose() * dv;
  g.bv += dv.colwise().sum();

  Matrix dh_in = dq * p.wq.transpose();
  dh_in.noalias() += dk * p.wk.transpose();
  dh_in.noalias() += dv * p.wv.transpose();
  return dh_in;
}

struct FeedForwardCache {
  Matrix input;
  Matrix pre;  // before ReLU
  Matrix act;
};

Matrix feed_forward(const LayerParams& p, const Matrix& h, FeedForwardCache* cache) {
  Matrix pre = affine(h, p.w1, p.b1);
  Matrix act = pre.cwiseMax(0.0);
  Matrix out = affine(act, p.w2, p.b2);
  if (cache) {
    cache->input = h;
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return out;
}

Matrix feed_forward_backward(const LayerParams& p, LayerParams& g, const FeedForwardCache& f, const Matrix& dout) {
  g.w2.noalias() += f.act.transpose() * dout;
  g.b2 += dout.colwise().sum();
  Matrix dact = dout * p.w2.transpose();
  Matrix dpre = (f.pre.array() > 0.0).select(dact, 0.0);
  g.w1.noalias() += f.input.transpose() * dpre;
  g.b1 += dpre.colwise().sum();
  return dpre * p.w1.transpose();
}

struct LayerCache {
  NormCache norm1, norm2;
  AttentionCache attn;
  FeedForwardCache ffn;
};

struct TrunkCache {
  std::vector<LayerCache> layers;
  NormCache final_norm;
};

void check_sequence(const ModelParams& params, const ToyGlmConfig& c, std::span<const int> ids,
                    std::span<const PositionPair> positions, int context_len) {
  if (ids.size() != positions.size()) {
    throw Error(ErrorKind::InvalidArgument, "ids and positions differ in length");
  }
  if (ids.empty()) throw Error(ErrorKind::InvalidArgument, "empty sequence");
  if (static_cast<int>(ids.size()) > c.max_seq_len) {
    throw Error(ErrorKind::SequenceTooLong, "sequence of " + std::to_string(ids.size()) +
                                                " tokens exceeds max_seq_len " + std::to_string(c.max_seq_len));
  }
  if (context_len < 1 || context_len > static_cast<int>(ids.size())) {
    throw Error(ErrorKind::InvalidArgument, "context length outside sequence");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= params.token_embedding.rows()) {
      throw Error(ErrorKind::InvalidArgument, "token id " + std::to_string(ids[i]) + " outside vocabulary");
    }
    if (positions[i].pos1 < 0 || positions[i].pos1 >= params.pos1_embedding.rows() || positions[i].pos2 < 0 ||
        positions[i].pos2 >= params.pos2_embedding.rows()) {
      throw Error(ErrorKind::SequenceTooLong, "position id outside the embedding tables");
    }
  }
}

// Embeddings through the final normalization.
Matrix trunk(const ModelParams& params, const ToyGlmConfig& c, std::span<const int> ids,
             std::span<const PositionPair> positions, int context_len, TrunkCache* cache) {
  check_sequence(params, c, ids, positions, context_len);
  const auto L = static_cast<Eigen::Index>(ids.size());
  Matrix x(L, c.d_model);
  for (Eigen::Index i = 0; i < L; ++i) {
    const auto& pp = positions[static_cast<std::size_t>(i)];
    x.row(i) = params.token_embedding.row(ids[static_cast<std::size_t>(i)]) + params.pos1_embedding.row(pp.pos1) +
               params.pos2_embedding.row(pp.pos2);
  }
  if (cache) cache->layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerParams& p = params.layers[l];
    LayerCache* lc = cache ? &cache->layers[l] : nullptr;
    if (c.norm == NormPlacement::Pre) {
      x += attention(p, c, layer_norm(x, p.ln1_gain, p.ln1_bias, lc ? &lc->norm1 : nullptr), context_len,
                     lc ? &lc->attn : nullptr);
      x += feed_forward(p, layer_norm(x, p.ln2_gain, p.ln2_bias, lc ? &lc->norm2 : nullptr), lc ? &lc->ffn : nullptr);
    } else {
      Matrix s1 = x + attention(p, c, x, context_len, lc ? &lc->attn : nullptr);
      x = layer_norm(s1, p.ln1_gain, p.ln1_bias, lc ? &lc->norm1 : nullptr);
      Matrix s2 = x + feed_forward(p, x, lc ? &lc->ffn : nullptr);
      x = layer_norm(s2, p.ln2_gain, p.ln2_bias, lc ? &lc->norm2 : nullptr);
    }
  }
  return layer_norm(x, params.final_gain, params.final_bias, cache ? &cache->final_norm : nullptr);
}

void trunk_backward(const ModelParams& params, ModelParams& grads, const ToyGlmConfig& c, std::span<const int> ids,
                    std::span<const PositionPair> positions, const TrunkCache& cache, const Matrix& dhidden) {
  Matrix dx = layer_norm_backward(dhidden, params.final_gain, cache.final_norm, grads.final_gain, grads.final_bias);
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const LayerParams& p = params.layers[l];
    LayerParams& g = grads.layers[l];
    const LayerCache& lc = cache.layers[l];
    if (c.norm == NormPlacement::Pre) {
      dx += layer_norm_backward(feed_forward_backward(p, g, lc.ffn, dx), p.ln2_gain, lc.norm2, g.ln2_gain, g.ln2_bias);
      dx += layer_norm_backward(attention_backward(p, g, c, lc.attn, dx), p.ln1_gain, lc.norm1, g.ln1_gain,
                                g.ln1_bias);
    } else {
      Matrix ds2 = layer_norm_backward(dx, p.ln2_gain, lc.norm2, g.ln2_gain, g.ln2_bias);
      dx = ds2 + feed_forward_backward(p, g, lc.ffn, ds2);
      Matrix ds1 = layer_norm_backward(dx, p.ln1_gain, lc.norm1, g.ln1_gain, g.ln1_bias);
      dx = ds1 + attention_backward(p, g, c, lc.attn, ds1);
    }
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = dx.row(static_cast<Eigen::Index>(i));
    grads.token_embedding.row(ids[i]) += row;
    grads.pos1_embedding.row(positions[i].pos1) += row;
    grads.pos2_embedding.row(positions[i].pos2) += row;
  }
}

}  // namespace

Matrix forward(const ModelParams& params, const ToyGlmConfig& config, std::span<const int> ids,
               std::span<const PositionPair> positions, int context_len) {
  const Matrix hidden = trunk(params, config, ids, positions, context_len, nullptr);
  return affine(hidden, params.output_head, params.output_bias);
}

Eigen::RowVectorXd forward_last(const ModelParams& params, const ToyGlmConfig& config, std::span<const int> ids,
                                std::span<const PositionPair> positions, int context_len) {
  const Matrix hidden = trunk(params, config, ids, positions, context_len, nullptr);
  Eigen::RowVectorXd out = hidden.row(hidden.rows() - 1) * params.output_head;
  out += params.output_bias.row(0);
  return out;
}

double masked_cross_entropy(const Matrix& logits, std::span<const int> targets, Matrix* dlogits) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows()) {
    throw Error(ErrorKind::InvalidArgument, "targets and logits differ in length");
  }
  if (dlogits) *dlogits = Matrix::Zero(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0) continue;
    const auto row = logits.row(i);
    const double mx = row.maxCoeff();
    const Eigen::RowVectorXd e = (row.array() - mx).exp();
    const double z = e.sum();
    total += std::log(z) + mx - row(t);
    if (dlogits) {
      dlogits->row(i) = e / z;
      (*dlogits)(i, t) -= 1.0;
    }
  }
  return total;
}

double sequence_loss(const ModelParams& params, const ToyGlmConfig& config, const PackedSequence& seq, double scale,
                     ModelParams* grads) {
  if (seq.targets.size() != seq.ids.size()) {
    throw Error(ErrorKind::InvalidArgument, "targets and ids differ in length");
  }
  TrunkCache cache;
  const Matrix hidden = trunk(params, config, seq.ids, seq.positions, seq.context_len, grads ? &cache : nullptr);

  // Only rows that carry a target need output logits.
  std::vector<Eigen::Index> rows;
  std::vector<int> row_targets;
  for (std::size_t i = 0; i < seq.targets.size(); ++i) {
    if (seq.targets[i] >= 0) {
      rows.push_back(static_cast<Eigen::Index>(i));
      row_targets.push_back(seq.targets[i]);
    }
  }
  if (rows.empty()) return 0.0;
  Matrix selected(static_cast<Eigen::Index>(rows.size()), config.d_model);
  for (std::size_t r = 0; r < rows.size(); ++r) selected.row(static_cast<Eigen::Index>(r)) = hidden.row(rows[r]);
  const Matrix logits = affine(selected, params.output_head, params.output_bias);
  Matrix dlogits;
  const double loss = masked_cross_entropy(logits, row_targets, grads ? &dlogits : nullptr);
  if (!grads) return loss;

  dlogits *= scale;
  grads->output_head.noalias() += selected.transpose() * dlogits;
  grads->output_bias += dlogits.colwise().sum();
  const Matrix dselected = dlogits * params.output_head.transpose();
  Matrix dhidden = Matrix::Zero(hidden.rows(), hidden.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) dhidden.row(rows[r]) = dselected.row(static_cast<Eigen::Index>(r));
  trunk_backward(params, *grads, config, seq.ids, seq.positions, cache, dhidden);
  return loss;
}

}  // namespace polyg2p
