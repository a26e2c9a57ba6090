#include "generation/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "generation/tokenizer.hpp"
#include "random.hpp"

namespace polyg2p {

PaddedBatch make_batch(std::span<const PackedSequence> sequences) {
  PaddedBatch batch;
  for (const auto& s : sequences) batch.max_len = std::max(batch.max_len, s.size());
  batch.rows.reserve(sequences.size());
  for (const auto& s : sequences) {
    PackedSequence row = s;
    batch.lengths.push_back(s.size());
    const auto pad = static_cast<std::size_t>(batch.max_len - s.size());
    row.ids.insert(row.ids.end(), pad, Vocabulary::kPad);
    row.positions.insert(row.positions.end(), pad, PositionPair{0, 0});
    row.targets.insert(row.targets.end(), pad, -1);
    batch.rows.push_back(std::move(row));
  }
  return batch;
}

double batch_loss(const ModelParams& params, const ToyGlmConfig& config, const PaddedBatch& batch,
                  ModelParams* grads) {
  std::size_t tokens = 0;
  for (const auto& row : batch.rows) {
    tokens += static_cast<std::size_t>(std::count_if(row.targets.begin(), row.targets.end(), [](int t) { return t >= 0; }));
  }
  if (tokens == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(tokens);
  double total = 0.0;
  for (std::size_t r = 0; r < batch.rows.size(); ++r) {
    // The padded tail is invisible to real rows and carries no loss, so the
    // row is evaluated on its real prefix.
    const auto& padded = batch.rows[r];
    const auto n = static_cast<std::size_t>(batch.lengths[r]);
    PackedSequence row;
    row.ids.assign(padded.ids.begin(), padded.ids.begin() + static_cast<std::ptrdiff_t>(n));
    row.positions.assign(padded.positions.begin(), padded.positions.begin() + static_cast<std::ptrdiff_t>(n));
    row.targets.assign(padded.targets.begin(), padded.targets.begin() + static_cast<std::ptrdiff_t>(n));
    row.context_len = padded.context_len;
    total += sequence_loss(params, config, row, scale, grads);
  }
  return total * scale;
}

AdamW::AdamW(const ToyGlmConfig& config, const TrainOptions& options)
    : options_(options), m_(ModelParams::zeros(config)), v_(ModelParams::zeros(config)) {}

void AdamW::step(ModelParams& params, const ModelParams& grads) {
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));

  std::vector<Matrix*> ps, ms, vs;
  std::vector<const Matrix*> gs;
  std::vector<TensorInfo> infos;
  params.for_each([&](const TensorInfo& info, Matrix& m) {
    infos.push_back(info);
    ps.push_back(&m);
  });
  grads.for_each([&](const TensorInfo&, const Matrix& m) { gs.push_back(&m); });
  m_.for_each([&](const TensorInfo&, Matrix& m) { ms.push_back(&m); });
  v_.for_each([&](const TensorInfo&, Matrix& m) { vs.push_back(&m); });

  auto trainable = [&](const TensorInfo& info) { return !options_.backbone_frozen || info.is_prefix(); };

  double clip = 1.0;
  if (options_.grad_clip > 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (trainable(infos[i])) sq += gs[i]->squaredNorm();
    }
    const double norm = std::sqrt(sq);
    if (norm > options_.grad_clip) clip = options_.grad_clip / norm;
  }

  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!trainable(infos[i])) continue;
    Matrix& p = *ps[i];
    Matrix& m = *ms[i];
    Matrix& v = *vs[i];
    const Matrix g = *gs[i] * clip;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    if (infos[i].decays() && options_.weight_decay > 0.0) p *= 1.0 - options_.lr * options_.weight_decay;
    p.array() -= options_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + options_.adam_eps);
  }
}

TrainResult train(ModelParams& params, const ToyGlmConfig& config, std::span<const TrainingExample> dataset,
                  const TrainOptions& options, const EpochCallback& on_epoch) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "no training examples");
  if (options.batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
  if (options.epochs < 0) throw Error(ErrorKind::InvalidArgument, "epochs must be >= 0");

  std::vector<PackedSequence> packed;
  packed.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ex = dataset[i];
    if (static_cast<int>(ex.answer_ids.size()) + 1 > options.max_new_tokens) {
      throw Error(ErrorKind::AnswerTooLong, "example " + std::to_string(i) + " needs " +
                                                std::to_string(ex.answer_ids.size() + 1) + " tokens, budget is " +
                                                std::to_string(options.max_new_tokens));
    }
    packed.push_back(pack_example(ex.prompt_ids, ex.answer_ids));
    if (packed.back().size() > config.max_seq_len) {
      throw Error(ErrorKind::SequenceTooLong, "example " + std::to_string(i) + " packs to " +
                                                  std::to_string(packed.back().size()) + " tokens, max_seq_len is " +
                                                  std::to_string(config.max_seq_len));
    }
  }

  TrainResult result;
  AdamW optimizer(config, options);
  ModelParams grads = ModelParams::zeros(config);
  Rng rng(options.seed);
  std::vector<std::size_t> order(packed.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const auto batch_size = static_cast<std::size_t>(options.batch_size);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.shuffle) rng.shuffle(std::span<std::size_t>(order));
    double epoch_total = 0.0;
    std::size_t epoch_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      if (options.max_steps != 0 && result.steps >= options.max_steps) break;
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::vector<PackedSequence> rows;
      rows.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) rows.push_back(packed[order[k]]);
      const PaddedBatch batch = make_batch(rows);

      grads.for_each([](const TensorInfo&, Matrix& m) { m.setZero(); });
      const double loss = batch_loss(params, config, batch, &grads);
      optimizer.step(params, grads);
      result.step_loss.push_back(loss);
      ++result.steps;
      epoch_total += loss;
      ++epoch_batches;
    }
    if (epoch_batches == 0) break;
    const double mean = epoch_total / static_cast<double>(epoch_batches);
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace polyg2p
