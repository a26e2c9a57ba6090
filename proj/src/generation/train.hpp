#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "generation/model.hpp"

namespace polyg2p {

struct TrainingExample {
  std::vector<int> prompt_ids;
  std::vector<int> answer_ids;
};

// Defaults mirror the reference fine-tuning setup: batch 32, AdamW at 1e-2.
struct TrainOptions {
  bool backbone_frozen = false;  // true: only prefix key/value tensors move
  double lr = 1e-2;
  int batch_size = 32;
  int epochs = 5;
  std::size_t max_steps = 0;  // 0 = no cap
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 1.0;  // global L2 norm; <= 0 disables
  int max_new_tokens = 8;  // answer tokens + EOS must fit
  std::uint64_t seed = 0;  // data order
  bool shuffle = true;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean of the batch losses in each epoch
  std::vector<double> step_loss;
  std::size_t steps = 0;
};

// Batch rows right-padded to the longest row. Padding carries PAD ids,
// (0, 0) positions and no loss; it sits after every real token, so no real
// row ever attends to it.
struct PaddedBatch {
  std::vector<PackedSequence> rows;
  std::vector<int> lengths;
  int max_len = 0;
};

PaddedBatch make_batch(std::span<const PackedSequence> sequences);

// Mean token loss over the batch's answer tokens; accumulates its gradient
// into grads when non-null.
double batch_loss(const ModelParams& params, const ToyGlmConfig& config, const PaddedBatch& batch,
                  ModelParams* grads);

// Decoupled weight decay Adam.
class AdamW {
 public:
  AdamW(const ToyGlmConfig& config, const TrainOptions& options);
  // Leaves every non-prefix tensor untouched when backbone_frozen is set.
  void step(ModelParams& params, const ModelParams& grads);
  std::size_t steps() const noexcept { return t_; }

 private:
  TrainOptions options_;
  ModelParams m_;
  ModelParams v_;
  std::size_t t_ = 0;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Minimizes answer-span cross entropy. Throws Error(EmptyDataset),
// Error(AnswerTooLong) or Error(SequenceTooLong).
TrainResult train(ModelParams& params, const ToyGlmConfig& config, std::span<const TrainingExample> dataset,
                  const TrainOptions& options, const EpochCallback& on_epoch = {});

}  // namespace polyg2p
