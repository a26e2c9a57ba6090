#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include "generation/checkpoint.hpp"

namespace polyg2p {

struct GenerationRequest {
  std::string prompt_text;
  int max_new_tokens = 8;
  bool greedy = true;
};

// Turns a rendered prompt into answer text. Implementations are safe to call
// concurrently once constructed.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string generate(const GenerationRequest& request) const = 0;
  // Short identifier recorded in evaluation reports.
  virtual std::string id() const = 0;
};

// Span-infilling decoder over a trained toy model: the prompt is followed by
// MASK and the answer is decoded after BOS until EOS or the token budget.
class ToyBackend final : public GenerationBackend {
 public:
  explicit ToyBackend(ToyModel model, std::string id = "toy");
  std::string generate(const GenerationRequest& request) const override;
  std::string id() const override { return id_; }
  const ToyModel& model() const noexcept { return model_; }

 private:
  ToyModel model_;
  std::string id_;
};

// Client for a remote model behind `POST <base>/generate`.
class RemoteBackend final : public GenerationBackend {
 public:
  // base_url: "http://host[:port][/prefix]". Throws Error(InvalidArgument)
  // for anything else.
  RemoteBackend(std::string base_url, std::chrono::milliseconds timeout);
  std::string generate(const GenerationRequest& request) const override;
  std::string id() const override { return "remote:" + base_url_; }

 private:
  std::string base_url_;
  std::string host_port_;
  std::string path_prefix_;
  std::chrono::milliseconds timeout_;
};

// "toy:<checkpoint>" or "remote:<url>".
std::unique_ptr<GenerationBackend> open_backend(std::string_view selector,
                                                std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace polyg2p
