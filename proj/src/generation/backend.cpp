#include "generation/backend.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "error.hpp"
#include "random.hpp"

namespace polyg2p {

ToyBackend::ToyBackend(ToyModel model, std::string id) : model_(std::move(model)), id_(std::move(id)) {
  model_.config.validate();
}

std::string ToyBackend::generate(const GenerationRequest& request) const {
  if (request.max_new_tokens < 1) throw Error(ErrorKind::InvalidArgument, "max_new_tokens must be >= 1");
  std::vector<int> ids = model_.vocab.tokenize(request.prompt_text);
  ids.push_back(Vocabulary::kMask);
  const int context_len = static_cast<int>(ids.size());
  if (context_len + request.max_new_tokens > model_.config.max_seq_len) {
    throw Error(ErrorKind::SequenceTooLong, "prompt of " + std::to_string(context_len) + " tokens plus " +
                                                std::to_string(request.max_new_tokens) +
                                                " new tokens exceeds max_seq_len " +
                                                std::to_string(model_.config.max_seq_len));
  }
  const auto& bytes = request.prompt_text;
  Rng rng(fnv1a({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()}) ^ model_.config.seed);

  std::vector<int> answer;
  ids.push_back(Vocabulary::kBos);
  for (int step = 0; step < request.max_new_tokens; ++step) {
    const auto positions = encode_positions(context_len, context_len - 1, static_cast<int>(ids.size()) - context_len);
    Eigen::RowVectorXd logits = forward_last(model_.params, model_.config, ids, positions, context_len);
    // Never emit structural tokens other than EOS.
    for (int special : {Vocabulary::kPad, Vocabulary::kUnk, Vocabulary::kBos, Vocabulary::kMask}) {
      logits(special) = -std::numeric_limits<double>::infinity();
    }
    int next = 0;
    if (request.greedy) {
      logits.maxCoeff(&next);
    } else {
      const double mx = logits.maxCoeff();
      const Eigen::RowVectorXd p = (logits.array() - mx).exp();
      double u = rng.uniform() * p.sum();
      next = static_cast<int>(p.size()) - 1;
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        u -= p(k);
        if (u < 0.0) {
          next = static_cast<int>(k);
          break;
        }
      }
    }
    if (next == Vocabulary::kEos) break;
    answer.push_back(next);
    ids.push_back(next);
  }
  return model_.vocab.detokenize(answer);
}

RemoteBackend::RemoteBackend(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  constexpr std::string_view kScheme = "http://";
  if (base_url_.rfind(kScheme, 0) != 0) {
    throw Error(ErrorKind::InvalidArgument, "remote backend URL must start with http://, got '" + base_url_ + "'");
  }
  const auto rest = std::string_view(base_url_).substr(kScheme.size());
  const auto slash = rest.find('/');
  const auto authority = rest.substr(0, slash);
  if (authority.empty()) throw Error(ErrorKind::InvalidArgument, "remote backend URL has no host");
  host_port_ = std::string(kScheme) + std::string(authority);
  if (slash != std::string_view::npos) {
    path_prefix_ = std::string(rest.substr(slash));
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

std::string RemoteBackend::generate(const GenerationRequest& request) const {
  httplib::Client client(host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  nlohmann::ordered_json body;
  body["prompt"] = request.prompt_text;
  body["max_new_tokens"] = request.max_new_tokens;
  body["greedy"] = request.greedy;
  auto res = client.Post(path_prefix_ + "/generate", body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::BackendUnavailable, base_url_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::BackendUnavailable, base_url_ + " replied with status " + std::to_string(res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
      throw Error(ErrorKind::BackendUnavailable, base_url_ + " reply lacks a string 'text' field");
    }
    return reply["text"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BackendUnavailable, base_url_ + " sent malformed JSON: " + e.what());
  }
}

std::unique_ptr<GenerationBackend> open_backend(std::string_view selector, std::chrono::milliseconds timeout) {
  if (selector.rfind("toy:", 0) == 0) {
    const std::string path(selector.substr(4));
    return std::make_unique<ToyBackend>(load_checkpoint(path), "toy:" + std::filesystem::path(path).filename().string());
  }
  if (selector.rfind("remote:", 0) == 0) {
    return std::make_unique<RemoteBackend>(std::string(selector.substr(7)), timeout);
  }
  throw Error(ErrorKind::InvalidArgument, "backend must be toy:<checkpoint> or remote:<url>, got '" +
                                              std::string(selector) + "'");
}

}  // namespace polyg2p
