#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "error.hpp"
#include "generation/backend.hpp"
#include "pipeline.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that clashes with it.
#include <httplib.h>

using namespace polyg2p;
namespace fs = std::filesystem;

namespace {

const fs::path kData = POLYG2P_TEST_DATA;

class StubBackend final : public GenerationBackend {
 public:
  explicit StubBackend(std::string reply) : reply_(std::move(reply)) {}
  std::string generate(const GenerationRequest& request) const override {
    std::lock_guard lock(mu_);
    last_prompt_ = request.prompt_text;
    return reply_;
  }
  std::string id() const override { return "stub"; }
  std::string last_prompt() const {
    std::lock_guard lock(mu_);
    return last_prompt_;
  }

 private:
  std::string reply_;
  mutable std::mutex mu_;
  mutable std::string last_prompt_;
};

KnowledgePipeline make(const std::shared_ptr<const GenerationBackend>& backend, Style style, bool knowledge) {
  PipelineOptions opt;
  opt.style.style = style;
  opt.style.include_knowledge = knowledge;
  return KnowledgePipeline(std::make_shared<Dictionary>(load_dictionary(kData / "fixtures/dict.jsonl")),
                           std::make_shared<TemplateCatalog>(TemplateCatalog::builtin()), backend, opt);
}

// Loopback HTTP server living for one test case.
struct StubServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  template <class Handler>
  StubServer(const std::string& path, Handler handler) {
    server.Post(path, handler);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~StubServer() {
    server.stop();
    thread.join();
  }
  std::string url(const std::string& prefix = "") const { return "http://127.0.0.1:" + std::to_string(port) + prefix; }
};

ErrorKind kind_of(const GenerationBackend& b) {
  try {
    (void)b.generate({"prompt", 4, true});
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("valid generation passes through") {
    auto backend = std::make_shared<StubBackend>("gong1");
    const auto p = make(backend, Style::MultipleChoice, true);
    const auto r = p.run(sample_from_marked("农夫释耒，▂红▂女下机"));
    CHECK(r.final_pinyin->text() == "gong1");
    CHECK(r.provenance() == "valid");
    CHECK(backend->last_prompt() == r.prompt.text);
    CHECK(r.prompt.text.find("农夫释耒，▂红▂女下机") != std::string::npos);
    const auto pred = p.predict(sample_from_marked("农夫释耒，▂红▂女下机"));
    CHECK(pred.generated);
    CHECK(pred.valid_generation);
  }

  TEST_CASE("near misses are corrected onto a candidate") {
    const auto p = make(std::make_shared<StubBackend>(" gong。"), Style::MultipleChoice, false);
    const auto r = p.run(sample_from_marked("农夫释耒，▂红▂女下机"));
    CHECK(r.extracted == "gong");
    CHECK(r.final_pinyin->text() == "gong1");
    CHECK(r.provenance() == "corrected");
    CHECK_FALSE(p.predict(sample_from_marked("农夫释耒，▂红▂女下机")).valid_generation);
  }

  TEST_CASE("characters outside the dictionary") {
    const auto s = sample_from_marked("农夫释耒，红▂女▂下机");
    const auto completion = make(std::make_shared<StubBackend>("nv3"), Style::Completion, true);
    const auto r = completion.run(s);
    CHECK(r.provenance() == "unchecked");
    CHECK(r.final_pinyin->text() == "nv3");
    CHECK_FALSE(make(std::make_shared<StubBackend>("??"), Style::Completion, true).run(s).final_pinyin);
    try {
      (void)make(std::make_shared<StubBackend>("nv3"), Style::MultipleChoice, true).run(s);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnknownCharacter);
    }
  }
}

TEST_SUITE("remote_backend") {
  TEST_CASE("posts the prompt and reads the text field") {
    nlohmann::json seen;
    StubServer stub("/generate", [&](const httplib::Request& req, httplib::Response& res) {
      seen = nlohmann::json::parse(req.body);
      res.set_content(R"({"text":"gong1"})", "application/json");
    });
    RemoteBackend b(stub.url(), std::chrono::seconds(5));
    CHECK(b.generate({"句子：▂红▂", 6, true}) == "gong1");
    CHECK(seen["prompt"] == "句子：▂红▂");
    CHECK(seen["max_new_tokens"] == 6);
    CHECK(seen["greedy"] == true);
    CHECK(b.id() == "remote:" + stub.url());
  }

  TEST_CASE("path prefix is kept") {
    StubServer stub("/v1/generate", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"text":"hong2"})", "application/json");
    });
    CHECK(RemoteBackend(stub.url("/v1"), std::chrono::seconds(5)).generate({"p", 4, true}) == "hong2");
    CHECK(open_backend("remote:" + stub.url("/v1"))->generate({"p", 4, true}) == "hong2");
  }

  TEST_CASE("server errors and bad replies are BackendUnavailable") {
    StubServer status("/generate", [](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
      res.set_content("busy", "text/plain");
    });
    CHECK(kind_of(RemoteBackend(status.url(), std::chrono::seconds(5))) == ErrorKind::BackendUnavailable);

    StubServer garbage("/generate", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{not json", "application/json");
    });
    CHECK(kind_of(RemoteBackend(garbage.url(), std::chrono::seconds(5))) == ErrorKind::BackendUnavailable);

    StubServer wrong_shape("/generate", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"output":"gong1"})", "application/json");
    });
    CHECK(kind_of(RemoteBackend(wrong_shape.url(), std::chrono::seconds(5))) == ErrorKind::BackendUnavailable);
  }

  TEST_CASE("unreachable host is BackendUnavailable") {
    int port = 0;
    {
      httplib::Server probe;
      port = probe.bind_to_any_port("127.0.0.1");
    }
    RemoteBackend b("http://127.0.0.1:" + std::to_string(port), std::chrono::milliseconds(500));
    CHECK(kind_of(b) == ErrorKind::BackendUnavailable);
  }

  TEST_CASE("pipeline surfaces BackendUnavailable through evaluate") {
    int port = 0;
    {
      httplib::Server probe;
      port = probe.bind_to_any_port("127.0.0.1");
    }
    auto backend = std::make_shared<RemoteBackend>("http://127.0.0.1:" + std::to_string(port), std::chrono::milliseconds(500));
    const auto p = make(backend, Style::MultipleChoice, true);
    const std::vector<Sample> test{sample_from_marked("农夫释耒，▂红▂女下机", parse_pinyin("gong1"))};
    try {
      (void)evaluate(p, test, "x", {});
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BackendUnavailable);
    }
  }
}
