#pragma once

// HTTP learner protocol.
//
//   POST /v1/train    {mode, epochs, base_model?, records: [record, ...]}
//                     -> {model_id}
//   POST /v1/generate {model_id, prompt, question} -> {trace_text}
//
// Errors come back as {error} with a non-2xx status. A budget the model cannot
// meet is status 422 with an error starting "infeasible_budget".

#include <memory>
#include <string>

#include "skipstep/learner.hpp"

namespace httplib {
class Server;
}

namespace skipstep {

class RemoteLearner final : public Learner {
 public:
  /// `url` is "http://host:port". Transport failures and 5xx responses are
  /// retried up to `retries` times.
  RemoteLearner(std::string url, double timeout_s = 30.0, int retries = 3);

  ModelHandle train(const TrainRequest& request) override;
  std::string generate_text(const ModelHandle& model, const Question& q,
                            const StepInstruction& instr) override;

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body);

  std::string url_;
  double timeout_s_;
  int retries_;
};

/// Reference server for the protocol, backed by a BuiltinLearner.
class StubServer {
 public:
  explicit StubServer(BuiltinParams params);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void serve();
  void stop();

  BuiltinLearner& learner() { return learner_; }

 private:
  BuiltinLearner learner_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace skipstep
