#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "skipstep/dataset.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/protocol.hpp"
#include "skipstep/trace.hpp"

using namespace skipstep;
using nlohmann::json;

namespace {

class RunningStub {
 public:
  explicit RunningStub(BuiltinParams p) : stub_(p) {
    port_ = stub_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { stub_.serve(); });
  }
  ~RunningStub() {
    stub_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int port() const { return port_; }
  StubServer& stub() { return stub_; }

 private:
  StubServer stub_;
  int port_ = 0;
  std::thread thread_;
};

Dataset train_set(TaskKind task, int n) {
  return generate_splits(task, {n, 0, 0, 0}, 6)[0];
}

}  // namespace

namespace {

// Generated text, or a marker when the budget cannot be met.
std::string outcome(Learner& l, const ModelHandle& h, const Question& q,
                    const StepInstruction& instr) {
  try {
    return l.generate_text(h, q, instr);
  } catch (const InfeasibleBudget&) {
    return "<infeasible>";
  }
}

}  // namespace

TEST(Remote, MatchesBuiltinThroughTheStub) {
  const BuiltinParams params{Fidelity::stochastic, 3, 0.5, 100.0, 11};
  RunningStub server(params);
  RemoteLearner remote(server.url(), 10.0, 1);
  BuiltinLearner local(params);
  for (TaskKind task : kAllTasks) {
    const Dataset ds = train_set(task, 40);
    const auto hr = remote.train({ds, ModelMode::step_conditioned, 2, {}});
    const auto hl = local.train({ds, ModelMode::step_conditioned, 2, {}});
    EXPECT_EQ(hr.model_id, hl.model_id);
    EXPECT_EQ(hr.backend, server.url().insert(0, "remote:"));
    EXPECT_EQ(server.stub().learner().table(hr.model_id), local.table(hl.model_id));
    for (const auto& r : ds) {
      for (int b = std::max(1, r.question.full_steps - 2); b <= r.question.full_steps; ++b) {
        const auto instr = StepInstruction::budgeted(b);
        ASSERT_EQ(outcome(remote, hr, r.question, instr),
                  outcome(local, hl, r.question, instr));
      }
    }
    const auto sr = remote.train({ds, ModelMode::standard, 2, {}});
    EXPECT_EQ(sr.mode, ModelMode::standard);
    EXPECT_EQ(remote.generate_text(sr, ds[0].question, StepInstruction::standard()),
              render_trace_text(ds[0].question.reference_trace));
  }
}

TEST(Remote, InfeasibleBudgetCrossesTheWire) {
  RunningStub server(BuiltinParams{});
  RemoteLearner remote(server.url(), 10.0, 0);
  const Dataset ds = train_set(TaskKind::direction, 5);
  const auto h = remote.train({ds, ModelMode::step_conditioned, 2, {}});
  const Question& q = ds[0].question;
  EXPECT_THROW(remote.generate_text(h, q, StepInstruction::budgeted(q.full_steps + 1)),
               InfeasibleBudget);
}

TEST(Remote, ServerErrorsBecomeProtocolErrors) {
  RunningStub server(BuiltinParams{});
  RemoteLearner remote(server.url(), 10.0, 0);
  const Dataset ds = train_set(TaskKind::addition, 3);
  // unknown model: 404
  const ModelHandle ghost{"remote", "m-ghost", ModelMode::step_conditioned};
  EXPECT_THROW(remote.generate_text(ghost, ds[0].question, StepInstruction::budgeted(1)),
               ProtocolError);
  EXPECT_THROW(remote.train({ds, ModelMode::step_conditioned, 2, std::string("m-ghost")}),
               ProtocolError);
  EXPECT_THROW(remote.train({{}, ModelMode::step_conditioned, 2, {}}), EmptyDataset);
}

TEST(Stub, RejectsMismatchedPromptsAndBadBodies) {
  RunningStub server(BuiltinParams{});
  httplib::Client cli("127.0.0.1", server.port());
  const Dataset ds = train_set(TaskKind::direction, 3);
  json records = json::array();
  for (const auto& r : ds) records.push_back(record_to_json(r));
  auto res = cli.Post("/v1/train",
                      json{{"mode", "step_conditioned"}, {"epochs", 2}, {"records", records}}.dump(),
                      "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const auto model_id = json::parse(res->body).at("model_id").get<std::string>();

  const Question& q = ds[0].question;
  const json generate = {{"model_id", model_id},
                         {"prompt", "something else"},
                         {"question", question_to_json(q, StepInstruction::standard())}};
  res = cli.Post("/v1/generate", generate.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_TRUE(json::parse(res->body).contains("error"));

  res = cli.Post("/v1/train", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  res = cli.Post("/v1/train", json{{"mode", "step_conditioned"}, {"records", json::array()}}.dump(),
                 "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST(Remote, EchoServerModelId) {
  httplib::Server echo;
  int train_calls = 0;
  echo.Post("/v1/train", [&](const httplib::Request& req, httplib::Response& res) {
    ++train_calls;
    const json body = json::parse(req.body);
    EXPECT_EQ(body.at("mode"), "standard");
    EXPECT_EQ(body.at("epochs"), 2);
    EXPECT_EQ(body.at("records").size(), 2u);
    EXPECT_FALSE(body.contains("base_model"));
    res.set_content(json{{"model_id", "m1"}}.dump(), "application/json");
  });
  echo.Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    res.set_content(json{{"trace_text", body.at("prompt")}}.dump(), "application/json");
  });
  const int port = echo.bind_to_any_port("127.0.0.1");
  std::thread t([&] { echo.listen_after_bind(); });

  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  RemoteLearner remote(url, 10.0, 0);
  const Dataset ds = train_set(TaskKind::direction, 2);
  const ModelHandle h = remote.train({ds, ModelMode::standard, 2, {}});
  EXPECT_EQ(h, (ModelHandle{"remote:" + url, "m1", ModelMode::standard}));
  EXPECT_EQ(train_calls, 1);
  // the prompt on the wire is exactly render_prompt's output
  EXPECT_EQ(remote.generate_text(h, ds[0].question, StepInstruction::budgeted(2)),
            render_prompt(ds[0].question, StepInstruction::budgeted(2)));
  echo.stop();
  t.join();
}

TEST(Remote, RetriesServerErrorsThenGivesUp) {
  httplib::Server flaky;
  int calls = 0;
  flaky.Post("/v1/train", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    if (calls < 3) {
      res.status = 503;
      res.set_content(json{{"error", "busy"}}.dump(), "application/json");
      return;
    }
    res.set_content(json{{"model_id", "m-late"}}.dump(), "application/json");
  });
  const int port = flaky.bind_to_any_port("127.0.0.1");
  std::thread t([&] { flaky.listen_after_bind(); });
  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  const Dataset ds = train_set(TaskKind::direction, 1);

  RemoteLearner patient(url, 10.0, 3);
  EXPECT_EQ(patient.train({ds, ModelMode::standard, 2, {}}).model_id, "m-late");
  EXPECT_EQ(calls, 3);

  calls = 0;
  RemoteLearner hasty(url, 10.0, 1);
  EXPECT_THROW(hasty.train({ds, ModelMode::standard, 2, {}}), ProtocolError);
  EXPECT_EQ(calls, 2);
  flaky.stop();
  t.join();
}

TEST(Remote, UnreachableServer) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteLearner remote("http://127.0.0.1:" + std::to_string(port), 1.0, 1);
  EXPECT_THROW(remote.train({train_set(TaskKind::direction, 1), ModelMode::standard, 2, {}}),
               ProtocolError);
}
