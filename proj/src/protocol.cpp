#include "skipstep/protocol.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "skipstep/engine.hpp"
#include "skipstep/errors.hpp"
#include "skipstep/trace.hpp"

namespace skipstep {

using nlohmann::json;

namespace {

constexpr std::string_view kInfeasible = "infeasible_budget";

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& what) {
  reply(res, status, {{"error", what}});
}

// Runs a handler, mapping library errors onto protocol statuses.
template <typename F>
void guarded(httplib::Response& res, F&& fn) {
  try {
    fn();
  } catch (const InfeasibleBudget& e) {
    reply_error(res, 422, std::string(kInfeasible) + ": " + e.what());
  } catch (const SchemaError& e) {
    reply_error(res, 400, e.what());
  } catch (const EmptyDataset& e) {
    reply_error(res, 400, e.what());
  } catch (const ConfigError& e) {
    reply_error(res, 404, e.what());
  } catch (const json::exception& e) {
    reply_error(res, 400, std::string("bad request body: ") + e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------- client

RemoteLearner::RemoteLearner(std::string url, double timeout_s, int retries)
    : url_(std::move(url)), timeout_s_(timeout_s), retries_(retries) {
  if (url_.empty()) throw ConfigError("remote learner needs a url");
  if (timeout_s_ <= 0) throw ConfigError("timeout must be positive");
  if (retries_ < 0) throw ConfigError("retries must be non-negative");
}

json RemoteLearner::post(const std::string& path, const json& body) {
  const std::string payload = body.dump();
  const auto timeout = std::chrono::duration<double>(timeout_s_);
  std::string last_error;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
    }
    httplib::Client cli(url_);
    cli.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_read_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_write_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    auto res = cli.Post(path, payload, "application/json");
    if (!res) {
      last_error = url_ + path + ": " + httplib::to_string(res.error());
      continue;
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception&) {
      last_error = url_ + path + ": response is not JSON";
      if (res->status >= 500) continue;
      throw ProtocolError(last_error);
    }
    if (res->status >= 200 && res->status < 300) return reply;
    const std::string what =
        reply.is_object() && reply.contains("error") && reply["error"].is_string()
            ? reply["error"].get<std::string>()
            : res->body;
    if (res->status == 422 && what.rfind(kInfeasible, 0) == 0) {
      throw InfeasibleBudget(what);
    }
    last_error = url_ + path + " returned " + std::to_string(res->status) +
                 ": " + what;
    if (res->status < 500) break;
  }
  throw ProtocolError(last_error);
}

ModelHandle RemoteLearner::train(const TrainRequest& request) {
  if (request.dataset.empty()) throw EmptyDataset("training set is empty");
  json records = json::array();
  for (const auto& r : request.dataset) records.push_back(record_to_json(r));
  json body = {{"mode", to_string(request.mode)},
               {"epochs", request.epochs},
               {"records", std::move(records)}};
  if (request.base_model) body["base_model"] = *request.base_model;
  const json reply = post("/v1/train", body);
  if (!reply.contains("model_id") || !reply["model_id"].is_string()) {
    throw ProtocolError("train reply carries no model_id");
  }
  return {"remote:" + url_, reply["model_id"].get<std::string>(), request.mode};
}

std::string RemoteLearner::generate_text(const ModelHandle& model,
                                         const Question& q,
                                         const StepInstruction& instr) {
  const json body = {{"model_id", model.model_id},
                     {"prompt", render_prompt(q, instr)},
                     {"question", question_to_json(q, instr)}};
  const json reply = post("/v1/generate", body);
  if (!reply.contains("trace_text") || !reply["trace_text"].is_string()) {
    throw ProtocolError("generate reply carries no trace_text");
  }
  return reply["trace_text"].get<std::string>();
}

// ---------------------------------------------------------------- server

StubServer::StubServer(BuiltinParams params)
    : learner_(params), server_(std::make_unique<httplib::Server>()) {
  server_->set_payload_max_length(1ull << 30);

  server_->Post("/v1/train", [this](const httplib::Request& req,
                                    httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      TrainRequest tr;
      tr.mode = parse_model_mode(body.at("mode").get<std::string>());
      tr.epochs = body.value("epochs", 1);
      if (body.contains("base_model") && !body["base_model"].is_null()) {
        tr.base_model = body["base_model"].get<std::string>();
      }
      const auto& records = body.at("records");
      for (std::size_t i = 0; i < records.size(); ++i) {
        tr.dataset.push_back(record_from_json(records[i], i + 1));
      }
      const ModelHandle h = learner_.train(tr);
      reply(res, 200, {{"model_id", h.model_id}});
    });
  });

  server_->Post("/v1/generate", [this](const httplib::Request& req,
                                       httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const auto model_id = body.at("model_id").get<std::string>();
      const auto prompt = body.at("prompt").get<std::string>();
      const Question q = question_from_json(body.at("question"));
      const StepInstruction instr = instruction_from_prompt(prompt);
      if (render_prompt(q, instr) != prompt) {
        reply_error(res, 400, "prompt does not match the question");
        return;
      }
      const ModelHandle h{"builtin", model_id, learner_.mode(model_id)};
      reply(res, 200, {{"trace_text", learner_.generate_text(h, q, instr)}});
    });
  });
}

StubServer::~StubServer() { stop(); }

int StubServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw IoError("could not bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw IoError("could not bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void StubServer::serve() { server_->listen_after_bind(); }

void StubServer::stop() {
  if (server_) server_->stop();
}

}  // namespace skipstep
