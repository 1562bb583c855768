#pragma once

// Remote foresight protocol
//   POST /subgoal
//   request:  {"current": <base64 PNG>, "prompt": <string>, "aux": <base64 PNG> | null}
//   response: {"subgoal": <base64 PNG>}
// Any non-200 status is a transport error.

#include "i2s/foresight/codec.hpp"
#include "i2s/foresight/foresight.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace i2s::foresight {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json encode_request(const ForesightRequest& req) {
  nlohmann::json j;
  j["current"] = base64_encode(encode_png(req.current));
  j["prompt"] = req.prompt;
  j["aux"] = req.aux ? nlohmann::json(base64_encode(encode_png(*req.aux))) : nlohmann::json(nullptr);
  return j;
}

inline ForesightRequest decode_request(const nlohmann::json& j, const Intrinsics& intr) {
  ForesightRequest req;
  req.current = decode_png(base64_decode(j.at("current").get<std::string>()), intr);
  req.prompt = j.at("prompt").get<std::string>();
  if (j.contains("aux") && !j.at("aux").is_null())
    req.aux = decode_png(base64_decode(j.at("aux").get<std::string>()), intr);
  return req;
}

/// Synchronous client; one request in flight at a time.
class RemoteForesight : public Foresight {
 public:
  RemoteForesight(std::string host, int port, double timeout_s = 30.0) : client_(std::move(host), port) {
    const auto sec = static_cast<time_t>(timeout_s);
    const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
    client_.set_connection_timeout(sec, usec);
    client_.set_read_timeout(sec, usec);
  }

  Subgoal next_subgoal(const ForesightRequest& req) override {
    req.validate();
    const std::string body = encode_request(req).dump();
    auto res = client_.Post("/subgoal", body, "application/json");
    if (!res) throw TransportError("foresight: request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw TransportError("foresight: HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      const auto j = nlohmann::json::parse(res->body);
      return {decode_png(base64_decode(j.at("subgoal").get<std::string>()), req.current.intrinsics), std::nullopt,
              std::nullopt};
    } catch (const std::exception& e) {
      throw TransportError(std::string("foresight: malformed response: ") + e.what());
    }
  }

 private:
  httplib::Client client_;
};

/// Loopback server that answers the protocol with an in-process oracle. The oracle only sees
/// the image, so it localizes photometrically.
class ForesightStubServer {
 public:
  explicit ForesightStubServer(std::shared_ptr<KeyframeOracle> oracle, const std::string& host = "127.0.0.1")
      : oracle_(std::move(oracle)) {
    server_.Post("/subgoal", [this](const httplib::Request& rq, httplib::Response& rs) { handle(rq, rs); });
    port_ = server_.bind_to_any_port(host);
    if (port_ <= 0) throw TransportError("foresight stub: cannot bind " + host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ForesightStubServer(const ForesightStubServer&) = delete;
  ForesightStubServer& operator=(const ForesightStubServer&) = delete;

  ~ForesightStubServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

 private:
  void handle(const httplib::Request& rq, httplib::Response& rs) {
    try {
      const auto j = nlohmann::json::parse(rq.body);
      ForesightRequest req = decode_request(j, oracle_->intrinsics());
      std::lock_guard lock(mutex_);
      const Subgoal goal = oracle_->next_subgoal(req);
      rs.set_content(nlohmann::json{{"subgoal", base64_encode(encode_png(goal.image))}}.dump(), "application/json");
    } catch (const std::exception& e) {
      rs.status = 400;
      rs.set_content(e.what(), "text/plain");
    }
  }

  std::shared_ptr<KeyframeOracle> oracle_;
  httplib::Server server_;
  std::mutex mutex_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace i2s::foresight
