#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "peng/analyzer.hpp"
#include "peng/engine.hpp"

namespace peng {

// Newline-delimited JSON streaming protocol.
//
//   request:  {"model": str, "epoch": number, "val_acc": number, "val_loss": number}
//   response: {"model": str, "action": "continue"|"stop", "estimate": number|null,
//              "converged": bool, "stop_epoch": number|null}
//
// A request that cannot be served gets {"model": str|null, "error": str} instead.

struct StreamRequest {
  std::string model;
  double epoch = 0.0;
  double val_acc = 0.0;
  double val_loss = 0.0;
};

/// Throws Error(parse_error) on malformed JSON or missing/mistyped fields.
StreamRequest parse_request(std::string_view line);
std::string format_request(const StreamRequest& request);

std::string format_response(const std::string& model, const EngineDecision& decision);
std::string format_error(const std::optional<std::string>& model, std::string_view message);

/// Answers one request line against the registry, opening sessions on first
/// contact. Never throws; failures become error responses.
std::string handle_line(SessionRegistry& registry, std::string_view line);

/// Serves requests from `in` until EOF, one response line per non-blank request line.
void serve_stream(SessionRegistry& registry, std::istream& in, std::ostream& out);

/// Line protocol over TCP; one thread per connection, all sharing the registry.
class TcpServer {
 public:
  explicit TcpServer(SessionRegistry& registry);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Binds and starts accepting. Port 0 picks an ephemeral port.
  void start(const std::string& host, std::uint16_t port);
  std::uint16_t port() const { return port_; }
  /// Blocks until stop() is called from another thread.
  void wait();
  void stop();
  /// Async-signal-safe: stops accepting so wait() returns; call stop() afterwards.
  void interrupt() noexcept;

 private:
  void accept_loop();
  void serve_connection(int fd);

  SessionRegistry& registry_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

}  // namespace peng
