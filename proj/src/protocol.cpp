#include "peng/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "peng/error.hpp"

namespace peng {
namespace {

using ordered_json = nlohmann::ordered_json;

double require_number(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw Error(ErrorCode::parse_error, std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

}  // namespace

StreamRequest parse_request(std::string_view line) {
  auto obj = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw Error(ErrorCode::parse_error, "request is not a JSON object");
  }
  auto model = obj.find("model");
  if (model == obj.end() || !model->is_string() || model->get<std::string>().empty()) {
    throw Error(ErrorCode::parse_error, "field 'model' must be a non-empty string");
  }
  StreamRequest request;
  request.model = model->get<std::string>();
  request.epoch = require_number(obj, "epoch");
  request.val_acc = require_number(obj, "val_acc");
  request.val_loss = require_number(obj, "val_loss");
  return request;
}

std::string format_request(const StreamRequest& request) {
  ordered_json obj;
  obj["model"] = request.model;
  obj["epoch"] = request.epoch;
  obj["val_acc"] = request.val_acc;
  obj["val_loss"] = request.val_loss;
  return obj.dump();
}

std::string format_response(const std::string& model, const EngineDecision& decision) {
  ordered_json obj;
  obj["model"] = model;
  obj["action"] = decision.finished() ? "stop" : "continue";
  obj["estimate"] = decision.estimate ? ordered_json(*decision.estimate) : ordered_json(nullptr);
  obj["converged"] = decision.converged;
  obj["stop_epoch"] =
      decision.stop_epoch ? ordered_json(*decision.stop_epoch) : ordered_json(nullptr);
  return obj.dump();
}

std::string format_error(const std::optional<std::string>& model, std::string_view message) {
  ordered_json obj;
  obj["model"] = model ? ordered_json(*model) : ordered_json(nullptr);
  obj["error"] = std::string(message);
  return obj.dump();
}

std::string handle_line(SessionRegistry& registry, std::string_view line) {
  std::optional<std::string> model;
  try {
    auto request = parse_request(line);
    model = request.model;
    auto decision =
        registry.step_or_open(request.model, request.epoch, request.val_acc, request.val_loss);
    return format_response(request.model, decision);
  } catch (const std::exception& e) {
    return format_error(model, e.what());
  }
}

void serve_stream(SessionRegistry& registry, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out << handle_line(registry, line) << '\n' << std::flush;
  }
}

TcpServer::TcpServer(SessionRegistry& registry) : registry_(registry) {}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start(const std::string& host, std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::io_error, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorCode::invalid_argument, "not an IPv4 address: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(listen_fd_, 64) < 0) {
    std::string reason = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorCode::io_error, "bind " + host + ":" + std::to_string(port) + ": " + reason);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

void TcpServer::stop() {
  running_ = false;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mutex_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& worker : workers) worker.join();
}

void TcpServer::interrupt() noexcept {
  if (running_.exchange(false)) ::shutdown(listen_fd_, SHUT_RDWR);
}

void TcpServer::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    std::lock_guard lock(workers_mutex_);
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpServer::serve_connection(int fd) {
  std::string buffer;
  char chunk[4096];
  while (true) {
    ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::string reply = handle_line(registry_, line) + "\n";
      std::size_t sent = 0;
      while (sent < reply.size()) {
        ssize_t m = ::send(fd, reply.data() + sent, reply.size() - sent, MSG_NOSIGNAL);
        if (m <= 0) break;
        sent += static_cast<std::size_t>(m);
      }
    }
  }
  std::lock_guard lock(workers_mutex_);
  std::erase(client_fds_, fd);
  ::close(fd);
}

}  // namespace peng
