#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "fedprint/fedavg/session.hpp"
#include "fedprint/fedavg/wire.hpp"

namespace fedprint::fedavg {

/// Down is server to client, up is client to server.
struct Traffic {
  std::uint64_t frames_down = 0;
  std::uint64_t bytes_down = 0;
  std::uint64_t frames_up = 0;
  std::uint64_t bytes_up = 0;

  friend bool operator==(const Traffic&, const Traffic&) = default;
};

/// Traffic totals plus a breakdown keyed by each frame's round field.
struct TransferStats {
  Traffic total;
  std::map<std::uint32_t, Traffic> by_round;

  void count_down(const Frame& frame, std::size_t bytes);
  void count_up(const Frame& frame, std::size_t bytes);
};

using LogFn = std::function<void(const std::string&)>;

/// Runs a whole session in the calling thread. Every frame is encoded and
/// decoded on its way, exactly as on a socket. `clients` must hold one session
/// per reader the server expects.
TransferStats run_in_process(ServerSession& server, std::span<ClientSession* const> clients);

class ConnectionClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A reader vanished or misbehaved mid-round; the round was not aggregated.
class RoundAborted : public std::runtime_error {
 public:
  RoundAborted(std::uint32_t reader_id, std::size_t round, const std::string& why)
      : std::runtime_error("round " + std::to_string(round) + " aborted: reader " + std::to_string(reader_id) + " " +
                           why),
        reader_id_(reader_id),
        round_(round) {}
  std::uint32_t reader_id() const noexcept { return reader_id_; }
  std::size_t round() const noexcept { return round_; }

 private:
  std::uint32_t reader_id_;
  std::size_t round_;
};

/// Owning socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  int release() noexcept {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close();

  /// Whole-frame I/O. receive_frame returns nullopt on a clean EOF before the
  /// first header byte and throws ConnectionClosed on EOF inside a frame.
  std::size_t send_frame(const Frame& frame);
  std::optional<Frame> receive_frame();

  /// 0 disables the timeout.
  void set_receive_timeout(int milliseconds);

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  /// Port 0 picks a free port.
  TcpListener(const std::string& host, std::uint16_t port);
  std::uint16_t port() const noexcept { return port_; }
  Socket accept();

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

Socket tcp_connect(const std::string& host, std::uint16_t port, int retry_ms = 0);

/// "host:port" (host defaults to 127.0.0.1 when only a port is given).
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text);

struct ServeOptions {
  LogFn log;
  /// Time a new connection has to send its hello.
  int hello_timeout_ms = 10000;
};

/// Accepts connections until every reader has joined, then runs the session.
/// A connection with a bad hello is closed and logged; the server keeps
/// accepting. A reader disconnecting mid-round raises RoundAborted.
TransferStats serve(TcpListener& listener, ServerSession& session, const ServeOptions& options = {});

/// Joins the server and answers frames until shutdown.
TransferStats run_client(Socket& connection, ClientSession& session, const LogFn& log = {});

}  // namespace fedprint::fedavg
