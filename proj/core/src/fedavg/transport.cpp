#include "fedprint/fedavg/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>
#include <vector>

namespace fedprint::fedavg {
namespace {

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

void add(Traffic& t, bool down, std::size_t bytes) {
  if (down) {
    ++t.frames_down;
    t.bytes_down += bytes;
  } else {
    ++t.frames_up;
    t.bytes_up += bytes;
  }
}

void note(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

}  // namespace

void TransferStats::count_down(const Frame& frame, std::size_t bytes) {
  add(total, true, bytes);
  add(by_round[frame.round], true, bytes);
}

void TransferStats::count_up(const Frame& frame, std::size_t bytes) {
  add(total, false, bytes);
  add(by_round[frame.round], false, bytes);
}

TransferStats run_in_process(ServerSession& server, std::span<ClientSession* const> clients) {
  TransferStats stats;
  std::map<std::uint32_t, ClientSession*> by_id;
  for (ClientSession* c : clients) by_id[c->reader().reader_id] = c;

  auto to_server = [&](const Frame& f) {
    const std::vector<std::uint8_t> bytes = encode_frame(f);
    stats.count_up(f, bytes.size());
    return decode_frame(bytes);
  };
  for (ClientSession* c : clients) server.on_join(to_server(c->join_frame()));

  std::vector<Outbound> pending = server.start();
  while (!pending.empty()) {
    std::vector<Frame> replies;
    for (const Outbound& out : pending) {
      auto it = by_id.find(out.reader_id);
      if (it == by_id.end()) throw std::logic_error("no client for reader " + std::to_string(out.reader_id));
      const std::vector<std::uint8_t> bytes = encode_frame(out.frame);
      stats.count_down(out.frame, bytes.size());
      if (auto reply = it->second->on_frame(decode_frame(bytes))) replies.push_back(std::move(*reply));
    }
    pending.clear();
    for (const Frame& r : replies) {
      std::vector<Outbound> next = server.on_message(to_server(r));
      pending.insert(pending.end(), std::make_move_iterator(next.begin()), std::make_move_iterator(next.end()));
    }
  }
  return stats;
}

Socket::~Socket() { close(); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.release();
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

std::size_t Socket::send_frame(const Frame& frame) {
  const std::vector<std::uint8_t> bytes = encode_frame(frame);
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionClosed(sys_error("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
  return bytes.size();
}

namespace {

// Returns bytes read; stops early only on EOF.
std::size_t read_fully(int fd, std::uint8_t* dst, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, dst + got, n - got, 0);
    if (r == 0) break;
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw ConnectionClosed("receive timed out");
      throw ConnectionClosed(sys_error("recv"));
    }
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace

std::optional<Frame> Socket::receive_frame() {
  std::vector<std::uint8_t> buf(kFrameHeaderSize);
  const std::size_t got = read_fully(fd_, buf.data(), kFrameHeaderSize);
  if (got == 0) return std::nullopt;
  if (got < kFrameHeaderSize) throw ConnectionClosed("connection closed inside a frame header");
  const FrameHeader h = decode_header(buf);
  buf.resize(frame_size(h.payload_len));
  if (read_fully(fd_, buf.data() + kFrameHeaderSize, h.payload_len) < h.payload_len) {
    throw ConnectionClosed("connection closed inside a frame payload");
  }
  return decode_frame(buf);
}

void Socket::set_receive_timeout(int milliseconds) {
  timeval tv{};
  tv.tv_sec = milliseconds / 1000;
  tv.tv_usec = (milliseconds % 1000) * 1000;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  sock_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!sock_.valid()) throw std::runtime_error(sys_error("socket"));
  const int one = 1;
  ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw std::invalid_argument("listen address must be a dotted IPv4 address, got '" + host + "'");
  }
  if (::bind(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw std::runtime_error(sys_error("bind " + host + ":" + std::to_string(port)));
  }
  if (::listen(sock_.fd(), 16) != 0) throw std::runtime_error(sys_error("listen"));
  socklen_t len = sizeof addr;
  ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Socket TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(sock_.fd(), nullptr, nullptr);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return Socket(fd);
    }
    if (errno != EINTR) throw std::runtime_error(sys_error("accept"));
  }
}

Socket tcp_connect(const std::string& host, std::uint16_t port, int retry_ms) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw std::runtime_error("resolve " + host + ": " + ::gai_strerror(rc));
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(retry_ms);
  for (;;) {
    Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
    if (s.valid() && ::connect(s.fd(), res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      const std::string err = sys_error("connect " + host + ":" + service);
      ::freeaddrinfo(res);
      throw std::runtime_error(err);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  const std::string host = colon == std::string::npos ? "127.0.0.1" : text.substr(0, colon);
  const std::string port = colon == std::string::npos ? text : text.substr(colon + 1);
  try {
    std::size_t used = 0;
    const unsigned long p = std::stoul(port, &used);
    if (used != port.size() || p == 0 || p > 65535) throw std::invalid_argument("range");
    return {host.empty() ? "127.0.0.1" : host, static_cast<std::uint16_t>(p)};
  } catch (const std::exception&) {
    throw std::invalid_argument("bad endpoint '" + text + "' (expected host:port)");
  }
}

TransferStats serve(TcpListener& listener, ServerSession& session, const ServeOptions& options) {
  TransferStats stats;
  std::map<std::uint32_t, Socket> conns;
  while (!session.ready()) {
    Socket s = listener.accept();
    s.set_receive_timeout(options.hello_timeout_ms);
    try {
      std::optional<Frame> hello = s.receive_frame();
      if (!hello) throw ConnectionClosed("closed before hello");
      session.on_join(*hello);
      stats.count_up(*hello, frame_size(hello->payload.size()));
      s.set_receive_timeout(0);
      note(options.log, "reader " + std::to_string(hello->reader_id) + " joined with " +
                            std::to_string(hello->example_count) + " examples");
      conns.emplace(hello->reader_id, std::move(s));
    } catch (const std::exception& e) {
      note(options.log, std::string("rejected connection: ") + e.what());
    }
  }

  auto deliver = [&](const std::vector<Outbound>& out) {
    for (const Outbound& o : out) {
      try {
        stats.count_down(o.frame, conns.at(o.reader_id).send_frame(o.frame));
      } catch (const ConnectionClosed& e) {
        note(options.log, "reader " + std::to_string(o.reader_id) + " unreachable: " + e.what());
        throw RoundAborted(o.reader_id, session.round(), "unreachable");
      }
    }
  };
  deliver(session.start());

  std::vector<pollfd> fds;
  std::vector<std::uint32_t> ids;
  for (auto& [id, s] : conns) {
    fds.push_back({s.fd(), POLLIN, 0});
    ids.push_back(id);
  }
  while (session.phase() != ServerSession::Phase::finished) {
    for (pollfd& p : fds) p.revents = 0;
    if (::poll(fds.data(), fds.size(), -1) < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(sys_error("poll"));
    }
    for (std::size_t i = 0; i < fds.size() && session.phase() != ServerSession::Phase::finished; ++i) {
      if (fds[i].revents == 0) continue;
      const std::uint32_t id = ids[i];
      std::optional<Frame> frame;
      try {
        frame = conns.at(id).receive_frame();
        if (!frame) throw ConnectionClosed("disconnected");
        stats.count_up(*frame, frame_size(frame->payload.size()));
        deliver(session.on_message(*frame));
      } catch (const ConnectionClosed& e) {
        note(options.log, "reader " + std::to_string(id) + " disconnected during round " +
                              std::to_string(session.round()) + ": " + e.what());
        throw RoundAborted(id, session.round(), "disconnected");
      } catch (const ProtocolError& e) {
        note(options.log, "reader " + std::to_string(id) + " sent an invalid frame: " + e.what());
        throw RoundAborted(id, session.round(), std::string("sent an invalid frame: ") + e.what());
      }
    }
  }
  return stats;
}

TransferStats run_client(Socket& connection, ClientSession& session, const LogFn& log) {
  TransferStats stats;
  const Frame hello = session.join_frame();
  stats.count_up(hello, connection.send_frame(hello));
  while (!session.finished()) {
    std::optional<Frame> frame = connection.receive_frame();
    if (!frame) throw ConnectionClosed("server closed the connection");
    stats.count_down(*frame, frame_size(frame->payload.size()));
    std::optional<Frame> reply = session.on_frame(*frame);
    if (reply) {
      stats.count_up(*reply, connection.send_frame(*reply));
      note(log, "round " + std::to_string(reply->round) + " done, loss " +
                    std::to_string(session.reader().last_loss));
    }
  }
  return stats;
}

}  // namespace fedprint::fedavg
