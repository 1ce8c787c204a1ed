#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "asymnet/backend/data_pump.hpp"
#include "asymnet/backend/event_builder.hpp"
#include "asymnet/backend/packet_mover.hpp"
#include "asymnet/frontend/event_generator.hpp"
#include "asymnet/transport/client.hpp"
#include "asymnet/transport/server.hpp"

namespace asymnet::transport {

// Owned UDP socket bound to 127.0.0.1 on an ephemeral port.
class UdpSocket {
 public:
  UdpSocket() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) fail("socket");
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    a.sin_port = 0;
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a) < 0) fail("bind");
    socklen_t len = sizeof addr_;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr_), &len) < 0) fail("getsockname");
    int buf = 4 << 20;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
  }
  ~UdpSocket() {
    if (fd_ >= 0) ::close(fd_);
  }
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  const sockaddr_in& address() const { return addr_; }

  void send_to(const sockaddr_in& to, const std::uint8_t* data, std::size_t n) {
    for (;;) {
      auto r = ::sendto(fd_, data, n, 0, reinterpret_cast<const sockaddr*>(&to), sizeof to);
      if (r == static_cast<ssize_t>(n)) return;
      if (r < 0 && (errno == EINTR || errno == ENOBUFS || errno == EAGAIN)) {
        std::this_thread::yield();
        continue;
      }
      fail("sendto");
    }
  }

  // Waits up to `timeout_ms`; returns the datagram size or -1 on timeout.
  long receive(std::vector<std::uint8_t>& buf, int timeout_ms) {
    pollfd p{fd_, POLLIN, 0};
    int r = ::poll(&p, 1, timeout_ms);
    if (r < 0) {
      if (errno == EINTR) return -1;
      fail("poll");
    }
    if (r == 0) return -1;
    auto n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) return -1;
      fail("recv");
    }
    return static_cast<long>(n);
  }

 private:
  [[noreturn]] static void fail(const char* what) { throw Error(std::string("udp: ") + what + ": " + std::strerror(errno)); }
  int fd_ = -1;
  sockaddr_in addr_{};
};

struct UdpLoopbackConfig {
  unsigned cards = 4;
  frontend::EventGeneratorConfig generator{16, 60, frontend::FillPattern::Prbs, 0xA5A5};
  std::uint64_t events = 100;
  std::uint32_t credit = 8;
  std::size_t mtu = 8192;
  std::size_t pool_size = 64;
  std::size_t header_reserve = 64;
  int idle_timeout_ms = 50;    // client re-issues its grant after this much silence
  int overall_timeout_ms = 20000;
};

struct UdpLoopbackResult {
  ClientStats client;
  std::uint64_t frames_sent = 0;
  std::uint64_t grants_received = 0;
  std::uint64_t max_frames_per_grant = 0;
  std::uint64_t builder_bytes = 0;
  double seconds = 0;
  double MB_per_s = 0;
  bool completed = false;
};

// Integration run over real datagram sockets: the calling thread builds events through
// the event builder into the buffer pool, a sender thread drains filled buffers under
// credit control, and a receiver thread plays the DAQ client. The pool FIFOs are the
// only structures shared between threads.
inline UdpLoopbackResult run_udp_loopback(const UdpLoopbackConfig& cfg) {
  if (cfg.cards == 0 || cfg.cards > 32) throw ConfigError("udp loopback: cards must be 1..32");
  cfg.generator.validate();
  const std::size_t content = cfg.mtu - kDefaultFrameOverhead - kTransportHeaderBytes;
  if (cfg.mtu <= kDefaultFrameOverhead + kTransportHeaderBytes || content < cfg.generator.packet_bytes(0))
    throw ConfigError("udp loopback: mtu too small for the generated packets");

  backend::BufferPool pool(backend::PoolConfig{.buffer_bytes = cfg.header_reserve + content, .header_reserve = cfg.header_reserve, .pool_size = cfg.pool_size});
  backend::PacketMover mover(pool);
  std::vector<backend::DataPump> pumps;
  for (unsigned l = 0; l < cfg.cards; ++l) pumps.emplace_back(l);
  std::uint32_t mask = cfg.cards >= 32 ? 0xFFFFFFFFu : ((1u << cfg.cards) - 1);
  backend::EventBuilder builder(std::span<backend::DataPump>(pumps), mover, mask);

  GeneratorTruth truth{};
  for (unsigned l = 0; l < cfg.cards; ++l) truth[l] = cfg.generator;

  UdpSocket server_sock, client_sock;
  std::atomic<bool> producer_done{false}, stop{false};
  std::atomic<std::uint64_t> frames_sent{0}, grants_received{0}, max_per_grant{0};
  std::exception_ptr server_error, client_error;
  UdpLoopbackResult result;

  auto t0 = std::chrono::steady_clock::now();
  auto deadline = t0 + std::chrono::milliseconds(cfg.overall_timeout_ms);

  std::thread server_thread([&] {
    try {
      TransportServer server(pool);
      std::vector<std::uint8_t> buf(64);
      auto to = client_sock.address();
      while (!stop.load()) {
        long n = server_sock.receive(buf, server.can_send() ? 0 : 1);
        if (n > 0) {
          if (auto g = read_grant(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)))) {
            server.on_grant(*g);
            ++grants_received;
          }
        }
        while (server.can_send()) {
          auto f = server.take_frame();
          server_sock.send_to(to, f->bytes.data(), f->bytes.size());
          server.frame_done();
          ++frames_sent;
        }
        if (server.stats().max_frames_per_grant > max_per_grant.load()) max_per_grant = server.stats().max_frames_per_grant;
      }
    } catch (...) {
      server_error = std::current_exception();
      stop = true;
    }
  });

  std::thread client_thread([&] {
    try {
      TransportClient client(cfg.credit, truth, false);
      std::vector<std::uint8_t> buf(cfg.mtu + 64);
      std::uint8_t g[kGrantBytes];
      auto to = server_sock.address();
      write_grant(g, client.initial_grant());
      client_sock.send_to(to, g, kGrantBytes);
      while (!stop.load() && client.stats().events < cfg.events) {
        long n = client_sock.receive(buf, cfg.idle_timeout_ms);
        if (n < 0) {
          write_grant(g, client.reissue_grant());
          client_sock.send_to(to, g, kGrantBytes);
          if (std::chrono::steady_clock::now() > deadline) break;
          continue;
        }
        if (auto next = client.on_frame(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)))) {
          write_grant(g, *next);
          client_sock.send_to(to, g, kGrantBytes);
        }
      }
      result.client = client.stats();
      stop = true;
    } catch (...) {
      client_error = std::current_exception();
      stop = true;
    }
  });

  // Producer: feed packets through the pumps and builder, one channel round at a time.
  try {
    for (std::uint64_t e = 0; e < cfg.events && !stop.load(); ++e) {
      for (unsigned ch = 0; ch < cfg.generator.channels_per_event && !stop.load(); ++ch) {
        for (unsigned l = 0; l < cfg.cards; ++l) {
          frontend::EventId id{static_cast<std::uint8_t>(l), static_cast<std::uint32_t>(e), e * 1000};
          pumps[l].on_packet(msg::serialize(frontend::generate_packet(cfg.generator, id, ch)));
        }
        for (;;) {
          while (builder.step()) {
          }
          bool drained = true;
          for (auto& p : pumps) drained &= p.empty();
          if (drained && (ch + 1 < cfg.generator.channels_per_event || builder.phase() == backend::BuilderPhase::AwaitSOE))
            break;
          if (builder.phase() == backend::BuilderPhase::Halted) throw Error("udp loopback: builder halted");
          if (stop.load()) break;
          std::this_thread::yield();
        }
      }
    }
  } catch (...) {
    stop = true;
    server_thread.join();
    client_thread.join();
    throw;
  }
  producer_done = true;
  client_thread.join();
  stop = true;
  server_thread.join();
  if (server_error) std::rethrow_exception(server_error);
  if (client_error) std::rethrow_exception(client_error);

  auto t1 = std::chrono::steady_clock::now();
  result.seconds = std::chrono::duration<double>(t1 - t0).count();
  result.frames_sent = frames_sent.load();
  result.grants_received = grants_received.load();
  result.max_frames_per_grant = max_per_grant.load();
  result.builder_bytes = mover.stats().bytes;
  result.MB_per_s = static_cast<double>(result.client.content_bytes) / result.seconds / 1e6;
  result.completed = result.client.events == cfg.events;
  return result;
}

}  // namespace asymnet::transport
