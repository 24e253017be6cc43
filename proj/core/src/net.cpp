#include "evf/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <thread>

#include "evf/errors.hpp"

namespace evf {

// --- framing ---

std::vector<std::uint8_t> encode_stream_frame(const StreamMsg& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(5 + msg.payload.size());
  const std::uint32_t len = std::uint32_t(msg.payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((len >> (8 * i)) & 0xff));
  out.push_back(std::uint8_t(msg.type));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

StreamMsg make_header_msg(const EvfHeader& header) {
  StreamMsg msg;
  msg.type = StreamMsgType::Header;
  encode_evf_header(header, msg.payload);
  return msg;
}

StreamMsg make_events_msg(std::span<const Event> events) {
  StreamMsg msg;
  msg.type = StreamMsgType::Events;
  msg.payload.reserve(events.size() * kEvfRecordSize);
  for (const Event& e : events) encode_evf_record(e, msg.payload);
  return msg;
}

StreamMsg make_end_msg() { return StreamMsg{StreamMsgType::End, {}}; }

StreamMsg decode_stream_frame(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
  if (bytes.size() < 5) throw PrematureEnd("stream frame: incomplete prefix");
  const std::uint32_t len = std::uint32_t(bytes[0]) | (std::uint32_t(bytes[1]) << 8) |
                            (std::uint32_t(bytes[2]) << 16) | (std::uint32_t(bytes[3]) << 24);
  const std::uint8_t type = bytes[4];
  if (type > 2) throw UnknownType("stream frame: unknown message type " + std::to_string(type));
  if (bytes.size() < 5 + std::size_t(len)) throw PrematureEnd("stream frame: truncated payload");

  StreamMsg msg;
  msg.type = StreamMsgType(type);
  msg.payload.assign(bytes.begin() + 5, bytes.begin() + 5 + len);
  switch (msg.type) {
    case StreamMsgType::Header:
      if (len != kEvfHeaderSize) throw BadFrame("stream frame: header payload must be 12 bytes");
      break;
    case StreamMsgType::Events:
      if (len % kEvfRecordSize != 0)
        throw BadFrame("stream frame: event payload not a whole number of records");
      break;
    case StreamMsgType::End:
      if (len != 0) throw BadFrame("stream frame: end message carries a payload");
      break;
  }
  consumed = 5 + std::size_t(len);
  return msg;
}

std::vector<Event> events_from_msg(const StreamMsg& msg) {
  if (msg.type != StreamMsgType::Events) throw BadFrame("message is not an event batch");
  std::vector<Event> events;
  events.reserve(msg.payload.size() / kEvfRecordSize);
  for (std::size_t off = 0; off < msg.payload.size(); off += kEvfRecordSize)
    events.push_back(decode_evf_record(std::span(msg.payload).subspan(off)));
  return events;
}

EvfHeader header_from_msg(const StreamMsg& msg) {
  if (msg.type != StreamMsgType::Header) throw BadFrame("message is not a header");
  return decode_evf_header(msg.payload);
}

// --- sockets ---

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw SourceError(what + ": " + std::strerror(errno));
}

}  // namespace

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  if (getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || !res)
    throw SourceError("cannot resolve '" + host + "'");

  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) throw SourceError("cannot connect to " + host + ":" + port_str);
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return TcpStream(fd);
}

TcpStream::TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

TcpStream::~TcpStream() {
  if (fd_ >= 0) ::close(fd_);
}

std::size_t TcpStream::read_some(std::uint8_t* buf, std::size_t n) {
  while (true) {
    const ssize_t got = ::recv(fd_, buf, n, 0);
    if (got >= 0) return std::size_t(got);
    if (errno == EINTR) continue;
    throw_errno("recv");
  }
}

void TcpStream::write_all(std::span<const std::uint8_t> bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t sent = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (sent < 0) {
      if (errno == EINTR) continue;
      throw SinkError(std::string("send: ") + std::strerror(errno));
    }
    off += std::size_t(sent);
  }
}

TcpListener::TcpListener(const std::string& bind_addr, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw_errno("socket");
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (bind_addr.empty() || bind_addr == "0.0.0.0") {
    addr.sin_addr.s_addr = INADDR_ANY;
  } else if (inet_pton(AF_INET, bind_addr.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw SourceError("invalid bind address '" + bind_addr + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(fd_);
    throw SourceError(std::string("bind: ") + std::strerror(err));
  }
  if (::listen(fd_, 1) != 0) {
    const int err = errno;
    ::close(fd_);
    throw SourceError(std::string("listen: ") + std::strerror(err));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

TcpStream TcpListener::accept() {
  while (true) {
    const int client = ::accept(fd_, nullptr, nullptr);
    if (client >= 0) {
      int one = 1;
      setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return TcpStream(client);
    }
    if (errno == EINTR) continue;
    throw_errno("accept");
  }
}

void serve_events(TcpStream& conn, std::span<const Event> events, const EvfHeader& header,
                  std::size_t batch_size, bool pace_realtime, const std::atomic<bool>* stop) {
  if (batch_size == 0) throw InvalidParams("batch size must be >= 1");
  {
    auto frame = encode_stream_frame(make_header_msg(header));
    conn.write_all(frame);
  }

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const std::uint64_t first_t = events.empty() ? 0 : events.front().t;

  for (std::size_t off = 0; off < events.size(); off += batch_size) {
    if (stop && stop->load(std::memory_order_relaxed)) break;
    const std::size_t n = std::min(batch_size, events.size() - off);
    if (pace_realtime) {
      const auto due = start + std::chrono::microseconds(events[off].t - first_t);
      while (clock::now() < due) {
        if (stop && stop->load(std::memory_order_relaxed)) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      }
    }
    auto frame = encode_stream_frame(make_events_msg(events.subspan(off, n)));
    conn.write_all(frame);
  }
  auto frame = encode_stream_frame(make_end_msg());
  conn.write_all(frame);
}

// --- TcpEventSource ---

TcpEventSource::TcpEventSource(TcpStream stream) : stream_(std::move(stream)) {}

TcpEventSource TcpEventSource::connect(const std::string& host, std::uint16_t port) {
  return TcpEventSource(TcpStream::connect(host, port));
}

StreamMsg TcpEventSource::read_msg() {
  while (true) {
    // try to decode from what we have
    if (buffer_.size() > buffer_pos_) {
      std::size_t consumed = 0;
      try {
        StreamMsg msg = decode_stream_frame(
            std::span(buffer_).subspan(buffer_pos_), consumed);
        buffer_pos_ += consumed;
        if (buffer_pos_ == buffer_.size()) {
          buffer_.clear();
          buffer_pos_ = 0;
        }
        return msg;
      } catch (const PrematureEnd&) {
        // need more bytes
      }
    }
    std::uint8_t chunk[4096];
    const std::size_t got = stream_.read_some(chunk, sizeof chunk);
    if (got == 0)
      throw PrematureEnd("peer closed before the end-of-stream message");
    buffer_.insert(buffer_.end(), chunk, chunk + got);
  }
}

EvfHeader TcpEventSource::header() {
  if (!header_) header_ = header_from_msg(read_msg());
  return *header_;
}

std::optional<Event> TcpEventSource::next() {
  if (ended_) return std::nullopt;
  if (!header_) header();
  while (pending_pos_ >= pending_.size()) {
    StreamMsg msg = read_msg();
    if (msg.type == StreamMsgType::End) {
      ended_ = true;
      return std::nullopt;
    }
    pending_ = events_from_msg(msg);
    pending_pos_ = 0;
  }
  return pending_[pending_pos_++];
}

}  // namespace evf
