#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evf/event.hpp"
#include "evf/event_codec.hpp"
#include "evf/pipeline.hpp"

namespace evf {

// ---------------------------------------------------------------------------
// Length-prefixed event transport over a reliable byte stream:
// u32 LE payload length, u8 message type, payload.
// Type 0: EVF1 header (12 bytes). Type 1: whole 16-byte EVF1 records.
// Type 2: end of stream (empty payload).
// ---------------------------------------------------------------------------

enum class StreamMsgType : std::uint8_t { Header = 0, Events = 1, End = 2 };

struct StreamMsg {
  StreamMsgType type = StreamMsgType::End;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_stream_frame(const StreamMsg& msg);

StreamMsg make_header_msg(const EvfHeader& header);
StreamMsg make_events_msg(std::span<const Event> events);
StreamMsg make_end_msg();

/// Decodes one message from the front of `bytes`, advancing `consumed`.
/// Throws PrematureEnd when the buffer holds less than one full message,
/// UnknownType for an unrecognized type byte, BadFrame for misaligned
/// type-1 payloads.
StreamMsg decode_stream_frame(std::span<const std::uint8_t> bytes, std::size_t& consumed);

std::vector<Event> events_from_msg(const StreamMsg& msg);
EvfHeader header_from_msg(const StreamMsg& msg);

// ---------------------------------------------------------------------------
// Minimal TCP plumbing (POSIX sockets, RAII).
// ---------------------------------------------------------------------------

class TcpStream {
 public:
  static TcpStream connect(const std::string& host, std::uint16_t port);

  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;
  ~TcpStream();

  /// Reads up to `n` bytes; 0 means the peer closed.
  std::size_t read_some(std::uint8_t* buf, std::size_t n);
  void write_all(std::span<const std::uint8_t> bytes);

  explicit TcpStream(int fd) : fd_(fd) {}

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  /// Binds and listens; port 0 selects an ephemeral port.
  TcpListener(const std::string& bind_addr, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  TcpStream accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Sends header, event batches of `batch_size`, then the end marker.
/// With pace_realtime the send schedule honours inter-event timestamps.
void serve_events(TcpStream& conn, std::span<const Event> events, const EvfHeader& header,
                  std::size_t batch_size, bool pace_realtime = false,
                  const std::atomic<bool>* stop = nullptr);

/// Pipeline source fed by the framed TCP transport.
class TcpEventSource : public EventSource {
 public:
  explicit TcpEventSource(TcpStream stream);
  static TcpEventSource connect(const std::string& host, std::uint16_t port);

  EvfHeader header() override;
  std::optional<Event> next() override;

 private:
  StreamMsg read_msg();

  TcpStream stream_;
  std::vector<std::uint8_t> buffer_;
  std::size_t buffer_pos_ = 0;
  std::optional<EvfHeader> header_;
  std::vector<Event> pending_;
  std::size_t pending_pos_ = 0;
  bool ended_ = false;
};

}  // namespace evf
