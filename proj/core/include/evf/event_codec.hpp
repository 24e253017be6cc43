#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evf/event.hpp"

namespace evf {

// ---------------------------------------------------------------------------
// Text format: UTF-8, header line "x,y,t,p", one event per line.
// Polarity accepts 1/0 (0 remaps to -1) and +1/-1.
// ---------------------------------------------------------------------------

/// Pull-parser over a text event stream. Validates timestamp monotonicity and
/// applies the 0 -> -1 polarity remap.
class TextEventReader {
 public:
  explicit TextEventReader(std::istream& in, std::string_view header = "x,y,t,p");

  /// Reads the next event. Returns false at end of input.
  bool next(Event& out);

 private:
  std::istream& in_;
  std::size_t line_no_ = 1;  // header consumed in ctor
  bool have_prev_ = false;
  std::uint64_t prev_t_ = 0;
};

std::vector<Event> parse_event_text(std::istream& in, std::string_view header = "x,y,t,p");
std::vector<Event> parse_event_text(const std::string& text, std::string_view header = "x,y,t,p");

void write_event_text(std::ostream& out, std::span<const Event> events);

// ---------------------------------------------------------------------------
// Binary format "EVF1".
// Header (12 bytes LE): magic 45 56 46 31, u16 version(=1), u16 width,
// u16 height, u16 reserved(=0).
// Record (16 bytes LE): u64 t, u16 x, u16 y, i8 p, 3 zero pad bytes.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kEvfHeaderSize = 12;
inline constexpr std::size_t kEvfRecordSize = 16;

struct EvfHeader {
  std::uint16_t version = 1;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
};

void encode_evf_header(const EvfHeader& h, std::vector<std::uint8_t>& out);
void encode_evf_record(const Event& e, std::vector<std::uint8_t>& out);

std::vector<std::uint8_t> encode_events_binary(std::span<const Event> events, const EvfHeader& meta);

/// Parses a header from the first kEvfHeaderSize bytes.
EvfHeader decode_evf_header(std::span<const std::uint8_t> bytes);
Event decode_evf_record(std::span<const std::uint8_t> bytes);

struct DecodedEvents {
  EvfHeader header;
  std::vector<Event> events;
};

DecodedEvents decode_events_binary(std::span<const std::uint8_t> bytes);

// File helpers.
void write_evf_file(const std::string& path, std::span<const Event> events, const EvfHeader& meta);
DecodedEvents read_evf_file(const std::string& path);

std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace evf
