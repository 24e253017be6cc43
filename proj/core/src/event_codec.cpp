#include "evf/event_codec.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "evf/errors.hpp"

namespace evf {

namespace {

constexpr std::uint8_t kMagic[4] = {0x45, 0x56, 0x46, 0x31};  // "EVF1"

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t parse_u64_field(std::string_view field, std::size_t line, const char* name) {
  field = trim(field);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw MalformedRow(line, std::string("unparsable ") + name + " field '" + std::string(field) + "'");
  return v;
}

std::int8_t parse_polarity(std::string_view field, std::size_t line) {
  field = trim(field);
  if (field == "1" || field == "+1") return 1;
  if (field == "0" || field == "-1") return -1;
  throw MalformedRow(line, "unparsable p field '" + std::string(field) + "'");
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (std::uint16_t(p[1]) << 8));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

// --- text ---

TextEventReader::TextEventReader(std::istream& in, std::string_view header) : in_(in) {
  std::string line;
  if (!std::getline(in_, line)) throw MalformedRow(1, "missing header line");
  if (trim(line) != trim(header))
    throw MalformedRow(1, "header '" + line + "' does not match expected '" + std::string(header) + "'");
}

bool TextEventReader::next(Event& out) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    std::string_view row = trim(line);
    if (row.empty()) continue;

    std::string_view fields[4];
    std::size_t n_fields = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= row.size(); ++i) {
      if (i == row.size() || row[i] == ',') {
        if (n_fields >= 4) throw MalformedRow(line_no_, "expected 4 fields");
        fields[n_fields++] = row.substr(start, i - start);
        start = i + 1;
      }
    }
    if (n_fields != 4) throw MalformedRow(line_no_, "expected 4 fields");

    std::uint64_t x = parse_u64_field(fields[0], line_no_, "x");
    std::uint64_t y = parse_u64_field(fields[1], line_no_, "y");
    std::uint64_t t = parse_u64_field(fields[2], line_no_, "t");
    if (x > 0xffff || y > 0xffff) throw MalformedRow(line_no_, "coordinate exceeds u16 range");
    std::int8_t p = parse_polarity(fields[3], line_no_);

    if (have_prev_ && t < prev_t_) throw NonMonotonicTimestamp(line_no_, prev_t_, t);
    have_prev_ = true;
    prev_t_ = t;

    out = Event{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t, p};
    return true;
  }
  return false;
}

std::vector<Event> parse_event_text(std::istream& in, std::string_view header) {
  TextEventReader reader(in, header);
  std::vector<Event> events;
  Event e;
  while (reader.next(e)) events.push_back(e);
  return events;
}

std::vector<Event> parse_event_text(const std::string& text, std::string_view header) {
  std::istringstream in(text);
  return parse_event_text(in, header);
}

void write_event_text(std::ostream& out, std::span<const Event> events) {
  out << "x,y,t,p\n";
  for (const Event& e : events)
    out << e.x << ',' << e.y << ',' << e.t << ',' << (e.p > 0 ? 1 : 0) << '\n';
}

// --- binary ---

void encode_evf_header(const EvfHeader& h, std::vector<std::uint8_t>& out) {
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, h.version);
  put_u16(out, h.width);
  put_u16(out, h.height);
  put_u16(out, 0);  // reserved
}

void encode_evf_record(const Event& e, std::vector<std::uint8_t>& out) {
  put_u64(out, e.t);
  put_u16(out, e.x);
  put_u16(out, e.y);
  out.push_back(static_cast<std::uint8_t>(e.p));
  out.push_back(0);
  out.push_back(0);
  out.push_back(0);
}

std::vector<std::uint8_t> encode_events_binary(std::span<const Event> events, const EvfHeader& meta) {
  std::vector<std::uint8_t> out;
  out.reserve(kEvfHeaderSize + events.size() * kEvfRecordSize);
  encode_evf_header(meta, out);
  for (const Event& e : events) encode_evf_record(e, out);
  return out;
}

EvfHeader decode_evf_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kEvfHeaderSize) throw TruncatedRecord("EVF1: input shorter than header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw BadMagic("EVF1: bad magic");
  EvfHeader h;
  h.version = get_u16(bytes.data() + 4);
  if (h.version != 1)
    throw UnsupportedVersion("EVF1: unsupported version " + std::to_string(h.version));
  h.width = get_u16(bytes.data() + 6);
  h.height = get_u16(bytes.data() + 8);
  return h;
}

Event decode_evf_record(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kEvfRecordSize) throw TruncatedRecord("EVF1: truncated record");
  Event e;
  e.t = get_u64(bytes.data());
  e.x = get_u16(bytes.data() + 8);
  e.y = get_u16(bytes.data() + 10);
  std::int8_t p = static_cast<std::int8_t>(bytes[12]);
  if (p != 1 && p != -1) throw Error("EVF1: invalid polarity byte");
  e.p = p;
  return e;
}

DecodedEvents decode_events_binary(std::span<const std::uint8_t> bytes) {
  DecodedEvents out;
  out.header = decode_evf_header(bytes);
  std::size_t body = bytes.size() - kEvfHeaderSize;
  if (body % kEvfRecordSize != 0) throw TruncatedRecord("EVF1: payload not a whole number of records");
  std::size_t n = body / kEvfRecordSize;
  out.events.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.events.push_back(decode_evf_record(bytes.subspan(kEvfHeaderSize + i * kEvfRecordSize)));
  return out;
}

void write_evf_file(const std::string& path, std::span<const Event> events, const EvfHeader& meta) {
  auto bytes = encode_events_binary(events, meta);
  write_binary_file(path, bytes);
}

DecodedEvents read_evf_file(const std::string& path) {
  auto bytes = read_binary_file(path);
  return decode_events_binary(bytes);
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace evf
