#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "evf/errors.hpp"

namespace evf {

/// Seven two-phase flow regimes, stable integer codes 0-6.
enum class FlowRegime : std::uint8_t {
  B = 0,   // bubbly
  EB = 1,  // elongated bubbly
  S = 2,   // slug
  SS = 3,  // stratified smooth
  SW = 4,  // stratified wavy
  A = 5,   // annular
  U = 6,   // unstable
};

inline constexpr int kRegimeCount = 7;

inline constexpr std::array<FlowRegime, kRegimeCount> kAllRegimes = {
    FlowRegime::B,  FlowRegime::EB, FlowRegime::S, FlowRegime::SS,
    FlowRegime::SW, FlowRegime::A,  FlowRegime::U};

constexpr std::string_view to_string(FlowRegime r) {
  switch (r) {
    case FlowRegime::B: return "B";
    case FlowRegime::EB: return "EB";
    case FlowRegime::S: return "S";
    case FlowRegime::SS: return "SS";
    case FlowRegime::SW: return "SW";
    case FlowRegime::A: return "A";
    case FlowRegime::U: return "U";
  }
  return "?";
}

inline FlowRegime regime_from_string(std::string_view s) {
  for (FlowRegime r : kAllRegimes) {
    if (to_string(r) == s) return r;
  }
  throw InvalidParams("unknown flow regime '" + std::string(s) + "'");
}

inline FlowRegime regime_from_code(int code) {
  if (code < 0 || code >= kRegimeCount)
    throw InvalidParams("flow regime code out of range: " + std::to_string(code));
  return static_cast<FlowRegime>(code);
}

constexpr int regime_code(FlowRegime r) { return static_cast<int>(r); }

}  // namespace evf
