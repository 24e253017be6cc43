#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace evf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- text codec ---

struct MalformedRow : Error {
  MalformedRow(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_no(line) {}
  std::size_t line_no;
};

struct NonMonotonicTimestamp : Error {
  NonMonotonicTimestamp(std::size_t line, std::uint64_t t_prev, std::uint64_t t)
      : Error("line " + std::to_string(line) + ": timestamp " + std::to_string(t) +
              " decreases below " + std::to_string(t_prev)),
        line_no(line) {}
  std::size_t line_no;
};

// --- binary codecs ---

struct BadMagic : Error {
  using Error::Error;
};

struct UnsupportedVersion : Error {
  using Error::Error;
};

struct TruncatedRecord : Error {
  using Error::Error;
};

struct CountMismatch : Error {
  using Error::Error;
};

// --- stream ops ---

struct InvalidRoi : Error {
  using Error::Error;
};

struct OutOfRange : Error {
  explicit OutOfRange(std::uint64_t t_us)
      : Error("event timestamp " + std::to_string(t_us) + " outside covered interval"),
        t(t_us) {}
  std::uint64_t t;
};

struct OutOfBounds : Error {
  using Error::Error;
};

// --- emulator / synth ---

struct EmptySequence : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct InvalidParams : Error {
  using Error::Error;
};

// --- fft / knn ---

struct NonPowerOfTwo : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct InsufficientTraining : Error {
  using Error::Error;
};

// --- lstm ---

struct LengthMismatch : Error {
  using Error::Error;
};

struct NonFiniteInput : Error {
  using Error::Error;
};

struct EmptyDataset : Error {
  using Error::Error;
};

struct SingleClass : Error {
  using Error::Error;
};

// --- pipeline / transport ---

struct InvalidDistribution : Error {
  using Error::Error;
};

struct BadFrame : Error {
  using Error::Error;
};

struct UnknownType : Error {
  using Error::Error;
};

struct PrematureEnd : Error {
  using Error::Error;
};

struct SourceError : Error {
  using Error::Error;
};

struct SinkError : Error {
  using Error::Error;
};

// --- metrics ---

struct EmptyEvaluation : Error {
  using Error::Error;
};

}  // namespace evf
