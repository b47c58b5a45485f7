#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dwmap/decomposition.hpp"

namespace dwmap::wire {

// Frame layout: 8-byte magic, 1-byte version, 1-byte message type, 4-byte
// little-endian payload length, then the payload (little-endian fixed-width
// integers and IEEE 64-bit floats).
constexpr std::array<std::uint8_t, 8> kMagic = {'D', 'W', 'L', 'P', 'M', 'A', 'P', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 14;
constexpr std::uint32_t kDefaultMaxPayload = 64u << 20;  // 64 MiB

enum class MsgType : std::uint8_t {
  Hello = 1,
  EdgeData = 2,
  PriceRequest = 3,
  PriceReply = 4,
  Shutdown = 5,
  Error = 6,
};

struct Hello {
  std::uint32_t protocol = 1;
};

// Ships each edge's cost vector and B_st rows to its worker, once.
struct EdgeData {
  std::uint32_t num_rows_total = 0;  // global row count, for dense dual reconstruction
  std::vector<EdgePricingData> edges;
};

// Duals restricted to the addressed worker: pi entries only for rows
// touching its edges, gamma entries only for its edges.
struct PriceRequest {
  std::uint32_t iteration = 0;
  TieRule tie_rule = TieRule::LowestIndex;
  std::vector<std::uint32_t> edges;  // edges to price (subset of shipped data)
  std::vector<std::pair<std::uint32_t, double>> pi;
  std::vector<std::pair<std::uint32_t, double>> gamma;
};

struct PriceReplyItem {
  std::uint32_t edge = 0;
  std::uint32_t solution_index = 0;
  double cost = 0.0;
  double reduced_cost = 0.0;
  std::vector<std::pair<std::uint32_t, double>> constraint_column;
};

struct PriceReply {
  std::uint32_t iteration = 0;
  std::vector<PriceReplyItem> items;  // ascending edge id
};

struct Shutdown {};

struct ErrorMsg {
  std::uint32_t code = 0;
  std::string text;
};

using Message = std::variant<Hello, EdgeData, PriceRequest, PriceReply, Shutdown, ErrorMsg>;

enum class FrameErrorKind { Truncated, BadMagic, BadVersion, Oversize, UnknownType, Malformed };
std::string to_string(FrameErrorKind k);

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrorKind kind, const std::string& what)
      : std::runtime_error(to_string(kind) + ": " + what), kind_(kind) {}
  FrameErrorKind kind() const { return kind_; }

 private:
  FrameErrorKind kind_;
};

std::vector<std::uint8_t> encode_frame(const Message& msg);

// Decodes one complete frame. The buffer must contain exactly the frame.
Message decode_frame(std::span<const std::uint8_t> bytes,
                     std::uint32_t max_payload = kDefaultMaxPayload);

}  // namespace dwmap::wire
