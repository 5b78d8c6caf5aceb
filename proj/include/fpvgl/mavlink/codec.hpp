#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "fpvgl/mavlink/messages.hpp"

namespace fpvgl::mavlink {

inline constexpr std::uint8_t kMagicV1 = 0xFE;
inline constexpr std::size_t kHeaderSize = 6;  // magic, len, seq, sys, comp, msgid
inline constexpr std::size_t kChecksumSize = 2;
inline constexpr std::size_t kFrameOverhead = kHeaderSize + kChecksumSize;
inline constexpr std::size_t kMaxFrameSize = kFrameOverhead + 255;

/// X.25 (CRC-16/MCRF4XX) accumulator as used by MAVLink.
class Crc16 {
 public:
  void accumulate(std::uint8_t byte) noexcept {
    std::uint8_t tmp = byte ^ static_cast<std::uint8_t>(value_ & 0xFF);
    tmp ^= static_cast<std::uint8_t>(tmp << 4);
    value_ = static_cast<std::uint16_t>((value_ >> 8) ^ (tmp << 8) ^ (tmp << 3) ^ (tmp >> 4));
  }
  void accumulate(std::span<const std::uint8_t> bytes) noexcept {
    for (auto b : bytes) accumulate(b);
  }
  std::uint16_t value() const noexcept { return value_; }

 private:
  std::uint16_t value_ = 0xFFFF;
};

/// CRC over `bytes` followed by the per-message extra byte.
std::uint16_t checksum(std::span<const std::uint8_t> bytes, std::uint8_t crc_extra) noexcept;

struct RawFrame {
  std::uint8_t seq = 0;
  std::uint8_t sys_id = 0;
  std::uint8_t comp_id = 0;
  std::uint8_t msg_id = 0;
  std::vector<std::uint8_t> payload;
  std::uint16_t checksum = 0;

  bool operator==(const RawFrame&) const = default;
};

struct FrameAddress {
  std::uint8_t seq = 0;
  std::uint8_t sys_id = 1;
  std::uint8_t comp_id = 1;
};

std::vector<std::uint8_t> encode_payload(const Message& message);
std::vector<std::uint8_t> encode(const Message& message, FrameAddress address);
inline std::vector<std::uint8_t> encode(const Message& message, std::uint8_t seq,
                                        std::uint8_t sys_id, std::uint8_t comp_id) {
  return encode(message, FrameAddress{seq, sys_id, comp_id});
}

/// Serializes a RawFrame as-is (checksum field is written verbatim).
std::vector<std::uint8_t> serialize(const RawFrame& frame);

/// Payload -> typed message. Throws std::invalid_argument on an unsupported id
/// or a payload whose size differs from the dialect length.
Message decode_payload(std::uint8_t msg_id, std::span<const std::uint8_t> payload);

enum class FrameErrorKind { BadChecksum, UnknownMsgId };

struct FrameError {
  FrameErrorKind kind;
  std::uint8_t msg_id = 0;
  std::uint8_t seq = 0;
  std::uint64_t stream_offset = 0;  // position of the rejected magic byte

  bool operator==(const FrameError&) const = default;
};

struct DecodedFrame {
  RawFrame frame;
  Message message;
  std::vector<std::uint8_t> bytes;  // the complete frame as received

  bool operator==(const DecodedFrame&) const = default;
};

using ParseEvent = std::variant<DecodedFrame, FrameError>;

/// Incremental v1 stream parser.
///
/// Every magic byte is a candidate frame start. A candidate is judged only once
/// all of its claimed bytes are buffered, so the event sequence does not depend
/// on how the stream is chunked. A rejected candidate consumes just its magic
/// byte and scanning resumes at the next byte, so an intact frame hidden inside
/// a bogus length field is still found. An incomplete candidate is rejected
/// early when a complete valid frame already lies inside its claimed span, so
/// a trailing intact frame is never held back by a garbage length. Error events for further candidates
/// that start inside an already-rejected frame's span are not reported again.
class Parser {
 public:
  std::vector<ParseEvent> feed(std::span<const std::uint8_t> bytes);

  std::size_t buffered() const noexcept { return buffer_.size() - head_; }
  std::uint64_t bytes_consumed() const noexcept { return offset_; }

  bool operator==(const Parser&) const = default;

 private:
  bool intact_frame_after(std::size_t from) const;

  std::vector<std::uint8_t> buffer_;
  std::size_t head_ = 0;           // first unexamined byte in buffer_
  std::uint64_t offset_ = 0;       // stream offset of buffer_[head_]
  std::uint64_t quiet_until_ = 0;  // suppress error events for candidates before this offset
};

/// Validates one complete frame (e.g. unwrapped from an envelope).
/// Returns the decoded frame or the reason it was rejected.
ParseEvent decode_frame(std::span<const std::uint8_t> bytes);

}  // namespace fpvgl::mavlink
