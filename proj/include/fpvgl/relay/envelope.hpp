#pragma once

// Relay wire format.
//
// Downstream (server -> client), one Envelope per MAVLink frame:
//   0xA5 | source_timestamp_us: u64 LE | frame_len: u16 LE | frame bytes
//
// Upstream (client -> server), pilot input:
//   0x5A | timestamp_us: u64 LE | roll, pitch, yaw, throttle: f32 LE | crc: u16 LE
// where crc is the X.25 CRC (MAVLink accumulator, no extra byte) over the
// 24 bytes between the magic and the crc.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fpvgl/common/stick.hpp"

namespace fpvgl::relay {

inline constexpr std::uint8_t kEnvelopeMagic = 0xA5;
inline constexpr std::size_t kEnvelopeHeader = 11;
inline constexpr std::uint8_t kStickMagic = 0x5A;
inline constexpr std::size_t kStickPacketSize = 27;

struct Envelope {
  std::uint64_t source_timestamp_us = 0;
  std::vector<std::uint8_t> frame;

  bool operator==(const Envelope&) const = default;
};

std::vector<std::uint8_t> encode_envelope(std::uint64_t source_timestamp_us,
                                          std::span<const std::uint8_t> frame);

/// Resynchronizing envelope reader. A candidate is accepted only when its
/// payload is a valid MAVLink frame of a supported message; otherwise one byte
/// is dropped and scanning resumes at the next magic byte.
class EnvelopeParser {
 public:
  std::vector<Envelope> feed(std::span<const std::uint8_t> bytes);

  std::uint64_t discarded_bytes() const noexcept { return discarded_; }

 private:
  enum class Verdict { NeedMore, Reject, Accept };
  Verdict judge(std::size_t at, std::size_t& length) const;

  std::vector<std::uint8_t> buffer_;
  std::size_t head_ = 0;
  std::uint64_t discarded_ = 0;
};

struct StickPacket {
  std::uint64_t timestamp_us = 0;
  StickCommand command;

  bool operator==(const StickPacket&) const = default;
};

std::vector<std::uint8_t> encode_stick(const StickPacket& packet);

class StickParser {
 public:
  std::vector<StickPacket> feed(std::span<const std::uint8_t> bytes);

 private:
  std::vector<std::uint8_t> buffer_;
};

}  // namespace fpvgl::relay
