#include "fpvgl/relay/envelope.hpp"

#include <algorithm>
#include <cstring>

#include "fpvgl/mavlink/codec.hpp"

namespace fpvgl::relay {

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  const float f = static_cast<float>(v);
  std::uint8_t b[4];
  std::memcpy(b, &f, 4);
  out.insert(out.end(), b, b + 4);
}

float get_f32(const std::uint8_t* p) {
  float f;
  std::memcpy(&f, p, 4);
  return f;
}

std::uint16_t crc_of(std::span<const std::uint8_t> bytes) {
  mavlink::Crc16 crc;
  crc.accumulate(bytes);
  return crc.value();
}

}  // namespace

std::vector<std::uint8_t> encode_envelope(std::uint64_t source_timestamp_us,
                                          std::span<const std::uint8_t> frame) {
  std::vector<std::uint8_t> out;
  out.reserve(kEnvelopeHeader + frame.size());
  out.push_back(kEnvelopeMagic);
  put_u64(out, source_timestamp_us);
  out.push_back(static_cast<std::uint8_t>(frame.size() & 0xFF));
  out.push_back(static_cast<std::uint8_t>(frame.size() >> 8));
  out.insert(out.end(), frame.begin(), frame.end());
  return out;
}

EnvelopeParser::Verdict EnvelopeParser::judge(std::size_t at, std::size_t& length) const {
  const std::size_t avail = buffer_.size() - at;
  if (avail < kEnvelopeHeader) return Verdict::NeedMore;
  const std::size_t frame_len = buffer_[at + 9] | (buffer_[at + 10] << 8);
  if (frame_len < mavlink::kFrameOverhead || frame_len > mavlink::kMaxFrameSize) {
    return Verdict::Reject;
  }
  length = kEnvelopeHeader + frame_len;
  if (avail < length) return Verdict::NeedMore;
  const auto ev = mavlink::decode_frame({buffer_.data() + at + kEnvelopeHeader, frame_len});
  return std::holds_alternative<mavlink::DecodedFrame>(ev) ? Verdict::Accept : Verdict::Reject;
}

std::vector<Envelope> EnvelopeParser::feed(std::span<const std::uint8_t> bytes) {
  std::vector<Envelope> out;
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  while (head_ < buffer_.size()) {
    if (buffer_[head_] != kEnvelopeMagic) {
      auto it = std::find(buffer_.begin() + static_cast<std::ptrdiff_t>(head_), buffer_.end(),
                          kEnvelopeMagic);
      const auto skip = static_cast<std::size_t>(it - buffer_.begin()) - head_;
      discarded_ += skip;
      head_ += skip;
      continue;
    }
    std::size_t length = 0;
    auto verdict = judge(head_, length);
    if (verdict == Verdict::NeedMore) {
      // An envelope that is already complete and valid further on means the
      // pending candidate is a corrupted header; drop it instead of waiting.
      bool later_valid = false;
      for (std::size_t p = head_ + 1; p < buffer_.size() && !later_valid; ++p) {
        std::size_t len = 0;
        later_valid = buffer_[p] == kEnvelopeMagic && judge(p, len) == Verdict::Accept;
      }
      if (!later_valid) break;
      verdict = Verdict::Reject;
    }
    if (verdict == Verdict::Reject) {
      ++discarded_;
      ++head_;
      continue;
    }
    const std::uint8_t* p = buffer_.data() + head_;
    out.push_back(Envelope{get_u64(p + 1), std::vector<std::uint8_t>(p + kEnvelopeHeader,
                                                                     p + length)});
    head_ += length;
  }
  if (head_ > 0 && (head_ == buffer_.size() || head_ >= 4096)) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
  return out;
}

std::vector<std::uint8_t> encode_stick(const StickPacket& packet) {
  std::vector<std::uint8_t> out;
  out.reserve(kStickPacketSize);
  out.push_back(kStickMagic);
  put_u64(out, packet.timestamp_us);
  const auto c = packet.command.clamped();
  put_f32(out, c.roll);
  put_f32(out, c.pitch);
  put_f32(out, c.yaw);
  put_f32(out, c.throttle);
  const auto crc = crc_of(std::span(out).subspan(1));
  out.push_back(static_cast<std::uint8_t>(crc & 0xFF));
  out.push_back(static_cast<std::uint8_t>(crc >> 8));
  return out;
}

std::vector<StickPacket> StickParser::feed(std::span<const std::uint8_t> bytes) {
  std::vector<StickPacket> out;
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  std::size_t head = 0;
  while (head < buffer_.size()) {
    if (buffer_[head] != kStickMagic) {
      ++head;
      continue;
    }
    if (buffer_.size() - head < kStickPacketSize) break;
    const std::uint8_t* p = buffer_.data() + head;
    const std::uint16_t crc = static_cast<std::uint16_t>(p[25] | (p[26] << 8));
    if (crc_of({p + 1, 24}) != crc) {
      ++head;
      continue;
    }
    StickPacket packet;
    packet.timestamp_us = get_u64(p + 1);
    packet.command = StickCommand{get_f32(p + 9), get_f32(p + 13), get_f32(p + 17), get_f32(p + 21)}
                         .clamped();
    out.push_back(packet);
    head += kStickPacketSize;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head));
  return out;
}

}  // namespace fpvgl::relay
