#include "fpvgl/mavlink/codec.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

namespace fpvgl::mavlink {

namespace {

static_assert(std::endian::native == std::endian::little,
              "wire helpers assume a little-endian host");

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <class T>
  void operator()(const T& value) {
    if constexpr (requires { value.size(); value[0]; }) {
      for (const auto& v : value) (*this)(v);
    } else {
      const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
      out_.insert(out_.end(), p, p + sizeof(T));
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <class T>
  void operator()(T& value) {
    if constexpr (requires { value.size(); value[0]; }) {
      for (auto& v : value) (*this)(v);
    } else {
      std::memcpy(&value, in_.data() + pos_, sizeof(T));
      pos_ += sizeof(T);
    }
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

// One visitor per message, in wire order; shared by both directions.
template <class Ar, class M>
void fields(Ar& ar, M& m) {
  using T = std::remove_const_t<M>;
  if constexpr (std::is_same_v<T, Heartbeat>) {
    ar(m.custom_mode), ar(m.type), ar(m.autopilot), ar(m.base_mode), ar(m.system_status),
        ar(m.mavlink_version);
  } else if constexpr (std::is_same_v<T, GpsRawInt>) {
    ar(m.time_usec), ar(m.lat), ar(m.lon), ar(m.alt), ar(m.eph), ar(m.epv), ar(m.vel), ar(m.cog),
        ar(m.fix_type), ar(m.satellites_visible);
  } else if constexpr (std::is_same_v<T, Attitude>) {
    ar(m.time_boot_ms), ar(m.roll), ar(m.pitch), ar(m.yaw), ar(m.rollspeed), ar(m.pitchspeed),
        ar(m.yawspeed);
  } else if constexpr (std::is_same_v<T, GlobalPositionInt>) {
    ar(m.time_boot_ms), ar(m.lat), ar(m.lon), ar(m.alt), ar(m.relative_alt), ar(m.vx), ar(m.vy),
        ar(m.vz), ar(m.hdg);
  } else if constexpr (std::is_same_v<T, VfrHud>) {
    ar(m.airspeed), ar(m.groundspeed), ar(m.alt), ar(m.climb), ar(m.heading), ar(m.throttle);
  } else if constexpr (std::is_same_v<T, RcChannels>) {
    ar(m.time_boot_ms), ar(m.chan), ar(m.chancount), ar(m.rssi);
  } else if constexpr (std::is_same_v<T, ServoOutputRaw>) {
    ar(m.time_usec), ar(m.servo), ar(m.port);
  }
}

template <class T>
constexpr MessageSpec spec_of() {
  using I = MessageInfo<T>;
  return MessageSpec{I::id, I::length, I::crc_extra, I::name};
}

constexpr std::array kSpecs = {spec_of<Heartbeat>(),         spec_of<GpsRawInt>(),
                               spec_of<Attitude>(),          spec_of<GlobalPositionInt>(),
                               spec_of<ServoOutputRaw>(),    spec_of<RcChannels>(),
                               spec_of<VfrHud>()};

template <class T>
Message read_as(std::span<const std::uint8_t> payload) {
  T m{};
  Reader r(payload);
  fields(r, m);
  return m;
}

std::uint16_t frame_crc(std::span<const std::uint8_t> frame, std::uint8_t crc_extra) {
  // covers len..payload, i.e. everything after magic up to the checksum
  return checksum(frame.subspan(1, frame.size() - 1 - kChecksumSize), crc_extra);
}

}  // namespace

std::uint16_t checksum(std::span<const std::uint8_t> bytes, std::uint8_t crc_extra) noexcept {
  Crc16 crc;
  crc.accumulate(bytes);
  crc.accumulate(crc_extra);
  return crc.value();
}

const MessageSpec* find_message_spec(std::uint8_t msg_id) noexcept {
  auto it = std::find_if(kSpecs.begin(), kSpecs.end(),
                         [msg_id](const MessageSpec& s) { return s.id == msg_id; });
  return it == kSpecs.end() ? nullptr : &*it;
}

std::uint8_t message_id(const Message& m) noexcept {
  return std::visit([](const auto& v) { return MessageInfo<std::decay_t<decltype(v)>>::id; }, m);
}

std::string_view message_name(const Message& m) noexcept {
  return std::visit([](const auto& v) { return MessageInfo<std::decay_t<decltype(v)>>::name; },
                    m);
}

std::vector<std::uint8_t> encode_payload(const Message& message) {
  std::vector<std::uint8_t> out;
  out.reserve(64);
  std::visit(
      [&out](const auto& m) {
        Writer w(out);
        fields(w, m);
      },
      message);
  return out;
}

std::vector<std::uint8_t> encode(const Message& message, FrameAddress address) {
  const auto payload = encode_payload(message);
  const auto* spec = find_message_spec(message_id(message));
  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + kFrameOverhead);
  out.push_back(kMagicV1);
  out.push_back(static_cast<std::uint8_t>(payload.size()));
  out.push_back(address.seq);
  out.push_back(address.sys_id);
  out.push_back(address.comp_id);
  out.push_back(spec->id);
  out.insert(out.end(), payload.begin(), payload.end());
  out.push_back(0);
  out.push_back(0);
  const auto crc = frame_crc(out, spec->crc_extra);
  out[out.size() - 2] = static_cast<std::uint8_t>(crc & 0xFF);
  out[out.size() - 1] = static_cast<std::uint8_t>(crc >> 8);
  return out;
}

std::vector<std::uint8_t> serialize(const RawFrame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(frame.payload.size() + kFrameOverhead);
  out.push_back(kMagicV1);
  out.push_back(static_cast<std::uint8_t>(frame.payload.size()));
  out.push_back(frame.seq);
  out.push_back(frame.sys_id);
  out.push_back(frame.comp_id);
  out.push_back(frame.msg_id);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  out.push_back(static_cast<std::uint8_t>(frame.checksum & 0xFF));
  out.push_back(static_cast<std::uint8_t>(frame.checksum >> 8));
  return out;
}

Message decode_payload(std::uint8_t msg_id, std::span<const std::uint8_t> payload) {
  const auto* spec = find_message_spec(msg_id);
  if (spec == nullptr) {
    throw std::invalid_argument("unsupported message id " + std::to_string(msg_id));
  }
  if (payload.size() != spec->length) {
    throw std::invalid_argument(std::string(spec->name) + ": payload length " +
                                std::to_string(payload.size()) + " != " +
                                std::to_string(spec->length));
  }
  switch (msg_id) {
    case MessageInfo<Heartbeat>::id: return read_as<Heartbeat>(payload);
    case MessageInfo<GpsRawInt>::id: return read_as<GpsRawInt>(payload);
    case MessageInfo<Attitude>::id: return read_as<Attitude>(payload);
    case MessageInfo<GlobalPositionInt>::id: return read_as<GlobalPositionInt>(payload);
    case MessageInfo<VfrHud>::id: return read_as<VfrHud>(payload);
    case MessageInfo<RcChannels>::id: return read_as<RcChannels>(payload);
    case MessageInfo<ServoOutputRaw>::id: return read_as<ServoOutputRaw>(payload);
    default: break;
  }
  throw std::invalid_argument("unsupported message id " + std::to_string(msg_id));
}

ParseEvent decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameOverhead || bytes[0] != kMagicV1 ||
      bytes[1] + kFrameOverhead != bytes.size()) {
    return FrameError{FrameErrorKind::BadChecksum, bytes.size() > 5 ? bytes[5] : std::uint8_t{0},
                      bytes.size() > 2 ? bytes[2] : std::uint8_t{0}, 0};
  }
  const std::uint8_t msg_id = bytes[5];
  const auto* spec = find_message_spec(msg_id);
  if (spec == nullptr) {
    return FrameError{FrameErrorKind::UnknownMsgId, msg_id, bytes[2], 0};
  }
  const std::uint16_t wire_crc =
      static_cast<std::uint16_t>(bytes[bytes.size() - 2] | (bytes[bytes.size() - 1] << 8));
  if (bytes[1] != spec->length || frame_crc(bytes, spec->crc_extra) != wire_crc) {
    return FrameError{FrameErrorKind::BadChecksum, msg_id, bytes[2], 0};
  }
  DecodedFrame out{RawFrame{bytes[2], bytes[3], bytes[4], msg_id,
                            std::vector<std::uint8_t>(bytes.begin() + kHeaderSize,
                                                      bytes.end() - kChecksumSize),
                            wire_crc},
                   Message{}, std::vector<std::uint8_t>(bytes.begin(), bytes.end())};
  out.message = decode_payload(msg_id, out.frame.payload);
  return out;
}

std::vector<ParseEvent> Parser::feed(std::span<const std::uint8_t> bytes) {
  std::vector<ParseEvent> events;
  if (bytes.empty()) return events;
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());

  auto advance = [this](std::size_t n) {
    head_ += n;
    offset_ += n;
  };

  while (head_ < buffer_.size()) {
    if (buffer_[head_] != kMagicV1) {
      auto it = std::find(buffer_.begin() + static_cast<std::ptrdiff_t>(head_), buffer_.end(),
                          kMagicV1);
      advance(static_cast<std::size_t>(it - buffer_.begin()) - head_);
      continue;
    }
    if (buffer_.size() - head_ < 2) break;
    const std::size_t frame_len = buffer_[head_ + 1] + kFrameOverhead;
    ParseEvent event;
    if (buffer_.size() - head_ < frame_len) {
      // Incomplete candidate. If an intact frame already sits inside its
      // claimed span, the candidate is garbage: reject it now rather than
      // stalling the intact frame until unrelated bytes arrive.
      if (!intact_frame_after(head_ + 1)) break;
      const std::uint8_t msg_id = buffer_[head_ + 5];
      event = FrameError{find_message_spec(msg_id) ? FrameErrorKind::BadChecksum
                                                   : FrameErrorKind::UnknownMsgId,
                         msg_id, buffer_[head_ + 2], 0};
    } else {
      event = decode_frame({buffer_.data() + head_, frame_len});
    }
    if (auto* err = std::get_if<FrameError>(&event)) {
      if (offset_ >= quiet_until_) {
        err->stream_offset = offset_;
        events.push_back(*err);
        quiet_until_ = offset_ + frame_len;
      }
      advance(1);
    } else {
      events.push_back(std::move(event));
      advance(frame_len);
    }
  }

  if (head_ > 0 && (head_ == buffer_.size() || head_ >= 4096)) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
  return events;
}

bool Parser::intact_frame_after(std::size_t from) const {
  for (std::size_t p = from; p + kFrameOverhead <= buffer_.size(); ++p) {
    if (buffer_[p] != kMagicV1) continue;
    const std::size_t len = buffer_[p + 1] + kFrameOverhead;
    if (p + len > buffer_.size()) continue;
    if (std::holds_alternative<DecodedFrame>(decode_frame({buffer_.data() + p, len}))) return true;
  }
  return false;
}

}  // namespace fpvgl::mavlink
