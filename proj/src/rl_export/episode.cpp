#include "fpvgl/rl_export/episode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fpvgl/analysis/analysis.hpp"
#include "fpvgl/geodesy/geodesy.hpp"
#include "json.hpp"

namespace fpvgl::rl {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

double number(const Json& j) {
  if (j.is_null()) return NAN;
  if (!j.is_number()) throw ExportError("expected a number, got " + j.dump());
  return j.get<double>();
}

Json point(const sim::Point2& p) { return Json::array({p.e, p.n}); }

sim::Point2 point_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

fs::path absolute_normal(const fs::path& p) { return fs::absolute(p).lexically_normal(); }

}  // namespace

double normalize_pwm(double pwm_us, const PwmScale& scale) {
  if (std::isnan(pwm_us) || pwm_us == 65535) throw ExportError("RC channel absent");
  if (pwm_us < 800 || pwm_us > 2200) throw ExportError("PWM " + std::to_string(pwm_us) + " us out of range");
  return std::clamp((pwm_us - scale.center_us) / scale.span_us, -1.0, 1.0);
}

double denormalize_pwm(double value, const PwmScale& scale) {
  return std::round(scale.center_us + scale.span_us * value);
}

int ChannelMap::channel(Axis axis) const noexcept {
  switch (axis) {
    case Axis::Roll: return roll;
    case Axis::Pitch: return pitch;
    case Axis::Throttle: return throttle;
    case Axis::Yaw: return yaw;
  }
  return 0;
}

void ChannelMap::validate() const {
  const std::array<int, 4> ch{roll, pitch, throttle, yaw};
  for (int c : ch) {
    if (c < 1 || c > 8) throw std::invalid_argument("channel " + std::to_string(c) + " not in 1..8");
  }
  for (std::size_t i = 0; i < ch.size(); ++i) {
    for (std::size_t k = i + 1; k < ch.size(); ++k) {
      if (ch[i] == ch[k]) throw std::invalid_argument("channel " + std::to_string(ch[i]) + " mapped twice");
    }
  }
}

ChannelMap parse_channel_map(std::string_view text) {
  ChannelMap m{0, 0, 0, 0};
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad channel assignment '" + item + "'");
    const std::string name = item.substr(0, eq);
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad channel number in '" + item + "'");
    }
    int* slot = name == "roll"       ? &m.roll
                : name == "pitch"    ? &m.pitch
                : name == "throttle" ? &m.throttle
                : name == "yaw"      ? &m.yaw
                                     : nullptr;
    if (!slot) throw std::invalid_argument("unknown axis '" + name + "'");
    if (*slot != 0) throw std::invalid_argument("axis '" + name + "' assigned twice");
    *slot = value;
  }
  for (auto [name, v] : {std::pair{"roll", m.roll}, {"pitch", m.pitch}, {"throttle", m.throttle}, {"yaw", m.yaw}}) {
    if (v == 0) throw std::invalid_argument(std::string("unmapped axis '") + name + "'");
  }
  m.validate();
  return m;
}

std::string format_channel_map(const ChannelMap& m) {
  return "roll=" + std::to_string(m.roll) + ",pitch=" + std::to_string(m.pitch) +
         ",throttle=" + std::to_string(m.throttle) + ",yaw=" + std::to_string(m.yaw);
}

bool EpisodeState::operator==(const EpisodeState& o) const {
  return same(lat_deg, o.lat_deg) && same(lon_deg, o.lon_deg) && same(alt_m, o.alt_m) && same(vn, o.vn) &&
         same(ve, o.ve) && same(vd, o.vd) && same(roll, o.roll) && same(pitch, o.pitch) && same(yaw, o.yaw) &&
         same(dist_to_target_m, o.dist_to_target_m) && same(bearing_to_target_rad, o.bearing_to_target_rad) &&
         front_frame == o.front_frame && bottom_frame == o.bottom_frame;
}

EpisodeDataset export_episode(const logger::FlightSession& session, const sim::Scenario& scenario,
                              const ChannelMap& channels, const logger::ArmRule& arm) {
  channels.validate();
  EpisodeDataset d;
  d.scenario = scenario;
  d.session_id = session.manifest.session_id;
  d.source = logger::to_string(session.manifest.source);
  d.channels = channels;

  const auto origin = analysis::track_origin(session.rows, analysis::OriginRule::GroundMean, arm);
  const fs::path dir = absolute_normal(session.dir);
  std::int64_t t0 = 0;
  for (std::size_t i = 0; i < session.rows.size(); ++i) {
    const auto& r = session.rows[i];
    if (!arm.armed(r)) continue;
    if (d.steps.empty()) t0 = r.wall_ms;

    EpisodeStep step;
    step.t = static_cast<double>(r.wall_ms - t0) / 1000.0;
    step.source_row = i;
    auto& s = step.state;
    s.lat_deg = r.lat_1e7 * 1e-7;
    s.lon_deg = r.lon_1e7 * 1e-7;
    s.alt_m = r.alt_mm / 1000.0;
    s.vn = r.vx_cms / 100.0;
    s.ve = r.vy_cms / 100.0;
    s.vd = r.vz_cms / 100.0;
    s.roll = r.roll_rad;
    s.pitch = r.pitch_rad;
    s.yaw = r.yaw_rad;
    s.dist_to_target_m = s.bearing_to_target_rad = NAN;
    if (origin && r.has_position()) {
      const auto enu = geo::geodetic_to_enu({s.lat_deg, s.lon_deg, s.alt_m}, *origin);
      const double de = scenario.landing.e - (scenario.start.e + enu.e);
      const double dn = scenario.landing.n - (scenario.start.n + enu.n);
      s.dist_to_target_m = std::hypot(de, dn);
      s.bearing_to_target_rad = std::atan2(de, dn);
    }
    s.front_frame = dir / r.front_frame;
    s.bottom_frame = dir / r.bottom_frame;

    auto axis = [&](Axis a) {
      const int ch = channels.channel(a);
      try {
        return normalize_pwm(r.rc_us[static_cast<std::size_t>(ch - 1)], d.scale);
      } catch (const ExportError& e) {
        throw ExportError("row " + std::to_string(i) + ", channel " + std::to_string(ch) + ": " + e.what());
      }
    };
    step.action = {axis(Axis::Throttle), axis(Axis::Pitch), axis(Axis::Yaw), axis(Axis::Roll)};
    d.steps.push_back(std::move(step));
  }
  if (d.steps.empty()) throw ExportError("session has no armed rows");
  return d;
}

std::string dataset_to_json(const EpisodeDataset& d, const fs::path& base_dir) {
  if (d.steps.empty()) throw ExportError("dataset has no steps");
  const fs::path base = absolute_normal(base_dir);

  Json j;
  j["schema"] = kDatasetSchema;
  j["version"] = kDatasetVersion;
  Json sc;
  sc["task"] = d.scenario.task;
  sc["start"] = point(d.scenario.start);
  sc["landing"] = point(d.scenario.landing);
  sc["obstacles"] = Json::array();
  for (const auto& o : d.scenario.obstacles) sc["obstacles"].push_back({o.center.e, o.center.n, o.height});
  sc["target_altitude"] = d.scenario.target_altitude;
  j["scenario"] = sc;
  j["source"] = {{"session", d.session_id}, {"platform", d.source}};
  j["normalization"] = {{"pwm_center_us", d.scale.center_us}, {"pwm_span_us", d.scale.span_us}};
  j["channels"] = {{"roll", d.channels.roll}, {"pitch", d.channels.pitch}, {"throttle", d.channels.throttle},
                   {"yaw", d.channels.yaw}};

  Json steps = Json::array();
  for (std::size_t k = 0; k < d.steps.size(); ++k) {
    const auto& st = d.steps[k];
    if (k > 0 && !(st.t > d.steps[k - 1].t)) throw ExportError("step " + std::to_string(k) + ": t not increasing");
    for (double a : {st.action.throttle, st.action.pitch, st.action.yaw, st.action.roll}) {
      if (!(a >= -1 && a <= 1)) throw ExportError("step " + std::to_string(k) + ": action outside [-1, 1]");
    }
    if (st.state.dist_to_target_m < 0) throw ExportError("step " + std::to_string(k) + ": negative distance");
    const auto& s = st.state;
    Json js;
    js["t"] = st.t;
    js["row"] = st.source_row;
    js["state"] = {{"lat", s.lat_deg},
                   {"lon", s.lon_deg},
                   {"alt", s.alt_m},
                   {"vn", s.vn},
                   {"ve", s.ve},
                   {"vd", s.vd},
                   {"roll", s.roll},
                   {"pitch", s.pitch},
                   {"yaw", s.yaw},
                   {"dist_to_target", s.dist_to_target_m},
                   {"bearing_to_target", s.bearing_to_target_rad},
                   {"front_frame", s.front_frame.lexically_relative(base).generic_string()},
                   {"bottom_frame", s.bottom_frame.lexically_relative(base).generic_string()}};
    js["action"] = {{"throttle", st.action.throttle},
                    {"pitch", st.action.pitch},
                    {"yaw", st.action.yaw},
                    {"roll", st.action.roll}};
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  return j.dump(1) + "\n";
}

EpisodeDataset dataset_from_json(std::string_view text, const fs::path& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ExportError(std::string("dataset is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("schema", "") != kDatasetSchema) throw ExportError("not an episode dataset");
  const int version = j.value("version", 0);
  if (version != kDatasetVersion) {
    throw ExportError("unsupported dataset version " + std::to_string(version) + " (expected " +
                      std::to_string(kDatasetVersion) + ")");
  }
  const fs::path base = absolute_normal(base_dir);
  EpisodeDataset d;
  try {
    const auto& sc = j.at("scenario");
    d.scenario.task = sc.at("task").get<int>();
    d.scenario.start = point_from(sc.at("start"));
    d.scenario.landing = point_from(sc.at("landing"));
    for (const auto& o : sc.at("obstacles")) {
      d.scenario.obstacles.push_back({{o.at(0).get<double>(), o.at(1).get<double>()}, o.at(2).get<double>()});
    }
    d.scenario.target_altitude = sc.at("target_altitude").get<double>();
    d.session_id = j.at("source").at("session").get<std::string>();
    d.source = j.at("source").at("platform").get<std::string>();
    d.scale = {j.at("normalization").at("pwm_center_us").get<double>(),
               j.at("normalization").at("pwm_span_us").get<double>()};
    const auto& ch = j.at("channels");
    d.channels = {ch.at("roll").get<int>(), ch.at("pitch").get<int>(), ch.at("throttle").get<int>(),
                  ch.at("yaw").get<int>()};
    for (const auto& js : j.at("steps")) {
      EpisodeStep st;
      st.t = js.at("t").get<double>();
      st.source_row = js.at("row").get<std::size_t>();
      const auto& s = js.at("state");
      st.state = {number(s.at("lat")),
                  number(s.at("lon")),
                  number(s.at("alt")),
                  number(s.at("vn")),
                  number(s.at("ve")),
                  number(s.at("vd")),
                  number(s.at("roll")),
                  number(s.at("pitch")),
                  number(s.at("yaw")),
                  number(s.at("dist_to_target")),
                  number(s.at("bearing_to_target")),
                  (base / s.at("front_frame").get<std::string>()).lexically_normal(),
                  (base / s.at("bottom_frame").get<std::string>()).lexically_normal()};
      const auto& a = js.at("action");
      st.action = {a.at("throttle").get<double>(), a.at("pitch").get<double>(), a.at("yaw").get<double>(),
                   a.at("roll").get<double>()};
      d.steps.push_back(std::move(st));
    }
  } catch (const Json::exception& e) {
    throw ExportError(std::string("malformed dataset: ") + e.what());
  }
  return d;
}

void write_dataset(const EpisodeDataset& dataset, const fs::path& path) {
  const fs::path target = absolute_normal(path);
  const std::string text = dataset_to_json(dataset, target.parent_path());
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out.flush()) throw ExportError("cannot write " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw ExportError("cannot write " + target.string() + ": " + ec.message());
}

EpisodeDataset read_dataset(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExportError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto d = dataset_from_json(buf.str(), absolute_normal(path).parent_path());
  for (std::size_t k = 0; k < d.steps.size(); ++k) {
    for (const auto* f : {&d.steps[k].state.front_frame, &d.steps[k].state.bottom_frame}) {
      if (!fs::exists(*f)) throw ExportError("step " + std::to_string(k) + ": missing frame " + f->string());
    }
  }
  return d;
}

}  // namespace fpvgl::rl
