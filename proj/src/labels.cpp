#include "bevnav/labels.hpp"

#include <cmath>
#include <stdexcept>

namespace bevnav {

namespace {

constexpr const char* kDirectionNames[8] = {"Front",    "FrontLeft", "Left",
                                            "BackLeft", "Back",      "BackRight",
                                            "Right",    "FrontRight"};

}  // namespace

const char* direction_name(Direction8 d) { return kDirectionNames[static_cast<int>(d)]; }

std::optional<Direction8> direction_from_name(const std::string& s) {
  for (int i = 0; i < 8; ++i) {
    if (s == kDirectionNames[i]) return static_cast<Direction8>(i);
  }
  return std::nullopt;
}

Direction8 direction_bin(double x, double y) {
  if (x == 0.0 && y == 0.0) {
    throw std::domain_error("direction_bin: undefined at the origin");
  }
  const double theta = std::atan2(y, x) * 180.0 / M_PI;  // (-180, 180]
  int k = static_cast<int>(std::floor((theta + 22.5) / 45.0));
  k = ((k % 8) + 8) % 8;
  return static_cast<Direction8>(k);
}

RangeBin range_bin(double x, double y, double d_range) {
  return std::hypot(x, y) < d_range ? RangeBin::Small : RangeBin::Big;
}

std::string stage1_answer(Direction8 d, RangeBin r) {
  std::string out = "Move towards the ";
  out += direction_name(d);
  out += " region with a ";
  out += (r == RangeBin::Small ? "small" : "big");
  out += " step.";
  return out;
}

std::optional<std::pair<Direction8, RangeBin>> parse_stage1_answer(const std::string& text) {
  const std::string prefix = "Move towards the ";
  const std::string middle = " region with a ";
  const std::string suffix = " step.";
  if (text.rfind(prefix, 0) != 0) return std::nullopt;
  const size_t mid_pos = text.find(middle, prefix.size());
  if (mid_pos == std::string::npos) return std::nullopt;
  const std::string dir_str = text.substr(prefix.size(), mid_pos - prefix.size());
  const auto dir = direction_from_name(dir_str);
  if (!dir) return std::nullopt;
  const size_t range_pos = mid_pos + middle.size();
  if (text.size() < range_pos + suffix.size()) return std::nullopt;
  const std::string range_str = text.substr(range_pos, text.size() - range_pos - suffix.size());
  if (text.substr(text.size() - suffix.size()) != suffix) return std::nullopt;
  RangeBin rb;
  if (range_str == "small") {
    rb = RangeBin::Small;
  } else if (range_str == "big") {
    rb = RangeBin::Big;
  } else {
    return std::nullopt;
  }
  return std::make_pair(*dir, rb);
}

bool occlusion_test(double tx, double ty, const std::array<RenderedView, 4>& views,
                    const CameraRig& rig, const CameraIntrinsics& intr, double margin) {
  // Occluded iff no view provides visibility evidence. Out-of-frustum views
  // provide none.
  for (int view = 0; view < 4; ++view) {
    const Projection p = project_point(tx, ty, kTargetProbeHeight, intr, rig, view);
    if (p.status != ProjectStatus::Ok) continue;
    const int u = static_cast<int>(std::floor(p.u));
    const int v = static_cast<int>(std::floor(p.v));
    const float rendered = views[view].depth.at(v, u);
    if (p.depth <= rendered + margin) return false;  // visible in this view
  }
  return true;
}

const char* admit_result_name(AdmitResult r) {
  switch (r) {
    case AdmitResult::Admitted: return "admitted";
    case AdmitResult::OutOfBound: return "out-of-bound";
    case AdmitResult::NonTraversable: return "non-traversable";
    case AdmitResult::HeightChange: return "height-change";
  }
  return "admitted";
}

AdmitResult admit_sample(double tx, double ty, const Scene& scene, const GridSpec& spec,
                         double agent_radius) {
  const auto cell = world_to_cell(spec, tx, ty);
  if (!cell) return AdmitResult::OutOfBound;

  double wx, wy;
  agent_to_world(scene.agent, tx, ty, wx, wy);
  const double dh = scene_height_at(scene, wx, wy) -
                    scene_height_at(scene, scene.agent.x, scene.agent.y);
  if (std::abs(dh) > 0.5) return AdmitResult::HeightChange;

  const TravGrid trav = traversability_from_scene(scene, spec, agent_radius);
  if (!trav.passable(cell->row, cell->col)) return AdmitResult::NonTraversable;
  return AdmitResult::Admitted;
}

}  // namespace bevnav
