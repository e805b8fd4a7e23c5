#include "bevnav/metrics.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "bevnav/scenegen.hpp"
#include "bevnav/train.hpp"

namespace bevnav {

namespace fs = std::filesystem;
using nlohmann::json;

ArgmaxResult argmax_target(const BevMap& map) {
  if (map.channels != 1) throw std::invalid_argument("argmax_target: expected 1 channel");
  size_t best = 0;
  for (size_t i = 1; i < map.data.size(); ++i) {
    if (map.data[i] > map.data[best]) best = i;
  }
  ArgmaxResult out;
  out.cell = {static_cast<int>(best) / map.spec.cols(),
              static_cast<int>(best) % map.spec.cols()};
  cell_center(map.spec, out.cell.row, out.cell.col, out.x, out.y);
  return out;
}

namespace {

Cell cell_or_throw(const GridSpec& spec, double x, double y, const char* what) {
  const auto cell = world_to_cell(spec, x, y);
  if (!cell) throw std::out_of_range(std::string(what) + ": point outside grid");
  return *cell;
}

}  // namespace

bool geo_acc(double pred_x, double pred_y, double target_x, double target_y,
             const TravGrid& trav, double t) {
  const Cell pred = cell_or_throw(trav.spec, pred_x, pred_y, "geo_acc");
  const Cell target = cell_or_throw(trav.spec, target_x, target_y, "geo_acc");
  if (!trav.passable(pred.row, pred.col)) return false;
  const DistanceField field = geodesic_field(trav, target);
  return field.at(pred.row, pred.col) <= t;
}

bool euc_acc(double pred_x, double pred_y, double target_x, double target_y, double t) {
  return std::hypot(pred_x - target_x, pred_y - target_y) <= t;
}

bool structural_invalid(double pred_x, double pred_y, const TravGrid& trav) {
  const Cell pred = cell_or_throw(trav.spec, pred_x, pred_y, "structural_invalid");
  return trav.at(pred.row, pred.col) == CellState::StaticBlocked;
}

SampleMetrics score_prediction(double pred_x, double pred_y, double target_x,
                               double target_y, const TravGrid& trav,
                               const DistanceField& from_target) {
  SampleMetrics m;
  const Cell pred = cell_or_throw(trav.spec, pred_x, pred_y, "score_prediction");
  m.invalid = trav.at(pred.row, pred.col) == CellState::StaticBlocked;

  const bool pred_passable = trav.passable(pred.row, pred.col);
  const double geo_dist = from_target.at(pred.row, pred.col);
  const Cell snapped = snap_to_traversable(trav, pred);
  const double snap_dist = from_target.at(snapped.row, snapped.col);
  const double euc_dist = std::hypot(pred_x - target_x, pred_y - target_y);

  for (size_t i = 0; i < kAccThresholds.size(); ++i) {
    const double t = kAccThresholds[i];
    m.geo[i] = pred_passable && geo_dist <= t;
    m.euc[i] = euc_dist <= t;
    m.snap_geo[i] = snap_dist <= t;
  }
  return m;
}

MetricsAggregate aggregate(const std::vector<SampleMetrics>& samples, bool occluded_only) {
  MetricsAggregate agg;
  for (const SampleMetrics& m : samples) {
    if (occluded_only && !m.occluded) continue;
    ++agg.count;
    for (size_t i = 0; i < kAccThresholds.size(); ++i) {
      agg.geo_acc[i] += m.geo[i] ? 1.0 : 0.0;
      agg.euc_acc[i] += m.euc[i] ? 1.0 : 0.0;
      agg.snap_geo_acc[i] += m.snap_geo[i] ? 1.0 : 0.0;
    }
    agg.sir += m.invalid ? 1.0 : 0.0;
  }
  if (agg.count > 0) {
    for (size_t i = 0; i < kAccThresholds.size(); ++i) {
      agg.geo_acc[i] /= agg.count;
      agg.euc_acc[i] /= agg.count;
      agg.snap_geo_acc[i] /= agg.count;
      agg.geo_bar += agg.geo_acc[i] / kAccThresholds.size();
      agg.euc_bar += agg.euc_acc[i] / kAccThresholds.size();
      agg.snap_geo_bar += agg.snap_geo_acc[i] / kAccThresholds.size();
    }
    agg.sir /= agg.count;
  }
  return agg;
}

void write_predictions(const std::vector<PredictionRecord>& preds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_predictions: cannot open " + path);
  for (const PredictionRecord& p : preds) {
    json j;
    j["id"] = p.id;
    j["pred"] = {p.x, p.y};
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("write_predictions: write failed for " + path);
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_predictions: cannot open " + path);
  std::vector<PredictionRecord> preds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    PredictionRecord p;
    p.id = j.at("id").get<std::string>();
    p.x = j.at("pred").at(0).get<double>();
    p.y = j.at("pred").at(1).get<double>();
    preds.push_back(std::move(p));
  }
  return preds;
}

MetricsReport evaluate_manifest(const std::string& manifest_path,
                                const std::string& predictions_path,
                                const GridSpec& spec, double agent_radius, int threads,
                                const std::string& split_filter) {
  const auto records = load_manifest(manifest_path);
  const auto preds = load_predictions(predictions_path);

  std::map<std::string, PredictionRecord> by_id;
  for (const PredictionRecord& p : preds) {
    if (!by_id.emplace(p.id, p).second) {
      throw std::runtime_error("evaluate_manifest: duplicate prediction id " + p.id);
    }
  }

  std::vector<const Sample*> selected;
  for (const ManifestRecord& rec : records) {
    const Sample& s = rec.sample;
    if (split_filter == "train" && s.split != Split::Train) continue;
    if (split_filter == "val" && s.split != Split::Val) continue;
    selected.push_back(&s);
  }
  if (selected.empty()) {
    throw std::runtime_error("evaluate_manifest: no samples match split " + split_filter);
  }
  for (const Sample* s : selected) {
    if (!by_id.count(s->id)) {
      throw std::runtime_error("evaluate_manifest: missing prediction for id " + s->id);
    }
  }

  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<SampleMetrics> metrics(selected.size());
  parallel_for(static_cast<int>(selected.size()), threads, [&](int i) {
    const Sample& s = *selected[i];
    const PredictionRecord& p = by_id.at(s.id);
    const Scene scene = load_scene((base / s.scene_file).string());
    const TravGrid trav = traversability_from_scene(scene, spec, agent_radius);
    const Cell target = cell_or_throw(spec, s.tx, s.ty, "evaluate_manifest");
    const DistanceField field = geodesic_field(trav, target);
    metrics[i] = score_prediction(p.x, p.y, s.tx, s.ty, trav, field);
    metrics[i].occluded = s.occluded;
  });

  MetricsReport report;
  report.full = aggregate(metrics, false);
  report.occluded = aggregate(metrics, true);
  return report;
}

namespace {

json aggregate_to_json(const MetricsAggregate& a) {
  auto per_threshold = [](const std::array<double, 3>& v) {
    json j;
    for (size_t i = 0; i < kAccThresholds.size(); ++i) {
      std::ostringstream key;
      key << kAccThresholds[i];
      j[key.str()] = v[i];
    }
    return j;
  };
  json j;
  j["count"] = a.count;
  j["geo_acc"] = per_threshold(a.geo_acc);
  j["geo_acc_bar"] = a.geo_bar;
  j["euc_acc"] = per_threshold(a.euc_acc);
  j["euc_acc_bar"] = a.euc_bar;
  j["sir"] = a.sir;
  j["snap_geo_acc"] = per_threshold(a.snap_geo_acc);
  j["snap_geo_acc_bar"] = a.snap_geo_bar;
  return j;
}

}  // namespace

std::string report_to_json_text(const MetricsReport& report) {
  json j;
  j["full"] = aggregate_to_json(report.full);
  j["occluded"] = aggregate_to_json(report.occluded);
  return j.dump(2);
}

std::string report_to_table(const MetricsReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %7s %10s %10s %8s %12s\n", "subset", "count",
                "GeoAcc", "EucAcc", "SIR", "GeoAcc_snap");
  out << line;
  auto row = [&](const char* name, const MetricsAggregate& a) {
    std::snprintf(line, sizeof(line), "%-10s %7d %9.2f%% %9.2f%% %7.2f%% %11.2f%%\n", name,
                  a.count, 100.0 * a.geo_bar, 100.0 * a.euc_bar, 100.0 * a.sir,
                  100.0 * a.snap_geo_bar);
    out << line;
  };
  row("full", report.full);
  row("occluded", report.occluded);
  return out.str();
}

}  // namespace bevnav
