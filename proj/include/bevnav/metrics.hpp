#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bevnav/geodesy.hpp"
#include "bevnav/grid.hpp"

namespace bevnav {

/// Accuracy thresholds in meters.
inline constexpr std::array<double, 3> kAccThresholds = {0.5, 1.0, 1.5};

struct ArgmaxResult {
  Cell cell;
  double x = 0.0, y = 0.0;  // metric center of the argmax cell
};

/// Global maximum of a single-channel map; ties resolve to the lowest
/// row-major index.
ArgmaxResult argmax_target(const BevMap& map);

/// Prediction counts as a hit when its cell is traversable and within
/// geodesic distance t of the target over static-free cells. Blocked or
/// unreachable predictions miss. Throws std::out_of_range outside the grid.
bool geo_acc(double pred_x, double pred_y, double target_x, double target_y,
             const TravGrid& trav, double t);

/// Plain Euclidean radius test; traversability is ignored.
bool euc_acc(double pred_x, double pred_y, double target_x, double target_y, double t);

/// True iff the prediction's cell is inside non-traversable static structure.
/// Pedestrian (transient) cells do not count.
bool structural_invalid(double pred_x, double pred_y, const TravGrid& trav);

struct SampleMetrics {
  std::array<bool, 3> geo{};
  std::array<bool, 3> euc{};
  std::array<bool, 3> snap_geo{};
  bool invalid = false;
  bool occluded = false;
};

/// All per-sample metrics from one geodesic field (sourced at the target).
SampleMetrics score_prediction(double pred_x, double pred_y, double target_x,
                               double target_y, const TravGrid& trav,
                               const DistanceField& from_target);

struct MetricsAggregate {
  std::array<double, 3> geo_acc{};
  std::array<double, 3> euc_acc{};
  std::array<double, 3> snap_geo_acc{};
  double geo_bar = 0.0, euc_bar = 0.0, snap_geo_bar = 0.0;
  double sir = 0.0;
  int count = 0;
};

struct MetricsReport {
  MetricsAggregate full;
  MetricsAggregate occluded;
};

MetricsAggregate aggregate(const std::vector<SampleMetrics>& samples, bool occluded_only);

struct PredictionRecord {
  std::string id;
  double x = 0.0, y = 0.0;
};

/// JSON-lines {id, pred:[x, y]}.
void write_predictions(const std::vector<PredictionRecord>& preds, const std::string& path);
std::vector<PredictionRecord> load_predictions(const std::string& path);

/// Scores a predictions file against a manifest. Scene files resolve
/// relative to the manifest directory. Every manifest id must have exactly
/// one prediction; missing or duplicate ids throw with the offending id.
MetricsReport evaluate_manifest(const std::string& manifest_path,
                                const std::string& predictions_path,
                                const GridSpec& spec, double agent_radius = 0.2,
                                int threads = 1,
                                const std::string& split_filter = "val");

std::string report_to_json_text(const MetricsReport& report);
std::string report_to_table(const MetricsReport& report);

}  // namespace bevnav
