#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "riskplan/field.hpp"
#include "riskplan/params.hpp"
#include "riskplan/predictor.hpp"
#include "riskplan/scenario.hpp"

namespace riskplan {

// World-axis-aligned sampling window. Cell (i, j) covers
// [origin + (i, j) * res, origin + (i+1, j+1) * res); energies are sampled at
// cell centers and stored row-major with j (the y index) as the row.
struct GridSpec {
  Vec2 origin;
  int nx = 0;
  int ny = 0;
  double resolution = 0.5;

  // Window around the ego pose: `ahead` meters of coverage in the dominant
  // travel direction, `behind` the other way, `half_width` to each side.
  static GridSpec AroundEgo(const Pose2& ego, const GridParams& gp);

  Vec2 CellCenter(int i, int j) const {
    return {origin.x + (i + 0.5) * resolution, origin.y + (j + 0.5) * resolution};
  }
  bool ContainsPoint(const Vec2& p) const {
    return p.x >= origin.x && p.x < origin.x + nx * resolution && p.y >= origin.y &&
           p.y < origin.y + ny * resolution;
  }
  bool operator==(const GridSpec& o) const = default;
};

struct RiskGrid {
  GridSpec spec;
  double time = 0.0;  // offset from the planning instant
  std::vector<double> energies;  // spec.nx * spec.ny, row-major in j

  double At(int i, int j) const { return energies[static_cast<size_t>(j) * spec.nx + i]; }
  double& At(int i, int j) { return energies[static_cast<size_t>(j) * spec.nx + i]; }
};

// Evaluates the combined field over the window. `workers` <= 1 runs inline;
// any worker count produces bit-identical output because each cell is an
// independent pure evaluation.
RiskGrid RasterizeFrame(std::span<const DynamicObject> objects,
                        std::span<const StaticObject> statics, const DynamicObject& ego,
                        const GridSpec& spec, const Params& params, int workers,
                        double frame_time = 0.0);

struct RiskStack {
  GridSpec spec;
  double dt = 0.5;
  std::vector<RiskGrid> frames;  // frame j sampled at j * dt
};

// Frame 0 holds current object states; frame j >= 1 places each predicted
// object at its trajectory state j. Static objects repeat in every frame and
// the ego never contributes to its own field. Throws PredictionError when a
// prediction does not cover (frames - 1) * dt.
RiskStack BuildRiskStack(std::span<const DynamicObject> objects,
                         std::span<const StaticObject> statics, const DynamicObject& ego,
                         const std::map<std::string, PredictedTrajectory>& predictions,
                         const GridSpec& spec, const Params& params, int workers);

// Binary dump: "RSKG", version u32, nx u32, ny u32, resolution f64,
// origin x f64, origin y f64, frame time f64, then nx*ny f64 energies
// row-major; all fields little-endian.
void WriteGridBinary(const RiskGrid& grid, const std::filesystem::path& file);
RiskGrid ReadGridBinary(const std::filesystem::path& file);

// Long-format CSV (x, y, energy) for plotting.
void WriteGridCsv(const RiskGrid& grid, const std::filesystem::path& file);

}  // namespace riskplan
