#include "riskplan/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <thread>

#include "riskplan/errors.hpp"

namespace riskplan {

namespace {

// Splits [0, n) into contiguous chunks, one thread per chunk. Chunk
// boundaries never change what a cell computes, only who computes it.
void ParallelFor(int n, int workers, const std::function<void(int, int)>& body) {
  if (workers <= 1 || n <= 1) {
    body(0, n);
    return;
  }
  const int used = std::min(workers, n);
  const int chunk = (n + used - 1) / used;
  std::vector<std::thread> threads;
  threads.reserve(used);
  for (int w = 0; w < used; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back(body, begin, end);
  }
  for (auto& t : threads) t.join();
}

}  // namespace

GridSpec GridSpec::AroundEgo(const Pose2& ego, const GridParams& gp) {
  GridSpec spec;
  spec.resolution = gp.resolution;
  const double c = std::cos(ego.heading);
  const double s = std::sin(ego.heading);
  double x_lo, x_hi, y_lo, y_hi;
  if (std::abs(c) >= std::abs(s)) {  // dominant travel along x
    x_lo = ego.position.x - (c >= 0.0 ? gp.behind : gp.ahead);
    x_hi = ego.position.x + (c >= 0.0 ? gp.ahead : gp.behind);
    y_lo = ego.position.y - gp.half_width;
    y_hi = ego.position.y + gp.half_width;
  } else {
    y_lo = ego.position.y - (s >= 0.0 ? gp.behind : gp.ahead);
    y_hi = ego.position.y + (s >= 0.0 ? gp.ahead : gp.behind);
    x_lo = ego.position.x - gp.half_width;
    x_hi = ego.position.x + gp.half_width;
  }
  spec.origin = {x_lo, y_lo};
  spec.nx = static_cast<int>(std::ceil((x_hi - x_lo) / gp.resolution - 1e-9));
  spec.ny = static_cast<int>(std::ceil((y_hi - y_lo) / gp.resolution - 1e-9));
  return spec;
}

RiskGrid RasterizeFrame(std::span<const DynamicObject> objects,
                        std::span<const StaticObject> statics, const DynamicObject& ego,
                        const GridSpec& spec, const Params& params, int workers,
                        double frame_time) {
  RiskGrid grid;
  grid.spec = spec;
  grid.time = frame_time;
  grid.energies.resize(static_cast<size_t>(spec.nx) * spec.ny);
  const PreparedScene scene(objects, statics, ego.Velocity(), ego.id, params);
  ParallelFor(spec.ny, workers, [&](int j_begin, int j_end) {
    for (int j = j_begin; j < j_end; ++j) {
      double* row = &grid.energies[static_cast<size_t>(j) * spec.nx];
      for (int i = 0; i < spec.nx; ++i) {
        row[i] = scene.EnergyAt(spec.CellCenter(i, j));
      }
    }
  });
  return grid;
}

RiskStack BuildRiskStack(std::span<const DynamicObject> objects,
                         std::span<const StaticObject> statics, const DynamicObject& ego,
                         const std::map<std::string, PredictedTrajectory>& predictions,
                         const GridSpec& spec, const Params& params, int workers) {
  RiskStack stack;
  stack.spec = spec;
  stack.dt = params.stack.dt;
  const int m = params.stack.frames;
  stack.frames.reserve(m);

  const int needed = m - 1;
  for (const DynamicObject& obj : objects) {
    const auto it = predictions.find(obj.id);
    if (it == predictions.end()) {
      throw PredictionError("risk stack: no prediction for object '" + obj.id + "'");
    }
    if (std::abs(it->second.dt - params.stack.dt) > 1e-9) {
      throw PredictionError("risk stack: prediction step mismatch for object '" + obj.id + "'");
    }
    if (static_cast<int>(it->second.states.size()) < needed) {
      throw PredictionError("risk stack: prediction for object '" + obj.id +
                            "' does not cover the stack span");
    }
  }

  std::vector<DynamicObject> frame_objects(objects.begin(), objects.end());
  for (int j = 0; j < m; ++j) {
    if (j > 0) {
      for (DynamicObject& obj : frame_objects) {
        const PredictedState& st = predictions.at(obj.id).states[j - 1];
        obj.pose = st.pose;
        obj.speed = st.speed;
      }
    }
    stack.frames.push_back(
        RasterizeFrame(frame_objects, statics, ego, spec, params, workers, j * params.stack.dt));
  }
  return stack;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "grid dumps assume a little-endian host");

constexpr char kMagic[4] = {'R', 'S', 'K', 'G'};
constexpr uint32_t kVersion = 1;

template <typename T>
void WriteRaw(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T ReadRaw(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  return value;
}

}  // namespace

void WriteGridBinary(const RiskGrid& grid, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("grid: cannot write file " + file.string());
  out.write(kMagic, sizeof(kMagic));
  WriteRaw(out, kVersion);
  WriteRaw(out, static_cast<uint32_t>(grid.spec.nx));
  WriteRaw(out, static_cast<uint32_t>(grid.spec.ny));
  WriteRaw(out, grid.spec.resolution);
  WriteRaw(out, grid.spec.origin.x);
  WriteRaw(out, grid.spec.origin.y);
  WriteRaw(out, grid.time);
  out.write(reinterpret_cast<const char*>(grid.energies.data()),
            static_cast<std::streamsize>(grid.energies.size() * sizeof(double)));
  if (!out) throw Error("grid: short write to " + file.string());
}

RiskGrid ReadGridBinary(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("grid: cannot open file " + file.string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("grid: bad magic in " + file.string());
  }
  const uint32_t version = ReadRaw<uint32_t>(in);
  if (version != kVersion) throw ParseError("grid: unsupported version in " + file.string());
  RiskGrid grid;
  grid.spec.nx = static_cast<int>(ReadRaw<uint32_t>(in));
  grid.spec.ny = static_cast<int>(ReadRaw<uint32_t>(in));
  grid.spec.resolution = ReadRaw<double>(in);
  grid.spec.origin.x = ReadRaw<double>(in);
  grid.spec.origin.y = ReadRaw<double>(in);
  grid.time = ReadRaw<double>(in);
  grid.energies.resize(static_cast<size_t>(grid.spec.nx) * grid.spec.ny);
  in.read(reinterpret_cast<char*>(grid.energies.data()),
          static_cast<std::streamsize>(grid.energies.size() * sizeof(double)));
  if (!in) throw ParseError("grid: truncated file " + file.string());
  return grid;
}

void WriteGridCsv(const RiskGrid& grid, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("grid: cannot write file " + file.string());
  out << "x,y,energy\n";
  out.precision(17);
  for (int j = 0; j < grid.spec.ny; ++j) {
    for (int i = 0; i < grid.spec.nx; ++i) {
      const Vec2 c = grid.spec.CellCenter(i, j);
      out << c.x << ',' << c.y << ',' << grid.At(i, j) << '\n';
    }
  }
}

}  // namespace riskplan
