#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "iflow/core.hpp"
#include "iflow/io.hpp"
#include "iflow/metrics.hpp"

namespace iflow {

enum class ObjectShape { Rectangle, Disk };

/// A translating object. Its top-left corner at frame t is path[t] when a
/// path is given (the last entry repeats), otherwise start + t * velocity;
/// the scene's camera offset is added on top.
struct SceneObject {
  ObjectShape shape = ObjectShape::Rectangle;
  int width = 5;
  int height = 5;  // ignored for disks, which use width as diameter
  PixelPos start{};
  Eigen::Vector2i velocity = Eigen::Vector2i::Zero();
  std::vector<PixelPos> path;
  int appear = 0;
  int disappear = -1;         // last live frame, -1 for the end of the scene
  std::vector<int> dropouts;  // frames where the object is missing from the label map
  std::uint64_t texture_seed = 1;
};

struct SceneSpec {
  GridDims dims{64, 64};
  int frames = 1;
  std::vector<SceneObject> objects;
  std::vector<PixelPos> camera;  // cumulative global offset per frame; empty means none
  double noise = 0.0;            // flow noise stddev in pixels, truncated at 3 sigma
  double flow_validity = 1.0;    // fraction of object pixels with valid flow

  void validate() const;
};

/// Everything one synthetic sequence provides. flows[t] maps frame t to t+1.
struct Scene {
  SceneSpec spec;
  std::vector<LabelMap> label_maps;
  std::vector<FlowField> flows;
  std::vector<GrayImage> images;
  std::vector<MotEntry> ground_truth;  // 1-based frames and coordinates
};

PixelPos object_position(const SceneSpec& spec, const SceneObject& object, int frame);
bool object_alive(const SceneSpec& spec, const SceneObject& object, int frame);

/// The object's full pixel set at a frame, clipped to the grid, ignoring occlusion.
PixelSet object_pixels(const SceneSpec& spec, const SceneObject& object, int frame);

/// Later-listed objects occlude earlier ones in label maps and flow.
/// Deterministic for a given spec and seed. Throws SpecError for invalid specs.
Scene generate(const SceneSpec& spec, std::uint64_t seed);

/// Driving-platform stand-in: four small objects under a slowly panning
/// camera with two abrupt pans of 10 px and, when jolt is set, a simultaneous
/// +8 px vertical jolt. Every object is at most 8 px wide and tall.
SceneSpec kitti13_proxy(std::uint64_t seed, bool jolt = true);

/// Frames t >= 1 whose camera step from t-1 is at least the smallest object
/// extent along the axis of motion.
std::vector<int> large_shift_frames(const SceneSpec& spec);

SceneSpec scene_spec_from_json(const std::string& text);
std::string scene_spec_to_json(const SceneSpec& spec);

/// Writes masks/NNNNNN.png, flow/NNNNNN.flo, images/NNNNNN.png, gt/gt.txt and
/// scene.json below dir. File frame numbers are 1-based; flow file k maps
/// frame k to k+1.
void write_scene(const Scene& scene, const std::filesystem::path& dir);

}  // namespace iflow
