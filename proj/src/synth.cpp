#include "iflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace iflow {

namespace fs = std::filesystem;

namespace {

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(a),
                    std::uint32_t(b)};
  return std::mt19937_64(seq);
}

int object_height(const SceneObject& o) {
  return o.shape == ObjectShape::Disk ? o.width : o.height;
}

bool in_shape(const SceneObject& o, int u, int v) {
  if (o.shape == ObjectShape::Rectangle) return true;
  const double c = (o.width - 1) / 2.0, r = o.width / 2.0;
  return (u - c) * (u - c) + (v - c) * (v - c) <= r * r;
}

// Per-object texture in object-local coordinates, quantized to 8 bits so the
// PNG images carry the exact intensities.
Plane<float> object_texture(const SceneObject& o) {
  auto rng = substream(o.texture_seed, 0x7e47);
  std::uniform_int_distribution<int> level(140, 255);
  Plane<float> tex(object_height(o), o.width);
  for (Eigen::Index i = 0; i < tex.size(); ++i) tex.data()[i] = float(level(rng)) / 255.0f;
  return tex;
}

}  // namespace

void SceneSpec::validate() const {
  if (!dims.valid()) throw SpecError("scene dimensions must be positive");
  if (frames < 1) throw SpecError("scene needs at least one frame");
  if (!(noise >= 0)) throw SpecError("noise must be non-negative");
  if (!(flow_validity > 0 && flow_validity <= 1)) throw SpecError("flow_validity must be in (0, 1]");
  if (!camera.empty() && int(camera.size()) != frames)
    throw SpecError("camera offsets must list one entry per frame");
  if (objects.size() > 65535) throw SpecError("too many objects for 16-bit labels");
  for (const auto& o : objects) {
    if (o.width < 1 || object_height(o) < 1) throw SpecError("object size must be positive");
    if (o.appear < 0 || (o.disappear >= 0 && o.disappear < o.appear))
      throw SpecError("object lifetime is empty");
  }
}

PixelPos object_position(const SceneSpec& spec, const SceneObject& o, int frame) {
  PixelPos p;
  if (!o.path.empty()) {
    p = o.path[std::size_t(std::min(frame, int(o.path.size()) - 1))];
  } else {
    p = {o.start.x + o.velocity.x() * frame, o.start.y + o.velocity.y() * frame};
  }
  if (!spec.camera.empty()) {
    const PixelPos c = spec.camera[std::size_t(std::clamp(frame, 0, int(spec.camera.size()) - 1))];
    p.x += c.x;
    p.y += c.y;
  }
  return p;
}

bool object_alive(const SceneSpec& spec, const SceneObject& o, int frame) {
  const int last = o.disappear < 0 ? spec.frames - 1 : o.disappear;
  return frame >= o.appear && frame <= last;
}

PixelSet object_pixels(const SceneSpec& spec, const SceneObject& o, int frame) {
  PixelSet set(spec.dims);
  const PixelPos at = object_position(spec, o, frame);
  for (int v = 0; v < object_height(o); ++v)
    for (int u = 0; u < o.width; ++u) {
      const PixelPos p{at.x + u, at.y + v};
      if (in_shape(o, u, v) && in_bounds(spec.dims, p)) set.insert(p);
    }
  return set;
}

Scene generate(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  Scene scene;
  scene.spec = spec;
  const GridDims dims = spec.dims;
  const int n_obj = int(spec.objects.size());

  std::vector<Plane<float>> textures;
  for (const auto& o : spec.objects) textures.push_back(object_texture(o));

  Plane<float> background(dims.height, dims.width);
  {
    auto rng = substream(seed, 0xb6);
    std::uniform_int_distribution<int> level(0, 120);
    for (Eigen::Index i = 0; i < background.size(); ++i)
      background.data()[i] = float(level(rng)) / 255.0f;
  }

  // owner(t): index+1 of the object physically visible at each pixel.
  auto owners = [&](int t) {
    Plane<int> owner = Plane<int>::Zero(dims.height, dims.width);
    for (int k = 0; k < n_obj; ++k) {
      if (!object_alive(spec, spec.objects[k], t)) continue;
      owner = object_pixels(spec, spec.objects[k], t).bits().select(k + 1, owner);
    }
    return owner;
  };

  for (int t = 0; t < spec.frames; ++t) {
    const Plane<int> owner = owners(t);

    LabelMap labels(dims);
    GrayImage image(dims);
    image.intensity = background;
    for (int y = 0; y < dims.height; ++y)
      for (int x = 0; x < dims.width; ++x) {
        const int k = owner(y, x) - 1;
        if (k < 0) continue;
        const SceneObject& o = spec.objects[k];
        const PixelPos at = object_position(spec, o, t);
        image.intensity(y, x) = textures[k](y - at.y, x - at.x);
        if (std::find(o.dropouts.begin(), o.dropouts.end(), t) == o.dropouts.end())
          labels.labels(y, x) = std::uint16_t(k + 1);
      }
    scene.label_maps.push_back(std::move(labels));
    scene.images.push_back(std::move(image));

    for (int k = 0; k < n_obj; ++k) {
      const SceneObject& o = spec.objects[k];
      if (!object_alive(spec, o, t)) continue;
      const PixelSet full = object_pixels(spec, o, t);
      if (full.empty()) continue;
      const Box b = bbox_of(full);
      scene.ground_truth.push_back({t + 1, k + 1, double(b.left + 1), double(b.top + 1),
                                    double(b.width), double(b.height), 1.0, nullptr});
    }

    if (t + 1 == spec.frames) break;

    FlowField flow(dims);
    auto rng = substream(seed, 0xf10, std::uint64_t(t));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution keep(spec.flow_validity);
    const auto noise = [&] {
      if (spec.noise <= 0) return 0.0;
      double z;
      do z = gauss(rng);
      while (std::fabs(z) > 3.0);
      return z * spec.noise;
    };
    std::vector<PixelPos> first_pixel(std::size_t(n_obj), PixelPos{-1, -1});
    std::vector<bool> any_valid(std::size_t(n_obj), false);
    for (int y = 0; y < dims.height; ++y)
      for (int x = 0; x < dims.width; ++x) {
        const int k = owner(y, x) - 1;
        if (k < 0) continue;
        const SceneObject& o = spec.objects[k];
        const PixelPos a = object_position(spec, o, t), b = object_position(spec, o, t + 1);
        const double vx = (b.x - a.x) + noise(), vy = (b.y - a.y) + noise();
        const bool ok = keep(rng);
        flow.set({x, y}, vx, vy, ok);
        if (first_pixel[k].x < 0) first_pixel[k] = {x, y};
        any_valid[k] = any_valid[k] || ok;
      }
    for (int k = 0; k < n_obj; ++k)
      if (first_pixel[k].x >= 0 && !any_valid[k]) flow.valid(first_pixel[k].y, first_pixel[k].x) = true;
    scene.flows.push_back(std::move(flow));
  }
  return scene;
}

SceneSpec kitti13_proxy(std::uint64_t seed, bool jolt) {
  auto rng = substream(seed, 0x4b13);
  std::uniform_int_distribution<int> jitter(-3, 3), speed(-1, 1);

  SceneSpec spec;
  spec.dims = {200, 120};
  spec.frames = 20;
  spec.noise = 0.25;
  spec.flow_validity = 0.6;

  struct Proto {
    ObjectShape shape;
    int w, h, x, y;
  };
  const Proto protos[] = {{ObjectShape::Rectangle, 6, 8, 20, 30},
                          {ObjectShape::Disk, 8, 8, 60, 70},
                          {ObjectShape::Rectangle, 8, 8, 100, 40},
                          {ObjectShape::Rectangle, 5, 8, 125, 80}};
  std::uint64_t tex = seed * 16 + 1;
  for (const Proto& p : protos) {
    SceneObject o;
    o.shape = p.shape;
    o.width = p.w;
    o.height = p.h;
    o.start = {p.x + jitter(rng), p.y + jitter(rng)};
    o.velocity = {speed(rng), 0};
    o.texture_seed = tex++;
    spec.objects.push_back(o);
  }

  PixelPos cam{0, 0};
  for (int t = 0; t < spec.frames; ++t) {
    if (t > 0) {
      cam.x += (t == 6 || t == 14) ? 10 : 1;
      if (jolt && t == 10) cam.y += 8;
    }
    spec.camera.push_back(cam);
  }
  return spec;
}

std::vector<int> large_shift_frames(const SceneSpec& spec) {
  std::vector<int> frames;
  if (spec.camera.empty() || spec.objects.empty()) return frames;
  int min_w = spec.objects.front().width, min_h = object_height(spec.objects.front());
  for (const auto& o : spec.objects) {
    min_w = std::min(min_w, o.width);
    min_h = std::min(min_h, object_height(o));
  }
  for (int t = 1; t < int(spec.camera.size()); ++t) {
    const int sx = std::abs(spec.camera[t].x - spec.camera[t - 1].x);
    const int sy = std::abs(spec.camera[t].y - spec.camera[t - 1].y);
    if (sx >= min_w || sy >= min_h) frames.push_back(t);
  }
  return frames;
}

// ---------------------------------------------------------------- JSON

namespace {

using nlohmann::json;

PixelPos pos_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw SpecError("positions are [x, y] pairs");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

SceneSpec scene_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("scene spec is not valid JSON: ") + e.what());
  }
  SceneSpec spec;
  try {
    spec.dims = {j.at("width").get<int>(), j.at("height").get<int>()};
    spec.frames = j.at("frames").get<int>();
    spec.noise = j.value("noise", 0.0);
    spec.flow_validity = j.value("flow_validity", 1.0);
    for (const auto& c : j.value("camera", json::array())) spec.camera.push_back(pos_from(c));
    for (const auto& jo : j.at("objects")) {
      SceneObject o;
      const std::string shape = jo.value("shape", "rectangle");
      if (shape == "rectangle") {
        o.shape = ObjectShape::Rectangle;
      } else if (shape == "disk") {
        o.shape = ObjectShape::Disk;
      } else {
        throw SpecError("unknown shape '" + shape + "'");
      }
      o.width = jo.value("width", jo.value("size", 5));
      o.height = jo.value("height", o.width);
      if (jo.contains("start")) o.start = pos_from(jo["start"]);
      if (jo.contains("velocity")) {
        const PixelPos v = pos_from(jo["velocity"]);
        o.velocity = {v.x, v.y};
      }
      for (const auto& p : jo.value("path", json::array())) o.path.push_back(pos_from(p));
      o.appear = jo.value("appear", 0);
      o.disappear = jo.value("disappear", -1);
      o.dropouts = jo.value("dropouts", std::vector<int>{});
      o.texture_seed = jo.value("texture_seed", std::uint64_t(spec.objects.size() + 1));
      spec.objects.push_back(o);
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad scene spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string scene_spec_to_json(const SceneSpec& spec) {
  json j;
  j["width"] = spec.dims.width;
  j["height"] = spec.dims.height;
  j["frames"] = spec.frames;
  j["noise"] = spec.noise;
  j["flow_validity"] = spec.flow_validity;
  j["camera"] = json::array();
  for (const auto& c : spec.camera) j["camera"].push_back({c.x, c.y});
  j["objects"] = json::array();
  for (const auto& o : spec.objects) {
    json jo;
    jo["shape"] = o.shape == ObjectShape::Disk ? "disk" : "rectangle";
    jo["width"] = o.width;
    jo["height"] = o.height;
    jo["start"] = {o.start.x, o.start.y};
    jo["velocity"] = {o.velocity.x(), o.velocity.y()};
    jo["path"] = json::array();
    for (const auto& p : o.path) jo["path"].push_back({p.x, p.y});
    jo["appear"] = o.appear;
    jo["disappear"] = o.disappear;
    jo["dropouts"] = o.dropouts;
    jo["texture_seed"] = o.texture_seed;
    j["objects"].push_back(jo);
  }
  return j.dump(2) + "\n";
}

void write_scene(const Scene& scene, const fs::path& dir) {
  for (const char* sub : {"masks", "flow", "images", "gt"}) fs::create_directories(dir / sub);
  for (std::size_t t = 0; t < scene.label_maps.size(); ++t) {
    const std::string stem = frame_stem(int(t) + 1);
    write_label_map(scene.label_maps[t], dir / "masks" / (stem + ".png"));
    write_gray_image(scene.images[t], dir / "images" / (stem + ".png"));
  }
  for (std::size_t t = 0; t < scene.flows.size(); ++t)
    write_flo(scene.flows[t], dir / "flow" / (frame_stem(int(t) + 1) + ".flo"));
  write_mot(scene.ground_truth, dir / "gt" / "gt.txt");
  std::ofstream(dir / "scene.json") << scene_spec_to_json(scene.spec);
}

}  // namespace iflow
