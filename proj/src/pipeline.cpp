#include "iflow/pipeline.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include "iflow/io.hpp"
#include "iflow/tracker.hpp"

namespace iflow {

namespace fs = std::filesystem;

namespace {

bool numeric_stem(const fs::path& p, int& number) {
  const std::string stem = p.stem().string();
  if (stem.empty() || stem.size() > 9) return false;
  for (char c : stem)
    if (c < '0' || c > '9') return false;
  number = std::stoi(stem);
  return true;
}

fs::path find_frame_file(const fs::path& dir, int file_frame,
                         std::initializer_list<const char*> extensions) {
  for (const char* ext : extensions) {
    fs::path candidate = dir / (frame_stem(file_frame) + ext);
    if (fs::exists(candidate)) return candidate;
  }
  return dir / (frame_stem(file_frame) + *extensions.begin());
}

std::vector<InstanceMask> load_detections(const fs::path& file, int frame) {
  return extract_instances(read_label_map(file), frame);
}

}  // namespace

std::map<int, fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<int, fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    int n = 0;
    if (numeric_stem(entry.path(), n)) {
      const auto [it, fresh] = frames.emplace(n, entry.path());
      if (!fresh) throw IoError("two files for frame " + std::to_string(n) + " in " + dir.string());
    }
  }
  if (frames.empty()) throw IoError("no numbered frame files in " + dir.string());
  int expect = frames.begin()->first;
  for (const auto& [n, path] : frames) {
    if (n != expect) throw IoError("missing frame " + frame_stem(expect) + " in " + dir.string());
    ++expect;
  }
  return frames;
}

void run_track(const TrackOptions& options, std::ostream& log) {
  const int sources = int(options.flow_dir.has_value()) + int(options.image_dir.has_value()) +
                      int(options.tracker.zero_flow);
  if (sources != 1)
    throw InvalidArgument("exactly one of flow directory, image directory or zero-flow is required");

  const auto frames = list_frames(options.mask_dir);
  const int first_file = frames.begin()->first;

  TrackerState state =
      init(load_detections(frames.begin()->second, first_file - 1), options.tracker, first_file - 1);
  std::vector<FrameOutput> outputs{initial_output(state)};
  log << "frame " << first_file << ": " << outputs.back().records.size() << " records, "
      << state.tracks.size() << " live tracks\n";

  std::optional<GrayImage> prev_image;
  for (auto it = std::next(frames.begin()); it != frames.end(); ++it) {
    const int file_frame = it->first;
    FrameInput input;
    input.frame = file_frame - 1;
    input.detections = load_detections(it->second, input.frame);
    if (options.flow_dir) {
      const fs::path flo = *options.flow_dir / (frame_stem(file_frame - 1) + ".flo");
      if (!fs::exists(flo)) throw IoError("missing flow file: " + flo.string());
      input.flow = read_flo(flo);
    } else if (options.image_dir) {
      if (!prev_image) {
        const fs::path prev = find_frame_file(*options.image_dir, file_frame - 1, {".png", ".pgm", ".ppm"});
        if (!fs::exists(prev)) throw IoError("missing image file: " + prev.string());
        prev_image = read_gray_image(prev);
      }
      const fs::path next = find_frame_file(*options.image_dir, file_frame, {".png", ".pgm", ".ppm"});
      if (!fs::exists(next)) throw IoError("missing image file: " + next.string());
      GrayImage next_image = read_gray_image(next);
      input.flow = block_match_flow(*prev_image, next_image, options.block);
      prev_image = std::move(next_image);
    }
    outputs.push_back(step(state, input));
    log << "frame " << file_frame << ": " << outputs.back().records.size() << " records, "
        << state.tracks.size() << " live tracks\n";
  }
  write_mot(outputs, options.output);
}

void run_flow(const fs::path& image_dir, const BlockMatchParams& params, const fs::path& out_dir) {
  const auto frames = list_frames(image_dir);
  fs::create_directories(out_dir);
  std::optional<GrayImage> prev;
  for (const auto& [n, path] : frames) {
    GrayImage image = read_gray_image(path);
    if (prev) write_flo(block_match_flow(*prev, image, params), out_dir / (frame_stem(n - 1) + ".flo"));
    prev = std::move(image);
  }
}

std::array<std::uint8_t, 3> track_color(int id) {
  // Golden-angle hue steps keep neighboring ids apart.
  const double hue = std::fmod(id * 137.508, 360.0) / 60.0;
  const double c = 0.85, x = c * (1 - std::fabs(std::fmod(hue, 2.0) - 1)), m = 0.15;
  double r = 0, g = 0, b = 0;
  switch (int(hue)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  auto q = [m](double v) { return std::uint8_t(std::lround((v + m) * 255.0)); };
  return {q(r), q(g), q(b)};
}

void run_render(const fs::path& mask_dir, const fs::path& result,
                const std::optional<fs::path>& image_dir, const fs::path& out_dir) {
  const auto frames = list_frames(mask_dir);
  std::map<int, std::vector<MotEntry>> rows;
  for (auto& e : read_mot(result)) rows[e.frame].push_back(e);
  fs::create_directories(out_dir);

  for (const auto& [n, path] : frames) {
    const LabelMap labels = read_label_map(path);
    const auto instances = extract_instances(labels, n - 1);
    const GridDims dims = labels.dims;
    RgbImage canvas(dims);
    if (image_dir) {
      const fs::path img = find_frame_file(*image_dir, n, {".png", ".pgm", ".ppm"});
      if (!fs::exists(img)) throw IoError("missing image file: " + img.string());
      const GrayImage gray = read_gray_image(img);
      if (gray.dims != dims) throw DimsMismatch("image and label map sizes differ: " + img.string());
      for (int y = 0; y < dims.height; ++y)
        for (int x = 0; x < dims.width; ++x) {
          std::uint8_t* px = canvas.at({x, y});
          px[0] = px[1] = px[2] = std::uint8_t(std::lround(gray.intensity(y, x) * 255.0f));
        }
    }
    for (const MotEntry& row : rows[n]) {
      const auto color = track_color(row.id);
      const InstanceMask* hit = nullptr;
      for (const auto& inst : instances) {
        const Box b = bbox_of(inst);
        if (b.left + 1 == row.left && b.top + 1 == row.top && b.width == row.width &&
            b.height == row.height) {
          hit = &inst;
          break;
        }
      }
      if (hit && row.conf >= 1.0) {
        for (const PixelPos& p : hit->pixels().positions()) {
          std::uint8_t* px = canvas.at(p);
          for (int c = 0; c < 3; ++c) px[c] = std::uint8_t((px[c] * 2 + color[c] * 3) / 5);
        }
        continue;
      }
      const int x0 = int(row.left) - 1, y0 = int(row.top) - 1;
      const int x1 = x0 + int(row.width) - 1, y1 = y0 + int(row.height) - 1;
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          if (y != y0 && y != y1 && x != x0 && x != x1) continue;
          if (!in_bounds(dims, {x, y})) continue;
          std::uint8_t* px = canvas.at({x, y});
          for (int c = 0; c < 3; ++c) px[c] = color[c];
        }
    }
    write_rgb_image(canvas, out_dir / (frame_stem(n) + ".png"));
  }
}

}  // namespace iflow
