#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "iflow/core.hpp"
#include "iflow/metrics.hpp"
#include "iflow/tracker.hpp"

namespace iflow {

/// Per-pixel instance labels for one frame: 0 is background, v > 0 instance v.
struct LabelMap {
  GridDims dims;
  Plane<std::uint16_t> labels;

  LabelMap() = default;
  explicit LabelMap(GridDims d) : dims(d), labels(Plane<std::uint16_t>::Zero(d.height, d.width)) {}
};

/// Reads a single-channel 8/16-bit PNG or a binary PGM (P5). Values are
/// taken verbatim. Throws UnsupportedFormat or CorruptFile.
LabelMap read_label_map(const std::filesystem::path& path);

/// Writes a 16-bit grayscale PNG, or a P5 PGM with maxval 65535 when the
/// extension is .pgm.
void write_label_map(const LabelMap& map, const std::filesystem::path& path);

/// One mask per distinct nonzero label, ascending label order.
std::vector<InstanceMask> extract_instances(const LabelMap& map, int frame, int category = 1);

/// Paints masks into a label map using their instance index. Later masks win.
LabelMap render_label_map(GridDims dims, std::span<const InstanceMask> masks);

/// Reads PNG (gray, gray+alpha, RGB, RGBA, palette), PGM (P5) or PPM (P6)
/// and reduces color to the mean of its channels, scaled to [0, 1].
GrayImage read_gray_image(const std::filesystem::path& path);

/// 8-bit grayscale PNG; intensities are clamped to [0, 1] and rounded.
void write_gray_image(const GrayImage& image, const std::filesystem::path& path);

struct RgbImage {
  GridDims dims;
  std::vector<std::uint8_t> data;  // interleaved RGB, row-major

  RgbImage() = default;
  explicit RgbImage(GridDims d) : dims(d), data(d.area() * 3, 0) {}
  std::uint8_t* at(PixelPos p) { return data.data() + (std::size_t(p.y) * dims.width + p.x) * 3; }
};

void write_rgb_image(const RgbImage& image, const std::filesystem::path& path);

/// Middlebury .flo. Vectors with a component beyond 1e9 in magnitude are
/// flagged invalid. Throws BadMagic or TruncatedFile.
FlowField read_flo(const std::filesystem::path& path);

/// Invalid pixels are written with the 1e10 unknown marker unless they already
/// carry one, so a read/write cycle reproduces the input bytes.
void write_flo(const FlowField& field, const std::filesystem::path& path);

/// Converts tracker output to MOT rows: 1-based frames and coordinates,
/// conf 1.0 for detections and 0.5 for coasted predictions.
std::vector<MotEntry> to_mot_entries(std::span<const FrameOutput> outputs);

/// `frame,id,left,top,width,height,conf,-1,-1,-1` per row.
void write_mot(std::ostream& out, std::span<const MotEntry> entries);
void write_mot(std::span<const MotEntry> entries, const std::filesystem::path& path);
void write_mot(std::span<const FrameOutput> outputs, const std::filesystem::path& path);

/// Parses MOT rows; needs at least frame,id,left,top,width,height, conf
/// defaults to 1, further fields are ignored. Throws ParseError with the line.
std::vector<MotEntry> parse_mot(std::istream& in);
std::vector<MotEntry> read_mot(const std::filesystem::path& path);

/// Zero-padded six digit file stem used for per-frame files.
std::string frame_stem(int file_frame);

}  // namespace iflow
