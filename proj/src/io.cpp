#include "iflow/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <png.h>

namespace iflow {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

bool has_png_signature(const std::vector<unsigned char>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

// ---------------------------------------------------------------- PNG

struct DecodedImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int max_value = 255;
  bool palette = false;
  std::vector<std::uint16_t> samples;  // interleaved, row-major
};

struct MemoryReader {
  const std::vector<unsigned char>* bytes;
  std::size_t offset;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* src = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (src->offset + count > src->bytes->size()) png_error(png, "unexpected end of data");
  std::memcpy(out, src->bytes->data() + src->offset, count);
  src->offset += count;
}

DecodedImage decode_png(const std::vector<unsigned char>& bytes, const fs::path& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  MemoryReader reader{&bytes, 0};
  DecodedImage img;
  std::vector<png_byte> raw;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw CorruptFile("corrupt PNG: " + path.string());
  }
  png_set_read_fn(png, &reader, read_from_memory);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  img.palette = color == PNG_COLOR_TYPE_PALETTE;
  if (img.palette) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  img.width = int(png_get_image_width(png, info));
  img.height = int(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  img.max_value = out_depth == 16 ? 65535 : 255;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * std::size_t(img.height));
  rows.resize(std::size_t(img.height));
  for (int y = 0; y < img.height; ++y) rows[y] = raw.data() + rowbytes * std::size_t(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = std::size_t(img.width) * img.height * img.channels;
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.samples[i] = out_depth == 16 ? std::uint16_t((raw[2 * i] << 8) | raw[2 * i + 1]) : raw[i];
  }
  return img;
}

void encode_png(const fs::path& path, int width, int height, int color_type, int depth,
                const std::vector<png_byte>& packed) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng initialization failed");
  }
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = std::size_t(width) * channels * (depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(packed.data()) + rowbytes * std::size_t(y);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("PNG encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------- PNM

DecodedImage decode_pnm(const std::vector<unsigned char>& bytes, const fs::path& path) {
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    long v = 0;
    const auto* begin = reinterpret_cast<const char*>(bytes.data()) + pos;
    const auto* end = reinterpret_cast<const char*>(bytes.data()) + bytes.size();
    const auto [p, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || p == begin) throw CorruptFile("bad PNM header: " + path.string());
    pos += std::size_t(p - begin);
    return v;
  };
  DecodedImage img;
  img.channels = bytes[1] == '6' ? 3 : 1;
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20) || maxval < 1 || maxval > 65535)
    throw CorruptFile("bad PNM header: " + path.string());
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw CorruptFile("bad PNM header: " + path.string());
  ++pos;
  img.width = int(w);
  img.height = int(h);
  img.max_value = int(maxval);
  const int bps = maxval > 255 ? 2 : 1;
  const std::size_t n = std::size_t(w) * std::size_t(h) * img.channels;
  if (bytes.size() - pos < n * bps) throw CorruptFile("truncated PNM data: " + path.string());
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* s = bytes.data() + pos + i * bps;
    img.samples[i] = bps == 2 ? std::uint16_t((s[0] << 8) | s[1]) : s[0];
  }
  return img;
}

DecodedImage decode_image(const fs::path& path, bool allow_color) {
  const auto bytes = slurp(path);
  DecodedImage img;
  if (has_png_signature(bytes)) {
    img = decode_png(bytes, path);
  } else if (bytes.size() >= 2 && bytes[0] == 'P' &&
             (bytes[1] == '5' || (allow_color && bytes[1] == '6'))) {
    img = decode_pnm(bytes, path);
  } else {
    throw UnsupportedFormat("unsupported image format: " + path.string());
  }
  if (!allow_color && (img.channels != 1 || img.palette))
    throw UnsupportedFormat("label map must be single-channel: " + path.string());
  return img;
}

// ---------------------------------------------------------------- little-endian helpers

template <typename T>
void put_le(std::string& out, T value) {
  auto bits = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(bits.data(), bits.size());
}

template <typename T>
T get_le(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> bits;
  std::memcpy(bits.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

constexpr float kFloMagic = 202021.25f;
constexpr float kUnknownFlow = 1e10f;

bool is_unknown(float v) { return std::fabs(v) > 1e9f; }

// ---------------------------------------------------------------- MOT text

std::string format_number(double v, bool force_decimal) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (force_decimal && s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

// ---------------------------------------------------------------- label maps

LabelMap read_label_map(const fs::path& path) {
  const DecodedImage img = decode_image(path, false);
  LabelMap map(GridDims{img.width, img.height});
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      map.labels(y, x) = img.samples[std::size_t(y) * img.width + x];
  return map;
}

void write_label_map(const LabelMap& map, const fs::path& path) {
  const std::size_t n = map.dims.area();
  if (path.extension() == ".pgm") {
    std::string bytes = "P5\n" + std::to_string(map.dims.width) + " " +
                        std::to_string(map.dims.height) + "\n65535\n";
    for (int y = 0; y < map.dims.height; ++y)
      for (int x = 0; x < map.dims.width; ++x) {
        bytes.push_back(char(map.labels(y, x) >> 8));
        bytes.push_back(char(map.labels(y, x) & 0xff));
      }
    spit(path, bytes);
    return;
  }
  std::vector<png_byte> packed(n * 2);
  std::size_t i = 0;
  for (int y = 0; y < map.dims.height; ++y)
    for (int x = 0; x < map.dims.width; ++x) {
      packed[i++] = png_byte(map.labels(y, x) >> 8);
      packed[i++] = png_byte(map.labels(y, x) & 0xff);
    }
  encode_png(path, map.dims.width, map.dims.height, PNG_COLOR_TYPE_GRAY, 16, packed);
}

std::vector<InstanceMask> extract_instances(const LabelMap& map, int frame, int category) {
  std::map<std::uint16_t, PixelSet> sets;
  for (int y = 0; y < map.dims.height; ++y)
    for (int x = 0; x < map.dims.width; ++x) {
      const std::uint16_t v = map.labels(y, x);
      if (v == 0) continue;
      auto it = sets.find(v);
      if (it == sets.end()) it = sets.emplace(v, PixelSet(map.dims)).first;
      it->second.insert({x, y});
    }
  std::vector<InstanceMask> masks;
  masks.reserve(sets.size());
  for (auto& [label, pixels] : sets) masks.emplace_back(std::move(pixels), frame, label, category);
  return masks;
}

LabelMap render_label_map(GridDims dims, std::span<const InstanceMask> masks) {
  LabelMap map(dims);
  for (const auto& m : masks) {
    if (m.dims() != dims) throw DimsMismatch("mask grid differs from label map grid");
    if (m.instance() < 1 || m.instance() > 65535)
      throw InvalidArgument("instance index does not fit a 16-bit label");
    map.labels = m.pixels().bits().select(std::uint16_t(m.instance()), map.labels);
  }
  return map;
}

// ---------------------------------------------------------------- images

GrayImage read_gray_image(const fs::path& path) {
  const DecodedImage img = decode_image(path, true);
  GrayImage gray(GridDims{img.width, img.height});
  // Alpha, when present, is the last channel and does not contribute.
  const int color_channels = (img.channels == 2 || img.channels == 4) ? img.channels - 1 : img.channels;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::size_t base = (std::size_t(y) * img.width + x) * img.channels;
      double sum = 0;
      for (int c = 0; c < color_channels; ++c) sum += img.samples[base + c];
      gray.intensity(y, x) = float(sum / color_channels / img.max_value);
    }
  return gray;
}

void write_gray_image(const GrayImage& image, const fs::path& path) {
  std::vector<png_byte> packed;
  packed.reserve(image.dims.area());
  for (int y = 0; y < image.dims.height; ++y)
    for (int x = 0; x < image.dims.width; ++x)
      packed.push_back(png_byte(std::lround(std::clamp(image.intensity(y, x), 0.0f, 1.0f) * 255.0f)));
  encode_png(path, image.dims.width, image.dims.height, PNG_COLOR_TYPE_GRAY, 8, packed);
}

void write_rgb_image(const RgbImage& image, const fs::path& path) {
  encode_png(path, image.dims.width, image.dims.height, PNG_COLOR_TYPE_RGB, 8, image.data);
}

// ---------------------------------------------------------------- flow

FlowField read_flo(const fs::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < 4) throw TruncatedFile("flow file too short: " + path.string());
  if (get_le<float>(bytes.data()) != kFloMagic) throw BadMagic("not a .flo file: " + path.string());
  if (bytes.size() < 12) throw TruncatedFile("flow header truncated: " + path.string());
  const std::int32_t w = get_le<std::int32_t>(bytes.data() + 4);
  const std::int32_t h = get_le<std::int32_t>(bytes.data() + 8);
  if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20))
    throw CorruptFile("implausible flow dimensions in " + path.string());
  const std::size_t need = 12 + std::size_t(w) * std::size_t(h) * 8;
  if (bytes.size() < need) throw TruncatedFile("flow data truncated: " + path.string());

  FlowField flow(GridDims{w, h});
  const unsigned char* p = bytes.data() + 12;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x, p += 8) {
      const float u = get_le<float>(p), v = get_le<float>(p + 4);
      flow.dx(y, x) = u;
      flow.dy(y, x) = v;
      flow.valid(y, x) = !(is_unknown(u) || is_unknown(v));
    }
  return flow;
}

void write_flo(const FlowField& field, const fs::path& path) {
  std::string bytes;
  bytes.reserve(12 + field.dims.area() * 8);
  put_le(bytes, kFloMagic);
  put_le(bytes, std::int32_t(field.dims.width));
  put_le(bytes, std::int32_t(field.dims.height));
  for (int y = 0; y < field.dims.height; ++y)
    for (int x = 0; x < field.dims.width; ++x) {
      float u = field.dx(y, x), v = field.dy(y, x);
      if (!field.valid(y, x) && !is_unknown(u) && !is_unknown(v)) u = v = kUnknownFlow;
      put_le(bytes, u);
      put_le(bytes, v);
    }
  spit(path, bytes);
}

// ---------------------------------------------------------------- MOT

std::vector<MotEntry> to_mot_entries(std::span<const FrameOutput> outputs) {
  std::vector<MotEntry> rows;
  for (const auto& out : outputs)
    for (const auto& rec : out.records) {
      const Box b = bbox_of(rec.mask);
      rows.push_back({out.frame + 1, rec.track_id, double(b.left + 1), double(b.top + 1),
                      double(b.width), double(b.height), rec.coasted ? 0.5 : 1.0, nullptr});
    }
  return rows;
}

void write_mot(std::ostream& out, std::span<const MotEntry> entries) {
  for (const auto& e : entries) {
    out << e.frame << ',' << e.id << ',' << format_number(e.left, false) << ','
        << format_number(e.top, false) << ',' << format_number(e.width, false) << ','
        << format_number(e.height, false) << ',' << format_number(e.conf, true) << ",-1,-1,-1\n";
  }
}

void write_mot(std::span<const MotEntry> entries, const fs::path& path) {
  std::ostringstream out;
  write_mot(out, entries);
  spit(path, out.str());
}

void write_mot(std::span<const FrameOutput> outputs, const fs::path& path) {
  write_mot(to_mot_entries(outputs), path);
}

std::vector<MotEntry> parse_mot(std::istream& in) {
  std::vector<MotEntry> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<double> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      std::string_view tok(line.data() + start,
                           (comma == std::string::npos ? line.size() : comma) - start);
      while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
      while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
      double v = 0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty())
        throw ParseError("malformed field '" + std::string(tok) + "'", lineno);
      fields.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 6) throw ParseError("expected at least 6 fields", lineno);
    if (fields[0] != std::floor(fields[0]) || fields[1] != std::floor(fields[1]))
      throw ParseError("frame and id must be integers", lineno);
    if (!(fields[4] > 0) || !(fields[5] > 0)) throw ParseError("box must have positive size", lineno);
    rows.push_back({int(fields[0]), int(fields[1]), fields[2], fields[3], fields[4], fields[5],
                    fields.size() > 6 ? fields[6] : 1.0, nullptr});
  }
  return rows;
}

std::vector<MotEntry> read_mot(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_mot(in);
}

std::string frame_stem(int file_frame) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", file_frame);
  return buf;
}

}  // namespace iflow
