#include "tandepth/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tandepth/error.hpp"

namespace tandepth {

namespace {

constexpr char kMagic[4] = {'T', 'D', 'G', 'D'};
constexpr uint32_t kVersion = 1;

bool host_little_endian() {
  uint16_t probe = 1;
  uint8_t b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if (!host_little_endian()) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const std::string& buf, size_t offset) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + offset, sizeof(T));
  if (!host_little_endian()) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void need(const std::string& buf, size_t offset, size_t bytes, const std::string& path) {
  if (offset + bytes > buf.size())
    raise(Errc::FormatError,
          path + ": truncated at byte offset " + std::to_string(buf.size()) + ", need " +
              std::to_string(offset + bytes));
}

nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::FormatError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::FormatError, path + ": " + e.what());
  }
}

}  // namespace

void save_gdem(const GdemCloud& cloud, const std::string& path) {
  std::string buf;
  buf.reserve(32 + cloud.points.size() * 24);
  buf.append(kMagic, 4);
  put_le<uint32_t>(buf, kVersion);
  put_le<uint64_t>(buf, cloud.seed);
  put_le<double>(buf, cloud.density_pts_per_m2.value_or(0.0));
  put_le<uint64_t>(buf, cloud.points.size());
  for (const auto& p : cloud.points) {
    if (!p.allFinite()) raise(Errc::FormatError, "refusing to write non-finite point");
    put_le<double>(buf, p.x());
    put_le<double>(buf, p.y());
    put_le<double>(buf, p.z());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::FormatError, "cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) raise(Errc::FormatError, "short write to " + path);
}

GdemCloud load_gdem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::FormatError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string buf = ss.str();

  need(buf, 0, 4, path);
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    raise(Errc::FormatError, path + ": bad magic at byte offset 0");
  need(buf, 4, 4 + 8 + 8 + 8, path);
  uint32_t version = get_le<uint32_t>(buf, 4);
  if (version != kVersion)
    raise(Errc::FormatError,
          path + ": unsupported version " + std::to_string(version) + " at byte offset 4");
  GdemCloud cloud;
  cloud.seed = get_le<uint64_t>(buf, 8);
  double density = get_le<double>(buf, 16);
  uint64_t count = get_le<uint64_t>(buf, 24);
  if (count > (buf.size() - 32) / 24)
    raise(Errc::FormatError, path + ": impossible count " + std::to_string(count) +
                                 " at byte offset 24");
  need(buf, 32, count * 24, path);
  cloud.points.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    size_t off = 32 + i * 24;
    double x = get_le<double>(buf, off);
    double y = get_le<double>(buf, off + 8);
    double z = get_le<double>(buf, off + 16);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      raise(Errc::FormatError, path + ": non-finite coordinate at byte offset " +
                                   std::to_string(off));
    cloud.points.emplace_back(x, y, z);
  }
  if (density > 0.0) {
    cloud.density_pts_per_m2 = density;
    cloud.source_tag = GdemCloud::Source::Densified;
  }
  return cloud;
}

std::vector<Eigen::Vector3d> read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::FormatError, "cannot open " + path);
  std::vector<Eigen::Vector3d> points;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double a, b, c;
    if (!(ls >> a)) continue;  // blank or comment-only
    if (!(ls >> b >> c))
      raise(Errc::FormatError, path + ":" + std::to_string(line_no) + ": expected three values");
    double extra;
    if (ls >> extra)
      raise(Errc::FormatError, path + ":" + std::to_string(line_no) + ": trailing values");
    points.emplace_back(a, b, c);
  }
  return points;
}

Intrinsics read_intrinsics(const std::string& path) {
  nlohmann::json j = parse_json_file(path);
  Intrinsics k;
  try {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::FormatError, path + ": " + e.what());
  }
  validate_intrinsics(k);
  return k;
}

void write_intrinsics(const Intrinsics& k, const std::string& path) {
  nlohmann::json j{{"fx", k.fx}, {"fy", k.fy},       {"cx", k.cx},
                   {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
  std::ofstream out(path);
  if (!out) raise(Errc::FormatError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<PoseRecord> read_poses(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::FormatError, "cannot open " + path);
  std::vector<PoseRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      PoseRecord rec;
      rec.frame_id = j.at("frame_id").get<std::string>();
      auto pos = j.at("position_xyz_m");
      rec.position = {pos.at(0).get<double>(), pos.at(1).get<double>(), pos.at(2).get<double>()};
      auto q = j.at("rotation");
      rec.rotation = Eigen::Quaterniond(q.at(0).get<double>(), q.at(1).get<double>(),
                                        q.at(2).get<double>(), q.at(3).get<double>());
      rec.pitch_deg = j.at("pitch_deg").get<double>();
      if (j.contains("agl_m")) rec.agl_m = j.at("agl_m").get<double>();
      double norm = rec.rotation.norm();
      if (std::abs(norm - 1.0) > 1e-6)
        raise(Errc::FormatError, "quaternion norm " + std::to_string(norm));
      rec.rotation.normalize();
      records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::FormatError, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_poses(const std::vector<PoseRecord>& poses, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::FormatError, "cannot write " + path);
  for (const auto& rec : poses) {
    nlohmann::json j;
    j["frame_id"] = rec.frame_id;
    j["position_xyz_m"] = {rec.position.x(), rec.position.y(), rec.position.z()};
    j["rotation"] = {rec.rotation.w(), rec.rotation.x(), rec.rotation.y(), rec.rotation.z()};
    j["pitch_deg"] = rec.pitch_deg;
    if (rec.agl_m) j["agl_m"] = *rec.agl_m;
    out << j.dump() << "\n";
  }
}

Pose to_pose(const PoseRecord& rec) {
  if (!rec.agl_m) raise(Errc::ConfigError, "pose record " + rec.frame_id + " lacks agl_m");
  Pose pose;
  pose.rotation = rec.rotation.toRotationMatrix();
  pose.position = rec.position;
  pose.pitch_deg = rec.pitch_deg;
  pose.agl_m = *rec.agl_m;
  validate_pose(pose);
  return pose;
}

void write_mask_png(const GroundMask& mask, const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) raise(Errc::FormatError, "cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    raise(Errc::FormatError, "libpng failure writing " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, mask.cols(), mask.rows(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(mask.cols());
  for (int v = 0; v < mask.rows(); ++v) {
    for (int u = 0; u < mask.cols(); ++u) row[u] = mask(v, u) ? 255 : 0;
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

GroundMask read_mask_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) raise(Errc::FormatError, "cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    std::fclose(fp);
    raise(Errc::FormatError, "libpng failure reading " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    raise(Errc::FormatError, path + ": expected 8-bit grayscale");
  }
  GroundMask mask(static_cast<int>(h), static_cast<int>(w), 0);
  std::vector<png_byte> row(w);
  for (png_uint_32 v = 0; v < h; ++v) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 u = 0; u < w; ++u)
      mask(static_cast<int>(v), static_cast<int>(u)) = row[u] >= 128 ? 1 : 0;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return mask;
}

void write_mask_bits(const GroundMask& mask, const std::string& path) {
  std::string buf;
  put_le<uint32_t>(buf, static_cast<uint32_t>(mask.rows()));
  put_le<uint32_t>(buf, static_cast<uint32_t>(mask.cols()));
  uint8_t acc = 0;
  int nbits = 0;
  for (size_t i = 0; i < mask.size(); ++i) {
    acc = static_cast<uint8_t>((acc << 1) | (mask[i] ? 1 : 0));
    if (++nbits == 8) {
      buf.push_back(static_cast<char>(acc));
      acc = 0;
      nbits = 0;
    }
  }
  if (nbits > 0) buf.push_back(static_cast<char>(acc << (8 - nbits)));
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::FormatError, "cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

GroundMask read_mask_bits(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::FormatError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string buf = ss.str();
  need(buf, 0, 8, path);
  uint32_t rows = get_le<uint32_t>(buf, 0);
  uint32_t cols = get_le<uint32_t>(buf, 4);
  size_t nbits = static_cast<size_t>(rows) * cols;
  need(buf, 8, (nbits + 7) / 8, path);
  GroundMask mask(static_cast<int>(rows), static_cast<int>(cols), 0);
  for (size_t i = 0; i < nbits; ++i) {
    uint8_t byte = static_cast<uint8_t>(buf[8 + i / 8]);
    mask[i] = (byte >> (7 - i % 8)) & 1;
  }
  return mask;
}

void write_anchor_csv(const SparseGroundMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::FormatError, "cannot write " + path);
  out << "u,v,z_m\n";
  char buf[64];
  for (int v = 0; v < map.rows(); ++v) {
    for (int u = 0; u < map.cols(); ++u) {
      if (map(v, u) == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%d,%d,%.6f\n", u, v, map(v, u));
      out << buf;
    }
  }
}

}  // namespace tandepth
