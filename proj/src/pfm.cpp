#include "tandepth/pfm.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tandepth/error.hpp"

namespace tandepth {

namespace {

bool host_little_endian() {
  uint16_t probe = 1;
  uint8_t b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}

float byteswap(float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  u = __builtin_bswap32(u);
  std::memcpy(&v, &u, 4);
  return v;
}

// Single whitespace-delimited token, skipping PFM '#'-less simple headers.
std::string next_token(std::istream& in) {
  std::string tok;
  in >> tok;
  return tok;
}

}  // namespace

Raster<float> read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::FormatError, "cannot open " + path);

  std::string magic = next_token(in);
  if (magic != "Pf") {
    if (magic == "PF") raise(Errc::FormatError, path + ": color PFM unsupported, expected Pf");
    raise(Errc::FormatError, path + ": bad magic '" + magic + "'");
  }
  long cols = 0, rows = 0;
  double scale = 0;
  try {
    cols = std::stol(next_token(in));
    rows = std::stol(next_token(in));
    scale = std::stod(next_token(in));
  } catch (const std::exception&) {
    raise(Errc::FormatError, path + ": malformed header");
  }
  if (cols <= 0 || rows <= 0 || cols > 1 << 20 || rows > 1 << 20 || scale == 0.0)
    raise(Errc::FormatError, path + ": bad dimensions or scale");
  in.get();  // single whitespace after the scale line

  Raster<float> raster(static_cast<int>(rows), static_cast<int>(cols));
  bool file_le = scale < 0.0;
  bool swap = file_le != host_little_endian();
  // bottom row first
  for (long r = rows - 1; r >= 0; --r) {
    in.read(reinterpret_cast<char*>(&raster(static_cast<int>(r), 0)),
            static_cast<std::streamsize>(cols) * 4);
    if (!in)
      raise(Errc::FormatError,
            path + ": truncated raster at row " + std::to_string(rows - 1 - r));
  }
  if (swap)
    for (size_t i = 0; i < raster.size(); ++i) raster[i] = byteswap(raster[i]);
  return raster;
}

void write_pfm(const Raster<float>& raster, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::FormatError, "cannot write " + path);
  std::ostringstream header;
  header << "Pf\n" << raster.cols() << " " << raster.rows() << "\n";
  header << (host_little_endian() ? "-1.0" : "1.0") << "\n";
  out << header.str();
  for (int r = raster.rows() - 1; r >= 0; --r)
    out.write(reinterpret_cast<const char*>(&raster(r, 0)),
              static_cast<std::streamsize>(raster.cols()) * 4);
  if (!out) raise(Errc::FormatError, "short write to " + path);
}

}  // namespace tandepth
