#pragma once

#include <string>

#include "tandepth/raster.hpp"

namespace tandepth {

// Grayscale PFM ("Pf"), rows stored bottom-up, scale sign giving byte order
// (written little-endian, scale -1). 0 = no-data. Throws FormatError.
Raster<float> read_pfm(const std::string& path);
void write_pfm(const Raster<float>& raster, const std::string& path);

}  // namespace tandepth
