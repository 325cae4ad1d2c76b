#pragma once

#include "structmap/geometry/types.hpp"

#include <string>

namespace structmap {

/// ASCII PLY with double-precision x y z vertex properties. The cloud's frame
/// tag is stored as a comment line and restored on read.
void write_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_ply(const std::string& path);

}  // namespace structmap
