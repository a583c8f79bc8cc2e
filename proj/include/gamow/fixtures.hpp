#pragma once

#include <cmath>

#include "gamow/raster.hpp"
#include "gamow/star_shape.hpp"

namespace gamow::fixtures {

// Unit squares [-3,-2]x[-0.5,0.5] and [2,3]x[-0.5,0.5] joined by a strip of
// length 4 and thickness 0.05.  The natural cut band is [-1.5, 1.5].
inline RasterSet dumbbell(double pitch = 1.0 / 80) {
  return raster_from_predicate({-3.5, -1}, {3.5, 1}, pitch, [](Vec2 p) {
    const bool sq = std::abs(p.y) < 0.5 && ((p.x > -3 && p.x < -2) || (p.x > 2 && p.x < 3));
    const bool neck = std::abs(p.x) < 2 && std::abs(p.y) < 0.025;
    return sq || neck;
  });
}

inline RasterSet solid_disk(double pitch = 1.0 / 64) { return rasterize(disk(), pitch); }

}  // namespace gamow::fixtures
