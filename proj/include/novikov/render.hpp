#ifndef NOVIKOV_RENDER_HPP
#define NOVIKOV_RENDER_HPP

#include <cstdint>
#include <string>

#include "novikov/scan.hpp"

namespace novikov {

// Zone-map renders of the (m/N, n/N) triangle. Cells are colored by a
// deterministic hash of the canonical label so colors match across N;
// Null is white and Unresolved black. The SVG carries a legend of the
// top zones by area.
void render_svg(const ScanResult& scan, const std::string& path, std::uint64_t palette_seed = 0,
                int legend_entries = 20);

// Binary PPM (P6) raster of the same map.
void render_ppm(const ScanResult& scan, const std::string& path, int size = 800,
                std::uint64_t palette_seed = 0);

struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
};

Rgb label_color(const ZoneLabel& label, std::uint64_t palette_seed);

}  // namespace novikov

#endif
