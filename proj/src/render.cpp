#include "novikov/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "novikov/areas.hpp"
#include "novikov/errors.hpp"

namespace novikov {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull ^ (seed * 1099511628211ull + 0x9e3779b97f4a7c15ull);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

Rgb hsv_to_rgb(double hue, double sat, double val) {
  const double c = val * sat;
  const double hp = hue / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = val - c;
  auto u8 = [&](double v) { return static_cast<unsigned char>(std::lround(255.0 * (v + m))); };
  return {u8(r), u8(g), u8(b)};
}

std::string label_text(const AreaRow& row) {
  if (row.is_null) return "null";
  std::ostringstream os;
  os << row.label.x << "," << row.label.y << "," << row.label.z;
  return os.str();
}

}  // namespace

Rgb label_color(const ZoneLabel& label, std::uint64_t palette_seed) {
  if (label.kind == ZoneLabel::Kind::Null) return {255, 255, 255};
  if (label.kind == ZoneLabel::Kind::Unresolved) return {0, 0, 0};
  std::int64_t v[3] = {label.zone.x, label.zone.y, label.zone.z};
  const std::uint64_t h = fnv1a(v, sizeof v, palette_seed);
  const double hue = static_cast<double>(h % 3600) / 10.0;
  const double sat = 0.50 + static_cast<double>((h >> 17) & 0xFF) / 255.0 * 0.40;
  const double val = 0.68 + static_cast<double>((h >> 29) & 0xFF) / 255.0 * 0.30;
  return hsv_to_rgb(hue, sat, val);
}

void render_svg(const ScanResult& scan, const std::string& path, std::uint64_t palette_seed,
                int legend_entries) {
  const std::int64_t N = scan.header.N;
  const double plot = 760.0, margin = 40.0, legend_w = 240.0;
  const double width = margin * 2 + plot + legend_w;
  const double height = margin * 2 + plot;
  const double cell = plot / static_cast<double>(N + 1);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#f4f4f4\"/>\n";

  auto px = [&](double m) { return margin + (m + 0.5) * cell; };
  auto py = [&](double n) { return margin + plot - (n + 0.5) * cell; };

  for (const auto& rec : scan.records) {
    const Rgb c = label_color(rec.label, palette_seed);
    const double x = px(static_cast<double>(rec.m)) - cell * 0.5;
    const double y = py(static_cast<double>(rec.n)) - cell * 0.5;
    char color[8];
    std::snprintf(color, sizeof color, "#%02x%02x%02x", c.r, c.g, c.b);
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
        << "\" fill=\"" << color << "\"/>\n";
  }

  // Legend: top zones by area.
  const AreaTable table = zone_areas(scan);
  double ly = margin + 10.0;
  const double lx = margin + plot + 30.0;
  out << "<text x=\"" << lx << "\" y=\"" << ly
      << "\" font-family=\"monospace\" font-size=\"14\">zones by area</text>\n";
  ly += 22.0;
  int shown = 0;
  for (const auto& row : table.rows) {
    if (shown >= legend_entries) break;
    Rgb c = row.is_null ? Rgb{255, 255, 255}
                        : label_color(ZoneLabel::make_zone(row.label), palette_seed);
    char color[8];
    std::snprintf(color, sizeof color, "#%02x%02x%02x", c.r, c.g, c.b);
    out << "<rect x=\"" << lx << "\" y=\"" << ly - 11 << "\" width=\"14\" height=\"14\" fill=\""
        << color << "\" stroke=\"#888\"/>\n";
    char area[32];
    std::snprintf(area, sizeof area, "%.4f", row.area);
    out << "<text x=\"" << lx + 22 << "\" y=\"" << ly
        << "\" font-family=\"monospace\" font-size=\"13\">(" << label_text(row) << ") " << area
        << "</text>\n";
    ly += 20.0;
    ++shown;
  }
  out << "</svg>\n";
  if (!out) throw Error("write failure on '" + path + "'");
}

void render_ppm(const ScanResult& scan, const std::string& path, int size,
                std::uint64_t palette_seed) {
  const std::int64_t N = scan.header.N;
  auto cell_index = [&](std::int64_t m, std::int64_t n) -> std::int64_t {
    const std::int64_t base = m * (N + 1) - m * (m - 1) / 2;
    return base + (n - m);
  };

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "P6\n" << size << " " << size << "\n255\n";

  std::string row(static_cast<std::size_t>(size) * 3, '\0');
  for (int j = 0; j < size; ++j) {
    const double y = 1.0 - (j + 0.5) / size;  // n/N, top of image = 1
    for (int i = 0; i < size; ++i) {
      const double x = (i + 0.5) / size;  // m/N
      Rgb c{230, 230, 230};
      if (x <= y) {
        auto m = static_cast<std::int64_t>(std::llround(x * static_cast<double>(N)));
        auto n = static_cast<std::int64_t>(std::llround(y * static_cast<double>(N)));
        m = std::clamp<std::int64_t>(m, 0, N);
        n = std::clamp<std::int64_t>(n, 0, N);
        if (m > n) std::swap(m, n);
        c = label_color(scan.records[static_cast<std::size_t>(cell_index(m, n))].label,
                        palette_seed);
      }
      row[static_cast<std::size_t>(i) * 3 + 0] = static_cast<char>(c.r);
      row[static_cast<std::size_t>(i) * 3 + 1] = static_cast<char>(c.g);
      row[static_cast<std::size_t>(i) * 3 + 2] = static_cast<char>(c.b);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error("write failure on '" + path + "'");
}

}  // namespace novikov
