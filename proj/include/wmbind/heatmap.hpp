#pragma once

#include <filesystem>
#include <string>

#include "wmbind/matrix.hpp"

namespace wmbind {

enum class Palette {
  grayscale,  // lo -> white, hi -> black
  error,      // 0 -> pale green, nonzero -> red
};

struct HeatmapOptions {
  double lo = 0.0;
  double hi = 1.0;
  bool auto_range = false;  // use the matrix min/max instead of lo/hi
  Palette palette = Palette::grayscale;
  std::string title;
  int cell_px = 10;
};

/// One <rect class="cell"> per matrix entry; matrix row r is drawn as SVG row r,
/// column c as SVG column c (so a step-per-column matrix reads left to right).
std::string svg_heatmap(const Matrix& m, const HeatmapOptions& opts = {});

/// Writes svg_heatmap to `path`; throws std::runtime_error on I/O failure.
void emit_heatmap(const Matrix& m, const std::filesystem::path& path, const HeatmapOptions& opts = {});

}  // namespace wmbind
