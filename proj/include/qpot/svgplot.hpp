// Self-contained SVG rendering of field dumps: a polyline for single-slice
// fields, a heatmap for space-time fields. No external renderer needed.

#pragma once

#include <string>

#include "qpot/io.hpp"

namespace qpot {

/// Renders a loaded CSV dump. Complex dumps are plotted as magnitude.
/// Heatmaps larger than 256 cells per axis are mean-pooled down; the color
/// ramp is linear blue -> white -> red over [min, max] (see README).
std::string render_svg(const CsvField& data);

}  // namespace qpot
