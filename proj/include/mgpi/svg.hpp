#pragma once

#include <string>

#include "mgpi/types.hpp"

namespace mgpi {

/// Deterministic SVG of one frame: one circle per agent filled by action,
/// a gaze arrow per agent and an embedded color legend (legend swatches are
/// rects, so the circle count equals the agent count).
std::string render_frame_svg(const Frame& frame);

}  // namespace mgpi
