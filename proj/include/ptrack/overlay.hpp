#pragma once

#include <filesystem>

#include "ptrack/io.hpp"

namespace ptrack {

/// Renders one PPM image per frame with skeleton edges, joint dots and
/// track-id labels, colored per identity. Meant for quick figures, not
/// interactive viewing.
void write_overlays(const AnnotationDocument& doc, const std::filesystem::path& out_dir);

}  // namespace ptrack
