#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "oneseed/featio.hpp"

namespace oneseed::cli {

/// Runs one command line (argv[0] is the program name). Returns 0 on success,
/// 2 on usage errors and 1 on pipeline errors; messages go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Fixed class palette: the usual driving-scene colours for ids 0..18, a
/// bit-interleaved palette above, black for 255.
std::array<std::uint8_t, 3> palette_color(std::uint8_t label);

/// Binary PPM (P6) of the colour image blended with the label palette;
/// ignored pixels keep the image colour.
void write_overlay(const FeatureMap& color, const LabelMap& labels, double alpha, const std::filesystem::path& path);

}  // namespace oneseed::cli
