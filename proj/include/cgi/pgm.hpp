#pragma once

#include <string>

#include "cgi/grid.hpp"

namespace cgi::pgm {

/// Reads an 8-bit binary (P5) portable graymap.
ByteMap read(const std::string& path);

/// Writes an 8-bit binary (P5) portable graymap in canonical form:
/// "P5\n<width> <height>\n255\n" followed by the raw rows.
void write(const ByteMap& image, const std::string& path);

}  // namespace cgi::pgm
