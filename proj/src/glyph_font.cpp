#include <array>
#include <cctype>

#include "cgi/forward.hpp"

namespace cgi {
namespace detail {

// 5x7 dot-matrix font; one byte per row, bits 4..0 are the columns left to
// right. Covers A-Z, 0-9 and space.
struct Glyph {
  char ch;
  std::array<uint8_t, 7> rows;
};

namespace {

constexpr Glyph kFont[] = {
    {'A', {0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001}},
    {'B', {0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110}},
    {'C', {0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110}},
    {'D', {0b11110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b11110}},
    {'E', {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111}},
    {'F', {0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000}},
    {'G', {0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111}},
    {'H', {0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001}},
    {'I', {0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'J', {0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100}},
    {'K', {0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001}},
    {'L', {0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111}},
    {'M', {0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001}},
    {'N', {0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001}},
    {'O', {0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
    {'P', {0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000}},
    {'Q', {0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101}},
    {'R', {0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001}},
    {'S', {0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110}},
    {'T', {0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100}},
    {'U', {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110}},
    {'V', {0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100}},
    {'W', {0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010}},
    {'X', {0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001}},
    {'Y', {0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100, 0b00100}},
    {'Z', {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111}},
    {'0', {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110}},
    {'1', {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'2', {0b01110, 0b10001, 0b00001, 0b00110, 0b01000, 0b10000, 0b11111}},
    {'3', {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110}},
    {'4', {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010}},
    {'5', {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110}},
    {'6', {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110}},
    {'7', {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000}},
    {'8', {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110}},
    {'9', {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100}},
    {' ', {0, 0, 0, 0, 0, 0, 0}},
};

}  // namespace

const std::array<uint8_t, 7>& glyph_rows(char ch) {
  const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (const Glyph& g : kFont) {
    if (g.ch == upper) return g.rows;
  }
  throw ConfigError(std::string("no glyph for character '") + ch + "'");
}

}  // namespace detail

ObjectMap make_glyph_object(std::string_view text, uint32_t width, uint32_t height) {
  if (text.empty()) throw ConfigError("glyph text must be non-empty");
  if (width < 1 || height < 1) throw ConfigError("glyph grid must be at least 1x1");

  const uint32_t n = static_cast<uint32_t>(text.size());
  const uint32_t text_w = n * 5 + (n - 1);  // one blank column between glyphs
  const uint32_t text_h = 7;

  const uint32_t scale = std::min(width / text_w, height / text_h);
  if (scale < 1) {
    throw ConfigError("text '" + std::string(text) + "' does not fit a " +
                      std::to_string(width) + "x" + std::to_string(height) + " grid (needs " +
                      std::to_string(text_w) + "x" + std::to_string(text_h) + ")");
  }

  ObjectMap object;
  object.width = width;
  object.height = height;
  object.mode = ObjectMode::transmission;
  object.values.assign(static_cast<size_t>(width) * height, 0.0);

  const uint32_t x0 = (width - text_w * scale) / 2;
  const uint32_t y0 = (height - text_h * scale) / 2;

  for (uint32_t c = 0; c < n; ++c) {
    const auto& rows = detail::glyph_rows(text[c]);
    const uint32_t gx = x0 + c * 6 * scale;
    for (uint32_t r = 0; r < 7; ++r) {
      for (uint32_t col = 0; col < 5; ++col) {
        if (!((rows[r] >> (4 - col)) & 1u)) continue;
        for (uint32_t dy = 0; dy < scale; ++dy) {
          for (uint32_t dx = 0; dx < scale; ++dx) {
            const uint32_t x = gx + col * scale + dx;
            const uint32_t y = y0 + r * scale + dy;
            object.values[static_cast<size_t>(y) * width + x] = 1.0;
          }
        }
      }
    }
  }
  return object;
}

}  // namespace cgi
