#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cgi/errors.hpp"

namespace cgi {

enum class FillMode : uint32_t { bernoulli = 0, exact_count = 1 };

const char* fill_mode_name(FillMode mode);
FillMode fill_mode_from_name(const std::string& name);

/// Parameters that fully determine a speckle pattern stream.
struct PatternGridSpec {
  uint32_t width = 0;
  uint32_t height = 0;
  double fill_ratio = 0.5;
  uint64_t seed = 0;
  FillMode fill_mode = FillMode::exact_count;

  size_t pixel_count() const { return static_cast<size_t>(width) * height; }

  /// White pixels per frame in exact_count mode: round(fill_ratio * W * H).
  uint32_t white_count() const;

  void validate() const;

  bool operator==(const PatternGridSpec&) const = default;
};

/// One binary illumination frame. Pixels are 0 or 1, row-major from the
/// top-left corner.
struct SpecklePattern {
  uint64_t index = 0;
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint8_t> pixels;

  uint8_t at(uint32_t x, uint32_t y) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  size_t white_count() const;
};

/// Deterministic random-access frame generation: the result depends only on
/// (spec, index), never on previously generated frames.
SpecklePattern generate_pattern(const PatternGridSpec& spec, uint64_t index);

/// Lazy view of frames 0..count-1; frames are generated on access.
class PatternStream {
public:
  PatternStream(const PatternGridSpec& spec, uint64_t count);

  const PatternGridSpec& spec() const { return spec_; }
  uint64_t count() const { return count_; }
  SpecklePattern at(uint64_t index) const;

private:
  PatternGridSpec spec_;
  uint64_t count_;
};

PatternStream pattern_stream(const PatternGridSpec& spec, uint64_t count);

// ---------------------------------------------------------------------------
// Pattern file format (little-endian):
//   magic "CGIPATRN" | u32 version=1 | u32 width | u32 height | u32 fill_mode
//   | f64 fill_ratio | u64 seed | u64 frame_count | u32 name_len | name bytes
// followed by frame_count frames of ceil(W*H/8) bytes each, pixels packed
// row-major, MSB first, each frame padded to a byte boundary.
// ---------------------------------------------------------------------------

void save_patterns(const PatternGridSpec& spec, uint64_t count, const std::string& path);

/// Streaming reader over a saved pattern file.
class PatternFileReader {
public:
  explicit PatternFileReader(const std::string& path);

  const PatternGridSpec& spec() const { return spec_; }
  const std::string& generator() const { return generator_; }
  uint64_t count() const { return count_; }

  /// Reads the next frame; returns false once all frames were consumed.
  /// Throws IoError on a truncated frame, naming the frame index.
  bool next(SpecklePattern& out);

private:
  std::ifstream in_;
  std::string path_;
  PatternGridSpec spec_;
  std::string generator_;
  uint64_t count_ = 0;
  uint64_t next_index_ = 0;
  size_t frame_bytes_ = 0;
};

struct LoadedPatterns {
  PatternGridSpec spec;
  std::string generator;
  std::vector<SpecklePattern> frames;
};

LoadedPatterns load_patterns(const std::string& path);

}  // namespace cgi
