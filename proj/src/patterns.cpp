#include "cgi/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "binio.hpp"
#include "cgi/rng.hpp"

namespace cgi {

using namespace binio;

namespace {

constexpr char kMagic[8] = {'C', 'G', 'I', 'P', 'A', 'T', 'R', 'N'};
constexpr uint32_t kFormatVersion = 1;

size_t frame_byte_count(const PatternGridSpec& spec) {
  return (spec.pixel_count() + 7) / 8;
}

void pack_frame(const SpecklePattern& frame, std::vector<uint8_t>& bytes) {
  std::fill(bytes.begin(), bytes.end(), 0);
  for (size_t i = 0; i < frame.pixels.size(); ++i) {
    if (frame.pixels[i]) bytes[i >> 3] |= static_cast<uint8_t>(0x80u >> (i & 7));
  }
}

void unpack_frame(const std::vector<uint8_t>& bytes, SpecklePattern& frame) {
  for (size_t i = 0; i < frame.pixels.size(); ++i) {
    frame.pixels[i] = (bytes[i >> 3] >> (7 - (i & 7))) & 1u;
  }
}

}  // namespace

const char* fill_mode_name(FillMode mode) {
  return mode == FillMode::bernoulli ? "bernoulli" : "exact_count";
}

FillMode fill_mode_from_name(const std::string& name) {
  if (name == "bernoulli") return FillMode::bernoulli;
  if (name == "exact_count") return FillMode::exact_count;
  throw ConfigError("unknown fill mode '" + name + "' (expected bernoulli or exact_count)");
}

uint32_t PatternGridSpec::white_count() const {
  return static_cast<uint32_t>(std::lround(fill_ratio * static_cast<double>(pixel_count())));
}

void PatternGridSpec::validate() const {
  if (width < 1 || height < 1) {
    throw ConfigError("pattern grid must be at least 1x1, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  if (!(fill_ratio >= 0.0 && fill_ratio <= 1.0)) {
    throw ConfigError("fill_ratio must lie in [0,1], got " + std::to_string(fill_ratio));
  }
}

size_t SpecklePattern::white_count() const {
  size_t n = 0;
  for (uint8_t p : pixels) n += p;
  return n;
}

SpecklePattern generate_pattern(const PatternGridSpec& spec, uint64_t index) {
  spec.validate();
  SpecklePattern frame;
  frame.index = index;
  frame.width = spec.width;
  frame.height = spec.height;
  const size_t n = spec.pixel_count();
  frame.pixels.assign(n, 0);

  if (spec.fill_mode == FillMode::bernoulli) {
    for (size_t c = 0; c < n; ++c) {
      const double u = rng::to_unit(rng::word_at(spec.seed, rng::kDomainBernoulli, index, c));
      frame.pixels[c] = u < spec.fill_ratio ? 1 : 0;
    }
    return frame;
  }

  // exact_count: partial Fisher-Yates over the cell indices; the first k
  // slots of the permutation become the white pixels.
  const size_t k = spec.white_count();
  std::vector<uint32_t> cells(n);
  std::iota(cells.begin(), cells.end(), 0u);
  for (size_t i = 0; i < k; ++i) {
    const uint64_t w = rng::word_at(spec.seed, rng::kDomainShuffle, index, i);
    const size_t j = i + static_cast<size_t>(w % (n - i));
    std::swap(cells[i], cells[j]);
    frame.pixels[cells[i]] = 1;
  }
  return frame;
}

PatternStream::PatternStream(const PatternGridSpec& spec, uint64_t count)
    : spec_(spec), count_(count) {
  spec_.validate();
  if (count < 1) throw ConfigError("pattern stream needs count >= 1");
}

SpecklePattern PatternStream::at(uint64_t index) const {
  if (index >= count_) {
    throw ConfigError("pattern index " + std::to_string(index) + " out of range (count " +
                      std::to_string(count_) + ")");
  }
  return generate_pattern(spec_, index);
}

PatternStream pattern_stream(const PatternGridSpec& spec, uint64_t count) {
  return PatternStream(spec, count);
}

void save_patterns(const PatternGridSpec& spec, uint64_t count, const std::string& path) {
  spec.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  put_bytes(out, kMagic, sizeof(kMagic));
  put_u32(out, kFormatVersion);
  put_u32(out, spec.width);
  put_u32(out, spec.height);
  put_u32(out, static_cast<uint32_t>(spec.fill_mode));
  put_f64(out, spec.fill_ratio);
  put_u64(out, spec.seed);
  put_u64(out, count);
  const std::string name = rng::kGeneratorName;
  put_u32(out, static_cast<uint32_t>(name.size()));
  put_bytes(out, name.data(), name.size());

  std::vector<uint8_t> packed(frame_byte_count(spec));
  for (uint64_t i = 0; i < count; ++i) {
    const SpecklePattern frame = generate_pattern(spec, i);
    pack_frame(frame, packed);
    put_bytes(out, packed.data(), packed.size());
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

PatternFileReader::PatternFileReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw IoError("cannot open pattern file '" + path + "'");

  char magic[8];
  if (!get_bytes(in_, magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw IoError("'" + path + "' is not a cgisim pattern file (bad magic)");
  }
  uint32_t version = 0, mode = 0;
  if (!get_u32(in_, version) || !get_u32(in_, spec_.width) || !get_u32(in_, spec_.height) ||
      !get_u32(in_, mode) || !get_f64(in_, spec_.fill_ratio) || !get_u64(in_, spec_.seed) ||
      !get_u64(in_, count_)) {
    throw IoError("'" + path + "': truncated pattern file header");
  }
  if (version != kFormatVersion) {
    throw IoError("'" + path + "': unsupported pattern file version " + std::to_string(version));
  }
  if (mode > 1) throw IoError("'" + path + "': corrupt fill_mode field");
  spec_.fill_mode = static_cast<FillMode>(mode);
  if (spec_.width < 1 || spec_.height < 1 || spec_.pixel_count() > (1u << 30)) {
    throw IoError("'" + path + "': corrupt dimension header (" + std::to_string(spec_.width) +
                  "x" + std::to_string(spec_.height) + ")");
  }
  if (!(spec_.fill_ratio >= 0.0 && spec_.fill_ratio <= 1.0)) {
    throw IoError("'" + path + "': corrupt fill_ratio field");
  }
  uint32_t name_len = 0;
  if (!get_u32(in_, name_len) || name_len > 256) {
    throw IoError("'" + path + "': corrupt generator name field");
  }
  generator_.resize(name_len);
  if (name_len > 0 && !get_bytes(in_, generator_.data(), name_len)) {
    throw IoError("'" + path + "': truncated pattern file header");
  }
  frame_bytes_ = frame_byte_count(spec_);
}

bool PatternFileReader::next(SpecklePattern& out) {
  if (next_index_ >= count_) return false;
  std::vector<uint8_t> packed(frame_bytes_);
  if (!get_bytes(in_, packed.data(), packed.size())) {
    throw IoError("'" + path_ + "': truncated mid-frame at frame " +
                  std::to_string(next_index_));
  }
  out.index = next_index_++;
  out.width = spec_.width;
  out.height = spec_.height;
  out.pixels.resize(spec_.pixel_count());
  unpack_frame(packed, out);
  return true;
}

LoadedPatterns load_patterns(const std::string& path) {
  PatternFileReader reader(path);
  LoadedPatterns result;
  result.spec = reader.spec();
  result.generator = reader.generator();
  result.frames.reserve(reader.count());
  SpecklePattern frame;
  while (reader.next(frame)) result.frames.push_back(frame);
  return result;
}

}  // namespace cgi
