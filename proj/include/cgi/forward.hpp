#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cgi/grid.hpp"
#include "cgi/patterns.hpp"

namespace cgi {

enum class ObjectMode : uint32_t { transmission = 0, reflectance = 1 };

const char* object_mode_name(ObjectMode mode);
ObjectMode object_mode_from_name(const std::string& name);

/// The scene target: per-pixel transmittance or reflectance in [0,1].
/// The mode is metadata; the bucket arithmetic is identical for both.
struct ObjectMap {
  uint32_t width = 0;
  uint32_t height = 0;
  ObjectMode mode = ObjectMode::transmission;
  std::vector<double> values;

  double at(uint32_t x, uint32_t y) const {
    return values[static_cast<size_t>(y) * width + x];
  }
  void validate() const;

  bool operator==(const ObjectMap&) const = default;
};

/// Optical channel between object and detector: per-frame multiplicative gain
/// (collection efficiency, wall albedo, scattering jitter), additive
/// background light, and detector readout noise. All per-frame draws are
/// keyed by frame index under noise_seed and are independent of the pattern
/// stream.
struct ChannelSpec {
  double gain_mean = 1.0;
  double gain_jitter = 0.0;
  double background_mean = 0.0;
  double background_jitter = 0.0;
  double detector_noise_sigma = 0.0;
  uint64_t noise_seed = 0;

  void validate() const;
  bool is_noiseless() const;

  bool operator==(const ChannelSpec&) const = default;
};

/// Ordered bucket samples, one per pattern index, bound to the scene that
/// produced them via a fingerprint.
struct DetectorTrace {
  std::vector<double> samples;
  std::string fingerprint;
};

/// Noiseless bucket sample: sum over pixels of pattern * object.
double bucket_signal(const SpecklePattern& pattern, const ObjectMap& object);

/// Largest possible noiseless bucket sample (fully lit object); the reference
/// scale for background/noise levels expressed relative to the scene.
double max_bucket_signal(const ObjectMap& object);

/// Applies the channel per frame:
///   sample_k = g_k * bucket_k + b_k + eta_k
/// with g_k = gain_mean * (1 + gain_jitter * xi_k) clamped at 0,
///      b_k = background_mean + background_jitter * zeta_k clamped at 0,
///      eta_k ~ Normal(0, detector_noise_sigma),
/// all draws pure functions of (noise_seed, k).
DetectorTrace simulate_trace(const PatternGridSpec& spec, const ObjectMap& object,
                             const ChannelSpec& channel, uint64_t count);

/// Hash binding a trace to its pattern spec, object, and channel.
std::string scene_fingerprint(const PatternGridSpec& spec, const ObjectMap& object,
                              const ChannelSpec& channel);

/// Hash of the pattern spec alone (pairing check between files).
std::string pattern_spec_fingerprint(const PatternGridSpec& spec);

/// Renders text with the built-in 5x7 font, centered, scaled by the largest
/// integer factor that fits the grid.
ObjectMap make_glyph_object(std::string_view text, uint32_t width, uint32_t height);

/// Loads an 8-bit P5 graymap as an object, values mapped linearly to [0,1].
ObjectMap load_object_image(const std::string& path,
                            ObjectMode mode = ObjectMode::transmission);

/// Writes an object as an 8-bit P5 graymap (values scaled by 255).
void save_object_image(const ObjectMap& object, const std::string& path);

// Trace files: CSV "frame_index,sample_value" plus a JSON sidecar at
// <path>.meta holding the fingerprint and channel parameters.
void save_trace_csv(const DetectorTrace& trace, const ChannelSpec& channel,
                    const PatternGridSpec& spec, const std::string& path);

/// Loads a trace CSV and its sidecar. When pattern_fp is given it receives
/// the sidecar's pattern-spec fingerprint for pairing checks.
DetectorTrace load_trace_csv(const std::string& path, std::string* pattern_fp = nullptr);

}  // namespace cgi
