#include "cgi/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "cgi/pgm.hpp"
#include "cgi/rng.hpp"

namespace cgi {

namespace {

// FNV-1a over a canonical byte serialization of the scene parameters.
struct Fnv64 {
  uint64_t state = 0xcbf29ce484222325ULL;

  void feed(const void* data, size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      state ^= bytes[i];
      state *= 0x100000001b3ULL;
    }
  }
  void feed_u32(uint32_t v) { feed(&v, 4); }
  void feed_u64(uint64_t v) { feed(&v, 8); }
  void feed_f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    feed_u64(bits);
  }
  void feed_tag(const char* tag) { feed(tag, std::strlen(tag)); }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[15 - i] = digits[(state >> (4 * i)) & 0xf];
    return out;
  }
};

void feed_pattern_spec(Fnv64& h, const PatternGridSpec& spec) {
  h.feed_tag("pattern");
  h.feed_u32(spec.width);
  h.feed_u32(spec.height);
  h.feed_f64(spec.fill_ratio);
  h.feed_u64(spec.seed);
  h.feed_u32(static_cast<uint32_t>(spec.fill_mode));
}

}  // namespace

const char* object_mode_name(ObjectMode mode) {
  return mode == ObjectMode::transmission ? "transmission" : "reflectance";
}

ObjectMode object_mode_from_name(const std::string& name) {
  if (name == "transmission") return ObjectMode::transmission;
  if (name == "reflectance") return ObjectMode::reflectance;
  throw ConfigError("unknown object mode '" + name + "' (expected transmission or reflectance)");
}

void ObjectMap::validate() const {
  if (width < 1 || height < 1) throw ConfigError("object map must be at least 1x1");
  if (values.size() != static_cast<size_t>(width) * height) {
    throw ConfigError("object map value count does not match its dimensions");
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("object values must lie in [0,1], got " + std::to_string(v));
    }
  }
}

void ChannelSpec::validate() const {
  if (!(gain_mean >= 0.0)) throw ConfigError("gain_mean must be >= 0");
  if (!(gain_jitter >= 0.0)) throw ConfigError("gain_jitter must be >= 0");
  if (!(background_mean >= 0.0)) throw ConfigError("background_mean must be >= 0");
  if (!(background_jitter >= 0.0)) throw ConfigError("background_jitter must be >= 0");
  if (!(detector_noise_sigma >= 0.0)) throw ConfigError("detector_noise_sigma must be >= 0");
}

bool ChannelSpec::is_noiseless() const {
  return gain_jitter == 0.0 && background_jitter == 0.0 && detector_noise_sigma == 0.0;
}

double bucket_signal(const SpecklePattern& pattern, const ObjectMap& object) {
  require_same_shape(pattern.width, pattern.height, object.width, object.height,
                     "bucket_signal");
  double sum = 0.0;
  const size_t n = pattern.pixels.size();
  for (size_t i = 0; i < n; ++i) {
    if (pattern.pixels[i]) sum += object.values[i];
  }
  return sum;
}

double max_bucket_signal(const ObjectMap& object) {
  double sum = 0.0;
  for (double v : object.values) sum += v;
  return sum;
}

DetectorTrace simulate_trace(const PatternGridSpec& spec, const ObjectMap& object,
                             const ChannelSpec& channel, uint64_t count) {
  spec.validate();
  object.validate();
  channel.validate();
  if (count < 1) throw ConfigError("simulate_trace needs count >= 1");
  require_same_shape(spec.width, spec.height, object.width, object.height, "simulate_trace");

  DetectorTrace trace;
  trace.fingerprint = scene_fingerprint(spec, object, channel);
  trace.samples.resize(count);

  for (uint64_t k = 0; k < count; ++k) {
    const SpecklePattern pattern = generate_pattern(spec, k);
    const double bucket = bucket_signal(pattern, object);

    double gain = channel.gain_mean;
    if (channel.gain_jitter > 0.0) {
      gain *= 1.0 + channel.gain_jitter * rng::normal_at(channel.noise_seed, rng::kDomainGain, k);
      gain = std::max(0.0, gain);
    }
    double background = channel.background_mean;
    if (channel.background_jitter > 0.0) {
      background += channel.background_jitter *
                    rng::normal_at(channel.noise_seed, rng::kDomainBackground, k);
      background = std::max(0.0, background);
    }
    double readout = 0.0;
    if (channel.detector_noise_sigma > 0.0) {
      readout = channel.detector_noise_sigma *
                rng::normal_at(channel.noise_seed, rng::kDomainDetector, k);
    }
    trace.samples[k] = gain * bucket + background + readout;
  }
  return trace;
}

std::string scene_fingerprint(const PatternGridSpec& spec, const ObjectMap& object,
                              const ChannelSpec& channel) {
  Fnv64 h;
  feed_pattern_spec(h, spec);
  h.feed_tag("object");
  h.feed_u32(object.width);
  h.feed_u32(object.height);
  h.feed_u32(static_cast<uint32_t>(object.mode));
  for (double v : object.values) h.feed_f64(v);
  h.feed_tag("channel");
  h.feed_f64(channel.gain_mean);
  h.feed_f64(channel.gain_jitter);
  h.feed_f64(channel.background_mean);
  h.feed_f64(channel.background_jitter);
  h.feed_f64(channel.detector_noise_sigma);
  h.feed_u64(channel.noise_seed);
  return h.hex();
}

std::string pattern_spec_fingerprint(const PatternGridSpec& spec) {
  Fnv64 h;
  feed_pattern_spec(h, spec);
  return h.hex();
}

ObjectMap load_object_image(const std::string& path, ObjectMode mode) {
  const ByteMap image = pgm::read(path);
  ObjectMap object;
  object.width = image.width;
  object.height = image.height;
  object.mode = mode;
  object.values.resize(image.count());
  for (size_t i = 0; i < image.count(); ++i) {
    object.values[i] = static_cast<double>(image.values[i]) / 255.0;
  }
  return object;
}

void save_object_image(const ObjectMap& object, const std::string& path) {
  object.validate();
  ByteMap image(object.width, object.height);
  for (size_t i = 0; i < image.count(); ++i) {
    image.values[i] = static_cast<uint8_t>(std::lround(object.values[i] * 255.0));
  }
  pgm::write(image, path);
}

}  // namespace cgi
