#include <cstdio>
#include <fstream>
#include <sstream>

#include "cgi/forward.hpp"

#include <json.hpp>

namespace cgi {

namespace {

std::string format_sample(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_trace_csv(const DetectorTrace& trace, const ChannelSpec& channel,
                    const PatternGridSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "frame_index,sample_value\n";
  for (size_t k = 0; k < trace.samples.size(); ++k) {
    out << k << "," << format_sample(trace.samples[k]) << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");

  nlohmann::json meta;
  meta["format"] = "cgisim-trace-v1";
  meta["frames"] = trace.samples.size();
  meta["fingerprint"] = trace.fingerprint;
  meta["pattern_spec"] = pattern_spec_fingerprint(spec);
  meta["channel"] = {{"gain_mean", channel.gain_mean},
                     {"gain_jitter", channel.gain_jitter},
                     {"background_mean", channel.background_mean},
                     {"background_jitter", channel.background_jitter},
                     {"detector_noise_sigma", channel.detector_noise_sigma},
                     {"noise_seed", channel.noise_seed}};
  std::ofstream side(path + ".meta", std::ios::trunc);
  if (!side) throw IoError("cannot open '" + path + ".meta' for writing");
  side << meta.dump(2) << "\n";
  if (!side) throw IoError("write failure on '" + path + ".meta'");
}

DetectorTrace load_trace_csv(const std::string& path, std::string* pattern_fp) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file '" + path + "'");

  std::string line;
  if (!std::getline(in, line) || line != "frame_index,sample_value") {
    throw IoError("'" + path + "': missing trace CSV header");
  }
  DetectorTrace trace;
  size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError("'" + path + "': malformed row " + std::to_string(expected));
    }
    size_t idx_end = 0, val_end = 0;
    unsigned long long idx = 0;
    double value = 0;
    try {
      idx = std::stoull(line.substr(0, comma), &idx_end);
      value = std::stod(line.substr(comma + 1), &val_end);
    } catch (const std::exception&) {
      throw IoError("'" + path + "': malformed row " + std::to_string(expected));
    }
    if (idx != expected) {
      throw IoError("'" + path + "': frame indices must be consecutive, expected " +
                    std::to_string(expected) + " got " + std::to_string(idx));
    }
    trace.samples.push_back(value);
    ++expected;
  }
  if (trace.samples.empty()) throw IoError("'" + path + "': trace has no samples");

  std::ifstream side(path + ".meta");
  if (!side) throw IoError("missing trace sidecar '" + path + ".meta'");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path + ".meta': invalid JSON (" + e.what() + ")");
  }
  if (meta.value("format", "") != "cgisim-trace-v1") {
    throw IoError("'" + path + ".meta': unsupported trace format");
  }
  if (meta.value("frames", size_t{0}) != trace.samples.size()) {
    throw IoError("'" + path + "': sample count disagrees with sidecar frame count");
  }
  trace.fingerprint = meta.value("fingerprint", "");
  if (pattern_fp != nullptr) *pattern_fp = meta.value("pattern_spec", "");
  return trace;
}

}  // namespace cgi
