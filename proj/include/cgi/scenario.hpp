#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cgi/forward.hpp"
#include "cgi/metrics.hpp"
#include "cgi/patterns.hpp"

namespace cgi {

/// The five named experiment geometries. They share one reconstruction path
/// and differ only in the default channel and frame count.
enum class ScenarioId : uint32_t {
  direct = 0,         ///< projector -> object -> detector
  scatter = 1,        ///< ground glass between object and detector
  corner = 2,         ///< object light seen only via the wall, baffle in place
  corner_scatter = 3, ///< corner geometry plus rotating ground glass
  corner_diffuse = 4, ///< diffuse reflective target, strong ambient light
};

const char* scenario_id_name(ScenarioId id);
ScenarioId scenario_id_from_name(const std::string& name);

/// Partial channel overrides; *_rel knobs are relative to the scene's
/// max bucket signal and are resolved against the object at run time.
struct ChannelOverrides {
  std::optional<double> gain_mean;
  std::optional<double> gain_jitter;
  std::optional<double> background_mean;
  std::optional<double> background_rel;
  std::optional<double> background_jitter;
  std::optional<double> detector_noise_sigma;
  std::optional<double> detector_noise_rel;

  bool operator==(const ChannelOverrides&) const = default;
};

struct VariantConfig {
  std::string label = "variant";
  ChannelOverrides channel;

  bool operator==(const VariantConfig&) const = default;
};

/// One scenario per config file. Serialized form is the documented key=value
/// text with [sections]; parse(serialize(c)) == c.
struct ScenarioConfig {
  ScenarioId id = ScenarioId::direct;
  PatternGridSpec pattern{40, 40, 0.11, 1, FillMode::exact_count};

  std::string glyph = "XJTU";    ///< object source A: built-in font text
  std::string image_path;        ///< object source B: P5 graymap (exclusive)
  std::optional<ObjectMode> object_mode;  ///< default depends on the scenario

  ChannelOverrides channel;
  uint64_t noise_seed = 2;

  std::optional<uint64_t> frames;  ///< default depends on the scenario
  std::string out_dir = "out";
  double mask_threshold = 0.5;
  bool snr_on_g2 = false;

  std::optional<VariantConfig> variant;  ///< second channel for converge

  bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);

/// FNV-1a of the serialized config, recorded in manifests.
std::string config_hash(const ScenarioConfig& config);

/// Config with defaults applied, ready to run.
struct ResolvedScenario {
  ScenarioId id;
  PatternGridSpec pattern;
  ObjectMap object;
  ChannelSpec channel;
  uint64_t frames = 0;
  double mask_threshold = 0.5;
  bool snr_on_g2 = false;
  std::optional<std::pair<std::string, ChannelSpec>> variant;
};

/// Applies the per-scenario default table (channel + frame count), loads or
/// rasterizes the object, and resolves *_rel overrides against the object.
ResolvedScenario resolve_scenario(const ScenarioConfig& config);

/// Default frame count for a scenario (used when the config omits frames).
uint64_t default_frame_count(ScenarioId id);

/// Default channel for a scenario given the scene's max bucket signal.
ChannelSpec default_channel(ScenarioId id, double max_signal);

struct RunResult {
  std::string out_dir;
  uint64_t frames = 0;
  std::string fingerprint;
  SnrReport snr;
  double fidelity_fluct = 0.0;
  size_t undefined_g2_pixels = 0;
};

/// Full pipeline: patterns -> forward -> reconstruct -> metrics. Writes
/// trace.csv(+.meta), g2.csv/fluct.csv, g2.pgm/fluct.pgm, snr.txt/snr.csv,
/// object.pgm, config.cfg and manifest.json into the output directory.
/// Reruns with identical config are byte-identical.
RunResult run_scenario(const ScenarioConfig& config);

struct ConvergenceResult {
  std::vector<ConvergenceCurve> curves;  ///< base curve, then the variant
  std::string csv_path;
};

/// Fig.-6-style harness: SNR-vs-frame-count curves, paired when the config
/// declares a [variant] channel. Writes <out>/convergence.csv.
ConvergenceResult run_convergence(const ScenarioConfig& config,
                                  const std::vector<uint64_t>& n_grid,
                                  const std::vector<uint64_t>& seeds, unsigned threads = 1);

/// Reruns the scenario at integer multiples of the grid resolution; glyph
/// objects are re-rasterized, image objects must already match the scaled
/// grid. Writes one bundle per scale plus resolution_report.csv.
std::vector<RunResult> resolution_sweep(const ScenarioConfig& config,
                                        const std::vector<uint32_t>& scales);

}  // namespace cgi
