#include "cgi/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cgi/pgm.hpp"
#include "cgi/reconstruct.hpp"
#include "cgi/version.hpp"

namespace fs = std::filesystem;

namespace cgi {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

uint64_t parse_u64(const std::string& value, const std::string& field) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(field + ": expected a non-negative integer, got '" + value + "'");
  }
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    throw ConfigError(field + ": integer out of range: '" + value + "'");
  }
}

uint32_t parse_u32(const std::string& value, const std::string& field) {
  const uint64_t v = parse_u64(value, field);
  if (v > 0xffffffffULL) throw ConfigError(field + ": value out of range");
  return static_cast<uint32_t>(v);
}

double parse_double(const std::string& value, const std::string& field) {
  try {
    size_t end = 0;
    const double v = std::stod(value, &end);
    if (end != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field + ": expected a number, got '" + value + "'");
  }
}

// Channel override keys shared by [channel] and [variant].
bool apply_channel_key(ChannelOverrides& ch, const std::string& key, const std::string& value,
                       const std::string& field) {
  if (key == "gain_mean") {
    ch.gain_mean = parse_double(value, field);
  } else if (key == "gain_jitter") {
    ch.gain_jitter = parse_double(value, field);
  } else if (key == "background_mean") {
    ch.background_mean = parse_double(value, field);
  } else if (key == "background_rel") {
    ch.background_rel = parse_double(value, field);
  } else if (key == "background_jitter") {
    ch.background_jitter = parse_double(value, field);
  } else if (key == "detector_noise_sigma") {
    ch.detector_noise_sigma = parse_double(value, field);
  } else if (key == "detector_noise_rel") {
    ch.detector_noise_rel = parse_double(value, field);
  } else {
    return false;
  }
  return true;
}

void serialize_channel_overrides(std::ostringstream& out, const ChannelOverrides& ch) {
  if (ch.gain_mean) out << "gain_mean = " << fmt_double(*ch.gain_mean) << "\n";
  if (ch.gain_jitter) out << "gain_jitter = " << fmt_double(*ch.gain_jitter) << "\n";
  if (ch.background_mean) out << "background_mean = " << fmt_double(*ch.background_mean) << "\n";
  if (ch.background_rel) out << "background_rel = " << fmt_double(*ch.background_rel) << "\n";
  if (ch.background_jitter) {
    out << "background_jitter = " << fmt_double(*ch.background_jitter) << "\n";
  }
  if (ch.detector_noise_sigma) {
    out << "detector_noise_sigma = " << fmt_double(*ch.detector_noise_sigma) << "\n";
  }
  if (ch.detector_noise_rel) {
    out << "detector_noise_rel = " << fmt_double(*ch.detector_noise_rel) << "\n";
  }
}

void apply_overrides(ChannelSpec& channel, const ChannelOverrides& ov, double max_signal,
                     const std::string& section) {
  if (ov.background_mean && ov.background_rel) {
    throw ConfigError(section + ".background_mean and " + section +
                      ".background_rel are mutually exclusive");
  }
  if (ov.detector_noise_sigma && ov.detector_noise_rel) {
    throw ConfigError(section + ".detector_noise_sigma and " + section +
                      ".detector_noise_rel are mutually exclusive");
  }
  if (ov.gain_mean) channel.gain_mean = *ov.gain_mean;
  if (ov.gain_jitter) channel.gain_jitter = *ov.gain_jitter;
  if (ov.background_mean) channel.background_mean = *ov.background_mean;
  if (ov.background_rel) channel.background_mean = *ov.background_rel * max_signal;
  if (ov.background_jitter) channel.background_jitter = *ov.background_jitter;
  if (ov.detector_noise_sigma) channel.detector_noise_sigma = *ov.detector_noise_sigma;
  if (ov.detector_noise_rel) channel.detector_noise_sigma = *ov.detector_noise_rel * max_signal;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace

const char* scenario_id_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::direct: return "direct";
    case ScenarioId::scatter: return "scatter";
    case ScenarioId::corner: return "corner";
    case ScenarioId::corner_scatter: return "corner_scatter";
    case ScenarioId::corner_diffuse: return "corner_diffuse";
  }
  throw ConfigError("unknown scenario id");
}

ScenarioId scenario_id_from_name(const std::string& name) {
  if (name == "direct") return ScenarioId::direct;
  if (name == "scatter") return ScenarioId::scatter;
  if (name == "corner") return ScenarioId::corner;
  if (name == "corner_scatter") return ScenarioId::corner_scatter;
  if (name == "corner_diffuse") return ScenarioId::corner_diffuse;
  throw ConfigError("scenario.id: unknown scenario '" + name +
                    "' (direct, scatter, corner, corner_scatter, corner_diffuse)");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig config;
  std::string section;
  bool glyph_explicit = false;

  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "pattern" && section != "object" &&
          section != "channel" && section != "metrics" && section != "variant") {
        throw ConfigError("unknown section [" + section + "]");
      }
      if (section == "variant" && !config.variant) config.variant = VariantConfig{};
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string field = section + "." + key;
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                        "' appears before any [section]");
    }

    if (section == "scenario") {
      if (key == "id") {
        config.id = scenario_id_from_name(value);
      } else if (key == "frames") {
        config.frames = parse_u64(value, field);
      } else if (key == "out") {
        config.out_dir = value;
      } else {
        throw ConfigError("unknown key '" + field + "'");
      }
    } else if (section == "pattern") {
      if (key == "width") {
        config.pattern.width = parse_u32(value, field);
      } else if (key == "height") {
        config.pattern.height = parse_u32(value, field);
      } else if (key == "fill_ratio") {
        config.pattern.fill_ratio = parse_double(value, field);
      } else if (key == "fill_mode") {
        config.pattern.fill_mode = fill_mode_from_name(value);
      } else if (key == "seed") {
        config.pattern.seed = parse_u64(value, field);
      } else {
        throw ConfigError("unknown key '" + field + "'");
      }
    } else if (section == "object") {
      if (key == "glyph") {
        config.glyph = value;
        glyph_explicit = true;
      } else if (key == "image") {
        config.image_path = value;
        if (!glyph_explicit) config.glyph.clear();
      } else if (key == "mode") {
        config.object_mode = object_mode_from_name(value);
      } else {
        throw ConfigError("unknown key '" + field + "'");
      }
    } else if (section == "channel") {
      if (key == "noise_seed") {
        config.noise_seed = parse_u64(value, field);
      } else if (!apply_channel_key(config.channel, key, value, field)) {
        throw ConfigError("unknown key '" + field + "'");
      }
    } else if (section == "metrics") {
      if (key == "mask_threshold") {
        config.mask_threshold = parse_double(value, field);
      } else if (key == "snr_on") {
        if (value == "fluct") {
          config.snr_on_g2 = false;
        } else if (value == "g2") {
          config.snr_on_g2 = true;
        } else {
          throw ConfigError(field + ": expected 'fluct' or 'g2', got '" + value + "'");
        }
      } else {
        throw ConfigError("unknown key '" + field + "'");
      }
    } else {  // variant
      if (key == "label") {
        config.variant->label = value;
      } else if (!apply_channel_key(config.variant->channel, key, value, field)) {
        throw ConfigError("unknown key '" + field + "'");
      }
    }
  }
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const ScenarioConfig& config) {
  std::ostringstream out;
  out << "[scenario]\n";
  out << "id = " << scenario_id_name(config.id) << "\n";
  if (config.frames) out << "frames = " << *config.frames << "\n";
  out << "out = " << config.out_dir << "\n";

  out << "\n[pattern]\n";
  out << "width = " << config.pattern.width << "\n";
  out << "height = " << config.pattern.height << "\n";
  out << "fill_ratio = " << fmt_double(config.pattern.fill_ratio) << "\n";
  out << "fill_mode = " << fill_mode_name(config.pattern.fill_mode) << "\n";
  out << "seed = " << config.pattern.seed << "\n";

  out << "\n[object]\n";
  if (!config.glyph.empty()) out << "glyph = " << config.glyph << "\n";
  if (!config.image_path.empty()) out << "image = " << config.image_path << "\n";
  if (config.object_mode) out << "mode = " << object_mode_name(*config.object_mode) << "\n";

  out << "\n[channel]\n";
  out << "noise_seed = " << config.noise_seed << "\n";
  serialize_channel_overrides(out, config.channel);

  out << "\n[metrics]\n";
  out << "mask_threshold = " << fmt_double(config.mask_threshold) << "\n";
  out << "snr_on = " << (config.snr_on_g2 ? "g2" : "fluct") << "\n";

  if (config.variant) {
    out << "\n[variant]\n";
    out << "label = " << config.variant->label << "\n";
    serialize_channel_overrides(out, config.variant->channel);
  }
  return out.str();
}

std::string config_hash(const ScenarioConfig& config) {
  const std::string text = serialize_config(config);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[15 - i] = digits[(h >> (4 * i)) & 0xf];
  return out;
}

uint64_t default_frame_count(ScenarioId id) {
  return id == ScenarioId::corner_diffuse ? 50000 : 18000;
}

ChannelSpec default_channel(ScenarioId id, double max_signal) {
  ChannelSpec ch;
  switch (id) {
    case ScenarioId::direct:
      ch.gain_mean = 1.0;
      break;
    case ScenarioId::scatter:
      ch.gain_mean = 0.8;
      ch.background_mean = 0.2 * max_signal;
      break;
    case ScenarioId::corner:
      ch.gain_mean = 0.05;
      ch.background_mean = 0.5 * max_signal;
      ch.detector_noise_sigma = 0.01 * max_signal;
      break;
    case ScenarioId::corner_scatter:
      ch.gain_mean = 0.05;
      ch.gain_jitter = 0.2;
      ch.background_mean = 0.5 * max_signal;
      ch.detector_noise_sigma = 0.01 * max_signal;
      break;
    case ScenarioId::corner_diffuse:
      ch.gain_mean = 0.02;
      ch.background_mean = max_signal;
      break;
  }
  return ch;
}

ResolvedScenario resolve_scenario(const ScenarioConfig& config) {
  ResolvedScenario out;
  out.id = config.id;
  out.pattern = config.pattern;
  out.pattern.validate();

  out.frames = config.frames.value_or(default_frame_count(config.id));
  if (out.frames < 1) throw ConfigError("scenario.frames: must be >= 1");

  const bool have_glyph = !config.glyph.empty();
  const bool have_image = !config.image_path.empty();
  if (have_glyph == have_image) {
    throw ConfigError(have_glyph ? "object: glyph and image are mutually exclusive"
                                 : "object: either glyph or image is required");
  }
  if (have_glyph) {
    out.object = make_glyph_object(config.glyph, out.pattern.width, out.pattern.height);
  } else {
    out.object = load_object_image(config.image_path);
    if (out.object.width != out.pattern.width || out.object.height != out.pattern.height) {
      throw ConfigError("object.image: image is " + std::to_string(out.object.width) + "x" +
                        std::to_string(out.object.height) + " but the pattern grid is " +
                        std::to_string(out.pattern.width) + "x" +
                        std::to_string(out.pattern.height) + " (no implicit resampling)");
    }
  }
  out.object.mode = config.object_mode.value_or(config.id == ScenarioId::corner_diffuse
                                                    ? ObjectMode::reflectance
                                                    : ObjectMode::transmission);

  const double max_signal = max_bucket_signal(out.object);
  out.channel = default_channel(config.id, max_signal);
  apply_overrides(out.channel, config.channel, max_signal, "channel");
  out.channel.noise_seed = config.noise_seed;
  out.channel.validate();

  if (config.variant) {
    ChannelSpec variant_channel = default_channel(config.id, max_signal);
    apply_overrides(variant_channel, config.variant->channel, max_signal, "variant");
    variant_channel.noise_seed = config.noise_seed;
    variant_channel.validate();
    out.variant = {config.variant->label, variant_channel};
  }

  if (!(config.mask_threshold > 0.0 && config.mask_threshold < 1.0)) {
    throw ConfigError("metrics.mask_threshold: must lie strictly inside (0,1)");
  }
  out.mask_threshold = config.mask_threshold;
  out.snr_on_g2 = config.snr_on_g2;
  return out;
}

RunResult run_scenario(const ScenarioConfig& config) {
  const ResolvedScenario s = resolve_scenario(config);

  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  const DetectorTrace trace = simulate_trace(s.pattern, s.object, s.channel, s.frames);

  CorrelationAccumulator acc(s.pattern.width, s.pattern.height);
  for (uint64_t k = 0; k < s.frames; ++k) {
    acc.ingest(generate_pattern(s.pattern, k), trace.samples[k]);
  }
  const ReconstructedImage image = finalize_g2(acc, trace.fingerprint);

  save_trace_csv(trace, s.channel, s.pattern, (dir / "trace.csv").string());
  save_pixel_csv(image.g2, (dir / "g2.csv").string());
  save_pixel_csv(image.fluct, (dir / "fluct.csv").string());
  pgm::write(normalize_for_display(image.g2).gray, (dir / "g2.pgm").string());
  pgm::write(normalize_for_display(image.fluct).gray, (dir / "fluct.pgm").string());
  save_object_image(s.object, (dir / "object.pgm").string());

  const RegionMask mask = mask_from_object(s.object, s.mask_threshold);
  const SnrReport snr = compute_snr(s.snr_on_g2 ? image.g2 : image.fluct, mask, s.frames);
  write_text_file(dir / "snr.txt", snr_report_text(snr));
  write_text_file(dir / "snr.csv", snr_report_csv_header() + "\n" + snr_report_csv_row(snr) + "\n");

  const double fid = fidelity(image.fluct, s.object);
  write_text_file(dir / "config.cfg", serialize_config(config));

  nlohmann::json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["fidelity_fluct"] = fid;
  manifest["fingerprint"] = trace.fingerprint;
  manifest["frames"] = s.frames;
  manifest["noise_seed"] = config.noise_seed;
  manifest["pattern_seed"] = s.pattern.seed;
  manifest["scenario"] = scenario_id_name(s.id);
  if (snr.snr_db) {
    manifest["snr_db"] = *snr.snr_db;
  } else {
    manifest["snr_db"] = nullptr;
  }
  manifest["tool"] = kToolName;
  manifest["undefined_g2_pixels"] = image.undefined_pixels;
  manifest["version"] = kToolVersion;
  manifest["outputs"] = {"config.cfg", "fluct.csv", "fluct.pgm",  "g2.csv",  "g2.pgm",
                         "object.pgm", "snr.csv",   "snr.txt",    "trace.csv", "trace.csv.meta"};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  RunResult result;
  result.out_dir = dir.string();
  result.frames = s.frames;
  result.fingerprint = trace.fingerprint;
  result.snr = snr;
  result.fidelity_fluct = fid;
  result.undefined_g2_pixels = image.undefined_pixels;
  return result;
}

ConvergenceResult run_convergence(const ScenarioConfig& config,
                                  const std::vector<uint64_t>& n_grid,
                                  const std::vector<uint64_t>& seeds, unsigned threads) {
  const ResolvedScenario s = resolve_scenario(config);
  const RegionMask mask = mask_from_object(s.object, s.mask_threshold);

  ConvergenceOptions options;
  options.snr_on_g2 = s.snr_on_g2;
  options.threads = threads;
  options.scenario_id = scenario_id_name(s.id);

  ConvergenceResult result;
  result.curves.push_back(
      convergence_curve(s.pattern, s.object, s.channel, mask, n_grid, seeds, options));
  if (s.variant) {
    options.scenario_id = s.variant->first;
    result.curves.push_back(
        convergence_curve(s.pattern, s.object, s.variant->second, mask, n_grid, seeds, options));
  }

  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path csv = dir / "convergence.csv";

  if (result.curves.size() == 1) {
    save_convergence_csv(result.curves[0], csv.string());
  } else {
    const auto& a = result.curves[0];
    const auto& b = result.curves[1];
    std::ostringstream out;
    out << "n_frames,mean_snr_db_" << a.scenario_id << ",std_snr_db_" << a.scenario_id
        << ",mean_snr_db_" << b.scenario_id << ",std_snr_db_" << b.scenario_id << ",n_seeds\n";
    char buf[40];
    for (size_t i = 0; i < a.points.size(); ++i) {
      out << a.points[i].n_frames;
      std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", a.points[i].mean_snr_db,
                    a.points[i].std_snr_db);
      out << buf;
      std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", b.points[i].mean_snr_db,
                    b.points[i].std_snr_db);
      out << buf << "," << seeds.size() << "\n";
    }
    write_text_file(csv, out.str());
  }
  result.csv_path = csv.string();
  return result;
}

std::vector<RunResult> resolution_sweep(const ScenarioConfig& config,
                                        const std::vector<uint32_t>& scales) {
  if (scales.empty()) throw ConfigError("sweep: needs at least one scale factor");
  for (uint32_t s : scales) {
    if (s < 1) throw ConfigError("sweep: scale factors must be positive integers");
  }

  std::vector<RunResult> results;
  std::ostringstream report;
  report << "scale,width,height,snr_db,fidelity_fluct\n";
  for (uint32_t scale : scales) {
    ScenarioConfig sub = config;
    sub.pattern.width = config.pattern.width * scale;
    sub.pattern.height = config.pattern.height * scale;
    sub.out_dir = (fs::path(config.out_dir) / ("scale_" + std::to_string(scale))).string();
    results.push_back(run_scenario(sub));

    const RunResult& r = results.back();
    report << scale << "," << sub.pattern.width << "," << sub.pattern.height << ",";
    if (r.snr.snr_db) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.10g", *r.snr.snr_db);
      report << buf;
    } else {
      report << "undefined";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), ",%.10g\n", r.fidelity_fluct);
    report << buf;
  }
  write_text_file(fs::path(config.out_dir) / "resolution_report.csv", report.str());
  return results;
}

}  // namespace cgi
