#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cgi/forward.hpp"
#include "cgi/metrics.hpp"
#include "cgi/patterns.hpp"
#include "cgi/pgm.hpp"
#include "cgi/reconstruct.hpp"
#include "cgi/scenario.hpp"
#include "cgi/version.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<uint64_t> noise_seed;
  std::optional<uint64_t> frames;
  std::string out_dir;
  unsigned threads = 1;
};

cgi::ScenarioConfig load_with_overrides(const GlobalFlags& flags) {
  if (flags.config_path.empty()) throw cgi::ConfigError("--config is required");
  cgi::ScenarioConfig config = cgi::load_config(flags.config_path);
  if (flags.seed) config.pattern.seed = *flags.seed;
  if (flags.noise_seed) config.noise_seed = *flags.noise_seed;
  if (flags.frames) config.frames = *flags.frames;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  return config;
}

std::string snr_db_text(const cgi::SnrReport& snr) {
  if (!snr.snr_db) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *snr.snr_db);
  return buf;
}

void print_run_summary(const cgi::RunResult& result, const char* scenario) {
  std::printf("scenario=%s frames=%llu snr_db=%s fidelity=%.4f out=%s\n", scenario,
              static_cast<unsigned long long>(result.frames), snr_db_text(result.snr).c_str(),
              result.fidelity_fluct, result.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cgisim: computational ghost imaging simulator and reconstruction engine"};
  app.set_version_flag("--version", std::string(cgi::kToolName) + " " + cgi::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "scenario config file");
  app.add_option("--seed", flags.seed, "override the pattern seed");
  app.add_option("--noise-seed", flags.noise_seed, "override the channel noise seed");
  app.add_option("--frames", flags.frames, "override the frame count");
  app.add_option("--out", flags.out_dir, "override the output directory");
  app.add_option("--threads", flags.threads, "worker threads for multi-seed harnesses")
      ->check(CLI::Range(1u, 256u));

  // generate-patterns
  auto* gen = app.add_subcommand("generate-patterns", "write a speckle pattern file");
  std::string gen_out;
  cgi::PatternGridSpec gen_spec{40, 40, 0.11, 1, cgi::FillMode::exact_count};
  uint64_t gen_frames = 18000;
  std::string gen_mode = "exact_count";
  gen->add_option("--out", gen_out, "destination pattern file")->required();
  gen->add_option("--width", gen_spec.width, "grid width");
  gen->add_option("--height", gen_spec.height, "grid height");
  gen->add_option("--fill", gen_spec.fill_ratio, "white-pixel fill ratio in [0,1]");
  gen->add_option("--fill-mode", gen_mode, "bernoulli or exact_count");
  gen->add_option("--pattern-seed", gen_spec.seed, "pattern seed");
  gen->add_option("--pattern-frames", gen_frames, "frame count");
  gen->callback([&] {
    gen_spec.fill_mode = cgi::fill_mode_from_name(gen_mode);
    if (flags.seed) gen_spec.seed = *flags.seed;
    if (flags.frames) gen_frames = *flags.frames;
    if (gen_frames < 1) throw cgi::ConfigError("--frames must be >= 1");
    cgi::save_patterns(gen_spec, gen_frames, gen_out);
    std::printf("wrote %llu %ux%u frames to %s\n", static_cast<unsigned long long>(gen_frames),
                gen_spec.width, gen_spec.height, gen_out.c_str());
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "synthesize a detector trace for a scenario");
  sim->callback([&] {
    const cgi::ScenarioConfig config = load_with_overrides(flags);
    const cgi::ResolvedScenario s = cgi::resolve_scenario(config);
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw cgi::IoError("cannot create output directory '" + config.out_dir + "'");
    const cgi::DetectorTrace trace =
        cgi::simulate_trace(s.pattern, s.object, s.channel, s.frames);
    const std::string path = (fs::path(config.out_dir) / "trace.csv").string();
    cgi::save_trace_csv(trace, s.channel, s.pattern, path);
    std::printf("wrote %zu samples to %s (fingerprint %s)\n", trace.samples.size(), path.c_str(),
                trace.fingerprint.c_str());
  });

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "correlate a pattern file with a trace");
  std::string rec_patterns, rec_trace, rec_save_acc;
  std::vector<std::string> rec_merge;
  rec->add_option("--patterns", rec_patterns, "pattern file from generate-patterns");
  rec->add_option("--trace", rec_trace, "trace CSV from simulate");
  rec->add_option("--save-acc", rec_save_acc, "write the accumulator snapshot here");
  rec->add_option("--merge-acc", rec_merge, "merge accumulator snapshot(s) before finalizing");
  rec->callback([&] {
    if (flags.out_dir.empty()) throw cgi::ConfigError("--out is required for reconstruct");
    if (rec_patterns.empty() != rec_trace.empty()) {
      throw cgi::ConfigError("--patterns and --trace must be given together");
    }
    if (rec_patterns.empty() && rec_merge.empty()) {
      throw cgi::ConfigError("nothing to reconstruct: give --patterns/--trace or --merge-acc");
    }

    std::optional<cgi::CorrelationAccumulator> acc;
    std::string provenance;
    if (!rec_patterns.empty()) {
      cgi::PatternFileReader reader(rec_patterns);
      std::string pattern_fp;
      const cgi::DetectorTrace trace = cgi::load_trace_csv(rec_trace, &pattern_fp);
      if (!pattern_fp.empty() &&
          pattern_fp != cgi::pattern_spec_fingerprint(reader.spec())) {
        throw cgi::ConfigError("trace '" + rec_trace +
                               "' was recorded for a different pattern spec");
      }
      if (trace.samples.size() != reader.count()) {
        throw cgi::ConfigError("trace has " + std::to_string(trace.samples.size()) +
                               " samples but the pattern file has " +
                               std::to_string(reader.count()) + " frames");
      }
      provenance = trace.fingerprint;
      acc.emplace(reader.spec().width, reader.spec().height);
      cgi::SpecklePattern frame;
      while (reader.next(frame)) acc->ingest(frame, trace.samples[frame.index]);
    }
    for (const std::string& path : rec_merge) {
      cgi::CorrelationAccumulator part = cgi::CorrelationAccumulator::load_snapshot(path);
      if (acc) {
        acc->merge(part);
      } else {
        acc = std::move(part);
      }
    }

    std::error_code ec;
    fs::create_directories(flags.out_dir, ec);
    if (ec) throw cgi::IoError("cannot create output directory '" + flags.out_dir + "'");
    if (!rec_save_acc.empty()) acc->save_snapshot(rec_save_acc);

    const cgi::ReconstructedImage image = cgi::finalize_g2(*acc, provenance);
    const fs::path dir(flags.out_dir);
    cgi::save_pixel_csv(image.g2, (dir / "g2.csv").string());
    cgi::save_pixel_csv(image.fluct, (dir / "fluct.csv").string());
    cgi::pgm::write(cgi::normalize_for_display(image.g2).gray, (dir / "g2.pgm").string());
    cgi::pgm::write(cgi::normalize_for_display(image.fluct).gray, (dir / "fluct.pgm").string());
    std::printf("reconstructed %llu frames (%zu undefined g2 pixels) into %s\n",
                static_cast<unsigned long long>(image.n), image.undefined_pixels,
                flags.out_dir.c_str());
  });

  // snr
  auto* snr = app.add_subcommand("snr", "score a reconstructed image against ground truth");
  std::string snr_image, snr_glyph, snr_object_image, snr_out;
  double snr_threshold = 0.5;
  snr->add_option("--image", snr_image, "per-pixel CSV (g2.csv or fluct.csv)")->required();
  snr->add_option("--glyph", snr_glyph, "ground-truth glyph text");
  snr->add_option("--object-image", snr_object_image, "ground-truth P5 graymap");
  snr->add_option("--threshold", snr_threshold, "signal/background threshold");
  snr->add_option("--snr-out", snr_out, "also write the report as CSV here");
  snr->callback([&] {
    const cgi::PixelMap image = cgi::load_pixel_csv(snr_image);
    if (snr_glyph.empty() == snr_object_image.empty()) {
      throw cgi::ConfigError("give exactly one of --glyph or --object-image");
    }
    cgi::ObjectMap object = snr_glyph.empty()
                                ? cgi::load_object_image(snr_object_image)
                                : cgi::make_glyph_object(snr_glyph, image.width, image.height);
    cgi::require_same_shape(object.width, object.height, image.width, image.height, "snr");
    const cgi::RegionMask mask = cgi::mask_from_object(object, snr_threshold);
    const cgi::SnrReport report =
        cgi::compute_snr(image, mask, flags.frames ? *flags.frames : 0);
    std::fputs(cgi::snr_report_text(report).c_str(), stdout);
    std::printf("fidelity=%.6f\n", cgi::fidelity(image, object));
    if (!snr_out.empty()) {
      std::ofstream out(snr_out, std::ios::trunc);
      if (!out) throw cgi::IoError("cannot open '" + snr_out + "' for writing");
      out << cgi::snr_report_csv_header() << "\n" << cgi::snr_report_csv_row(report) << "\n";
    }
  });

  // run
  auto* run = app.add_subcommand("run", "execute a full scenario pipeline");
  run->callback([&] {
    const cgi::ScenarioConfig config = load_with_overrides(flags);
    const cgi::RunResult result = cgi::run_scenario(config);
    print_run_summary(result, cgi::scenario_id_name(config.id));
  });

  // converge
  auto* conv = app.add_subcommand("converge", "SNR vs frame count over a seed set");
  std::vector<uint64_t> conv_grid, conv_seeds;
  conv->add_option("--n-grid", conv_grid, "frame counts, e.g. 500,2000,8000,18000")
      ->required()
      ->delimiter(',');
  conv->add_option("--seeds", conv_seeds, "pattern seeds, e.g. 1,2,3")->delimiter(',');
  conv->callback([&] {
    const cgi::ScenarioConfig config = load_with_overrides(flags);
    const cgi::ConvergenceResult result =
        cgi::run_convergence(config, conv_grid, conv_seeds, flags.threads);
    std::printf("wrote %zu curve(s) to %s\n", result.curves.size(), result.csv_path.c_str());
  });

  // sweep-resolution
  auto* sweep = app.add_subcommand("sweep-resolution", "rerun at scaled grid resolutions");
  std::vector<uint32_t> sweep_scales;
  sweep->add_option("--scales", sweep_scales, "integer scale factors, e.g. 1,2")
      ->required()
      ->delimiter(',');
  sweep->callback([&] {
    const cgi::ScenarioConfig config = load_with_overrides(flags);
    const std::vector<cgi::RunResult> results = cgi::resolution_sweep(config, sweep_scales);
    for (const cgi::RunResult& r : results) {
      print_run_summary(r, cgi::scenario_id_name(config.id));
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const cgi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cgi::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const cgi::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
