// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "cgi/forward.hpp"
#include "cgi/metrics.hpp"
#include "cgi/patterns.hpp"
#include "cgi/pgm.hpp"
#include "cgi/reconstruct.hpp"
#include "cgi/scenario.hpp"

namespace fs = std::filesystem;
using namespace cgi;

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Shared 40x40 reference scene (the paper's geometry).
const ObjectMap& glyph_object() {
  static const ObjectMap object = make_glyph_object("XJTU", 40, 40);
  return object;
}

PatternGridSpec reference_spec(uint64_t seed) {
  return PatternGridSpec{40, 40, 0.11, seed, FillMode::exact_count};
}

CorrelationAccumulator ingest_run(const PatternGridSpec& spec, const std::vector<double>& samples) {
  CorrelationAccumulator acc(spec.width, spec.height);
  for (uint64_t k = 0; k < samples.size(); ++k) {
    acc.ingest(generate_pattern(spec, k), samples[k]);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// 1. Brute-force oracle equivalence on every grid up to 3x3.
// ---------------------------------------------------------------------------
Outcome criterion_1() {
  Outcome out;
  double worst_fluct = 0.0, worst_g2 = 0.0;

  for (uint32_t h = 1; h <= 3; ++h) {
    for (uint32_t w = 1; w <= 3; ++w) {
      const size_t n = static_cast<size_t>(w) * h;

      std::vector<std::vector<double>> objects;
      std::vector<double> alternating(n), corner(n, 0.0);
      for (size_t i = 0; i < n; ++i) alternating[i] = (i % 2 == 0) ? 1.0 : 0.0;
      corner[0] = 1.0;
      objects.push_back(alternating);
      objects.push_back(corner);

      for (const auto& values : objects) {
        ObjectMap object;
        object.width = w;
        object.height = h;
        object.values = values;

        CorrelationAccumulator acc(w, h);
        std::vector<double> sum_pat(n, 0.0), sum_cross(n, 0.0);
        double sum_det = 0.0;
        const uint64_t total = 1ull << n;
        for (uint64_t bits = 0; bits < total; ++bits) {
          SpecklePattern p;
          p.width = w;
          p.height = h;
          p.pixels.resize(n);
          for (size_t i = 0; i < n; ++i) p.pixels[i] = (bits >> i) & 1u;
          const double sample = bucket_signal(p, object);
          acc.ingest(p, sample);
          // independent oracle sums
          sum_det += sample;
          for (size_t i = 0; i < n; ++i) {
            sum_pat[i] += p.pixels[i];
            sum_cross[i] += p.pixels[i] * sample;
          }
        }

        const ReconstructedImage image = finalize_g2(acc);
        const double nf = static_cast<double>(total);
        for (size_t i = 0; i < n; ++i) {
          worst_fluct = std::max(worst_fluct,
                                 std::abs(image.fluct.values[i] - 0.25 * object.values[i]));
          const double mean_det = sum_det / nf;
          if (sum_pat[i] > 0.0 && mean_det > 0.0) {
            const double oracle_g2 = (sum_cross[i] / nf) / ((sum_pat[i] / nf) * mean_det);
            worst_g2 = std::max(worst_g2, rel_diff(image.g2.values[i], oracle_g2));
          }
        }
      }
    }
  }
  out.require(worst_fluct <= 1e-12, "fluct deviates from 0.25*T by " + fmt("%.3g", worst_fluct));
  out.require(worst_g2 <= 1e-12, "g2 deviates from the direct ratio by " + fmt("%.3g", worst_g2));
  out.detail = "max |fluct-0.25T| = " + fmt("%.3g", worst_fluct) +
               ", max g2 rel err = " + fmt("%.3g", worst_g2);
  return out;
}

// ---------------------------------------------------------------------------
// 2. Gain invariance: trace scaled by c leaves g2 unchanged (<= 1e-12 rel).
// ---------------------------------------------------------------------------
Outcome criterion_2() {
  Outcome out;
  const PatternGridSpec spec = reference_spec(11);
  const DetectorTrace trace = simulate_trace(spec, glyph_object(), ChannelSpec{}, 18000);
  const ReconstructedImage base = finalize_g2(ingest_run(spec, trace.samples));

  double worst = 0.0;
  for (double c : {0.1, 1.0, 7.3}) {
    std::vector<double> scaled(trace.samples.size());
    for (size_t k = 0; k < scaled.size(); ++k) scaled[k] = c * trace.samples[k];
    const ReconstructedImage image = finalize_g2(ingest_run(spec, scaled));
    for (size_t i = 0; i < image.g2.values.size(); ++i) {
      if (!pixel_defined(base.g2.values[i])) continue;
      worst = std::max(worst, rel_diff(base.g2.values[i], image.g2.values[i]));
    }
  }
  out.require(worst <= 1e-12, "g2 changed by " + fmt("%.3g", worst) + " under trace scaling");
  out.detail = "max g2 rel change over c in {0.1,1,7.3}: " + fmt("%.3g", worst);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Offset invariance: trace + b keeps fluct (<= 1e-9 rel of image scale)
//    and strictly lowers max |g2 - 1|.
// ---------------------------------------------------------------------------
Outcome criterion_3() {
  Outcome out;
  const PatternGridSpec spec = reference_spec(12);
  const DetectorTrace trace = simulate_trace(spec, glyph_object(), ChannelSpec{}, 18000);
  const ReconstructedImage base = finalize_g2(ingest_run(spec, trace.samples));
  const double fluct_scale = max_abs(base.fluct.values);

  double base_contrast = 0.0;
  for (double v : base.g2.values) {
    if (pixel_defined(v)) base_contrast = std::max(base_contrast, std::abs(v - 1.0));
  }

  const double max_signal = max_bucket_signal(glyph_object());
  double worst_fluct = 0.0;
  std::string contrasts;
  for (double b : {0.5 * max_signal, 1000.0 * max_signal}) {
    std::vector<double> shifted(trace.samples.size());
    for (size_t k = 0; k < shifted.size(); ++k) shifted[k] = trace.samples[k] + b;
    const ReconstructedImage image = finalize_g2(ingest_run(spec, shifted));

    for (size_t i = 0; i < image.fluct.values.size(); ++i) {
      worst_fluct = std::max(
          worst_fluct, std::abs(image.fluct.values[i] - base.fluct.values[i]) / fluct_scale);
    }
    double contrast = 0.0;
    for (double v : image.g2.values) {
      if (pixel_defined(v)) contrast = std::max(contrast, std::abs(v - 1.0));
    }
    out.require(contrast < base_contrast,
                "max|g2-1| did not shrink under offset b=" + fmt("%.3g", b));
    contrasts += fmt(" %.3g", contrast);
  }
  out.require(worst_fluct <= 1e-9,
              "fluct changed by " + fmt("%.3g", worst_fluct) + " of image scale");
  out.detail = "max fluct rel change = " + fmt("%.3g", worst_fluct) + "; max|g2-1|: base " +
               fmt("%.3g", base_contrast) + " ->" + contrasts;
  return out;
}

// ---------------------------------------------------------------------------
// 4. Reconstruction fidelity: direct scenario, N=18000, fidelity >= 0.95
//    averaged over 5 seeds, < 5 s per run.
// ---------------------------------------------------------------------------
Outcome criterion_4(const fs::path& work) {
  Outcome out;
  double total = 0.0, worst_time = 0.0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioConfig config;  // direct, 40x40, fill 0.11, exact_count, XJTU
    config.frames = 18000;
    config.pattern.seed = seed;
    config.out_dir = (work / ("c4_seed" + std::to_string(seed))).string();
    const double t0 = now_s();
    const RunResult result = run_scenario(config);
    worst_time = std::max(worst_time, now_s() - t0);
    total += result.fidelity_fluct;
  }
  const double mean = total / 5.0;
  out.require(mean >= 0.95, "mean fidelity " + fmt("%.4f", mean) + " < 0.95");
  out.require(worst_time < 5.0, "a run took " + fmt("%.2f", worst_time) + " s (limit 5)");
  out.detail =
      "mean fidelity = " + fmt("%.4f", mean) + ", slowest run " + fmt("%.2f", worst_time) + " s";
  return out;
}

struct ParityCurves {
  ConvergenceCurve direct;
  ConvergenceCurve scatter;
};

// Shared by criteria 5 and 6: paired 10-seed curves, direct vs scatter with
// gain jitter 0.2 and background 0.2 * max_signal.
const ParityCurves& parity_curves() {
  static const ParityCurves curves = [] {
    const ObjectMap& object = glyph_object();
    const RegionMask mask = mask_from_object(object, 0.5);
    const double ms = max_bucket_signal(object);
    const PatternGridSpec spec = reference_spec(0);

    const ChannelSpec direct;
    ChannelSpec scatter;
    scatter.gain_mean = 0.8;
    scatter.gain_jitter = 0.2;
    scatter.background_mean = 0.2 * ms;

    const std::vector<uint64_t> grid = {500, 2000, 8000, 18000};
    std::vector<uint64_t> seeds;
    for (uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);

    ConvergenceOptions options;
    options.threads = 4;
    ParityCurves out;
    options.scenario_id = "direct";
    out.direct = convergence_curve(spec, object, direct, mask, grid, seeds, options);
    options.scenario_id = "scatter";
    out.scatter = convergence_curve(spec, object, scatter, mask, grid, seeds, options);
    return out;
  }();
  return curves;
}

// ---------------------------------------------------------------------------
// 5. Scattering parity: |mean snr_db(direct) - mean snr_db(scatter)| < 1.5 dB
//    at N=18000 and at every grid point.
// ---------------------------------------------------------------------------
Outcome criterion_5() {
  Outcome out;
  const ParityCurves& curves = parity_curves();
  double worst = 0.0;
  for (size_t i = 0; i < curves.direct.points.size(); ++i) {
    const double gap =
        std::abs(curves.direct.points[i].mean_snr_db - curves.scatter.points[i].mean_snr_db);
    worst = std::max(worst, gap);
    out.require(gap < 1.5, "gap " + fmt("%.3f", gap) + " dB at n=" +
                               std::to_string(curves.direct.points[i].n_frames));
  }
  out.detail = "max |direct - scatter| over the n-grid = " + fmt("%.3f", worst) + " dB";
  return out;
}

// ---------------------------------------------------------------------------
// 6. Convergence trend: mean snr_db non-decreasing along the n-grid, one
//    inversion of <= 0.3 dB allowed.
// ---------------------------------------------------------------------------
Outcome criterion_6() {
  Outcome out;
  const ParityCurves& curves = parity_curves();
  for (const ConvergenceCurve* curve : {&curves.direct, &curves.scatter}) {
    int inversions = 0;
    double worst_drop = 0.0;
    for (size_t i = 1; i < curve->points.size(); ++i) {
      const double step = curve->points[i].mean_snr_db - curve->points[i - 1].mean_snr_db;
      if (step < 0.0) {
        ++inversions;
        worst_drop = std::max(worst_drop, -step);
      }
    }
    out.require(inversions <= 1 && worst_drop <= 0.3,
                curve->scenario_id + " curve has " + std::to_string(inversions) +
                    " inversions, worst " + fmt("%.3f", worst_drop) + " dB");
    out.detail += curve->scenario_id + ": " + std::to_string(inversions) + " inversions; ";
  }
  const auto& d = curves.direct.points;
  out.detail += "direct rises " + fmt("%.2f", d.front().mean_snr_db) + " -> " +
                fmt("%.2f", d.back().mean_snr_db) + " dB";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Streaming/merge correctness on an 18000-frame noisy run.
// ---------------------------------------------------------------------------
Outcome criterion_7() {
  Outcome out;
  const PatternGridSpec spec = reference_spec(21);
  ChannelSpec channel;
  channel.gain_mean = 0.8;
  channel.gain_jitter = 0.2;
  channel.background_mean = 0.2 * max_bucket_signal(glyph_object());
  channel.noise_seed = 77;
  const uint64_t frames = 18000;
  const DetectorTrace trace = simulate_trace(spec, glyph_object(), channel, frames);

  const ReconstructedImage single = finalize_g2(ingest_run(spec, trace.samples));
  const double fluct_scale = max_abs(single.fluct.values);

  // four chunks, merged
  CorrelationAccumulator merged(spec.width, spec.height);
  for (int chunk = 0; chunk < 4; ++chunk) {
    CorrelationAccumulator part(spec.width, spec.height);
    for (uint64_t k = chunk * frames / 4; k < (chunk + 1) * frames / 4; ++k) {
      part.ingest(generate_pattern(spec, k), trace.samples[k]);
    }
    merged.merge(part);
  }
  const ReconstructedImage chunked = finalize_g2(merged);

  // deterministic permutation of the frame order (7919 is coprime to 18000)
  CorrelationAccumulator permuted(spec.width, spec.height);
  for (uint64_t j = 0; j < frames; ++j) {
    const uint64_t k = (j * 7919 + 11) % frames;
    permuted.ingest(generate_pattern(spec, k), trace.samples[k]);
  }
  const ReconstructedImage reordered = finalize_g2(permuted);

  double worst_merge = 0.0, worst_perm = 0.0;
  for (size_t i = 0; i < single.g2.values.size(); ++i) {
    worst_merge = std::max(worst_merge, rel_diff(single.g2.values[i], chunked.g2.values[i]));
    worst_merge = std::max(
        worst_merge, std::abs(single.fluct.values[i] - chunked.fluct.values[i]) / fluct_scale);
    worst_perm = std::max(worst_perm, rel_diff(single.g2.values[i], reordered.g2.values[i]));
    worst_perm = std::max(
        worst_perm, std::abs(single.fluct.values[i] - reordered.fluct.values[i]) / fluct_scale);
  }
  out.require(worst_merge <= 1e-10, "chunked merge deviates by " + fmt("%.3g", worst_merge));
  out.require(worst_perm <= 1e-10, "permuted order deviates by " + fmt("%.3g", worst_perm));
  out.detail =
      "merge dev = " + fmt("%.3g", worst_merge) + ", permutation dev = " + fmt("%.3g", worst_perm);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Determinism: rerunning a scenario reproduces every output byte.
// ---------------------------------------------------------------------------
std::map<std::string, std::string> read_bundle(const fs::path& dir) {
  std::map<std::string, std::string> bundle;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    bundle[fs::relative(entry.path(), dir).string()] =
        std::string((std::istreambuf_iterator<char>(in)), {});
  }
  return bundle;
}

Outcome criterion_8(const fs::path& work) {
  Outcome out;
  size_t files = 0;
  for (ScenarioId id : {ScenarioId::direct, ScenarioId::corner_scatter}) {
    ScenarioConfig config;
    config.id = id;
    config.frames = 2000;
    config.pattern.seed = 3;
    config.noise_seed = 4;
    config.out_dir = (work / (std::string("c8_") + scenario_id_name(id))).string();

    run_scenario(config);
    const auto first = read_bundle(config.out_dir);
    run_scenario(config);
    const auto second = read_bundle(config.out_dir);
    files += first.size();
    out.require(first.size() >= 11, "bundle is missing files");
    out.require(first == second, std::string("rerun of ") + scenario_id_name(id) + " differs");
  }
  out.detail = std::to_string(files) + " files compared bytewise across reruns";
  return out;
}

// ---------------------------------------------------------------------------
// 9. Diffuse around-corner scenario: 64x64 grayscale reflectance target,
//    N=50000, fidelity >= 0.8 over 5 seeds, < 30 s per run.
// ---------------------------------------------------------------------------
ObjectMap toy_plane_object() {
  ObjectMap object;
  object.width = 64;
  object.height = 64;
  object.mode = ObjectMode::reflectance;
  object.values.resize(4096);
  const auto blob = [](double x, double y, double cx, double cy, double sx, double sy) {
    const double dx = (x - cx) / sx, dy = (y - cy) / sy;
    return std::exp(-(dx * dx + dy * dy));
  };
  for (uint32_t y = 0; y < 64; ++y) {
    for (uint32_t x = 0; x < 64; ++x) {
      const double v = 0.95 * blob(x, y, 32, 34, 16, 5)    // fuselage
                       + 0.75 * blob(x, y, 30, 30, 4, 14)  // wings
                       + 0.6 * blob(x, y, 47, 28, 3, 6);   // tail fin
      object.values[static_cast<size_t>(y) * 64 + x] = std::min(1.0, v);
    }
  }
  return object;
}

Outcome criterion_9(const fs::path& work) {
  Outcome out;
  const std::string image_path = (work / "toy_plane.pgm").string();
  save_object_image(toy_plane_object(), image_path);

  double total = 0.0, worst_time = 0.0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioConfig config;
    config.id = ScenarioId::corner_diffuse;
    config.pattern.width = 64;
    config.pattern.height = 64;
    config.pattern.seed = seed;
    config.glyph.clear();
    config.image_path = image_path;
    config.frames = 50000;
    config.noise_seed = derived_noise_seed(seed);
    config.out_dir = (work / ("c9_seed" + std::to_string(seed))).string();

    const double t0 = now_s();
    const RunResult result = run_scenario(config);
    worst_time = std::max(worst_time, now_s() - t0);
    total += result.fidelity_fluct;
  }
  const double mean = total / 5.0;
  out.require(mean >= 0.8, "mean fidelity " + fmt("%.4f", mean) + " < 0.8");
  out.require(worst_time < 30.0, "a run took " + fmt("%.2f", worst_time) + " s (limit 30)");
  out.detail =
      "mean fidelity = " + fmt("%.4f", mean) + ", slowest run " + fmt("%.2f", worst_time) + " s";
  return out;
}

}  // namespace

int main() {
  const fs::path work =
      fs::temp_directory_path() / ("cgisim_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "brute-force oracle equivalence (grids up to 3x3)", [] { return criterion_1(); }},
      {2, "gain invariance of g2", [] { return criterion_2(); }},
      {3, "offset invariance of fluct, contrast loss in g2", [] { return criterion_3(); }},
      {4, "direct-scenario reconstruction fidelity", [&] { return criterion_4(work); }},
      {5, "scattering parity of SNR curves", [] { return criterion_5(); }},
      {6, "SNR convergence trend", [] { return criterion_6(); }},
      {7, "streaming/merge/permutation correctness", [] { return criterion_7(); }},
      {8, "byte-identical determinism of scenario reruns", [&] { return criterion_8(work); }},
      {9, "diffuse around-corner fidelity", [&] { return criterion_9(work); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const double t0 = now_s();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double dt = now_s() - t0;
    std::printf("[%s] criterion %d: %s (%s; %.2f s)\n", outcome.pass ? "PASS" : "FAIL", c.id,
                c.title, outcome.detail.c_str(), dt);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }

  std::error_code ec;
  fs::remove_all(work, ec);

  if (failures > 0) {
    std::printf("%d of %zu acceptance criteria FAILED\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
