#include "cgi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>

#include "cgi/reconstruct.hpp"
#include "cgi/rng.hpp"

namespace cgi {

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

double region_mean(const PixelMap& image, const std::vector<uint32_t>& region) {
  double sum = 0.0;
  for (uint32_t i : region) sum += image.values[i];
  return sum / static_cast<double>(region.size());
}

double region_population_variance(const PixelMap& image, const std::vector<uint32_t>& region,
                                  double mean) {
  double sum = 0.0;
  for (uint32_t i : region) {
    const double d = image.values[i] - mean;
    sum += d * d;
  }
  return sum / static_cast<double>(region.size());
}

}  // namespace

void RegionMask::validate() const {
  if (width < 1 || height < 1) throw ConfigError("region mask needs a non-empty grid");
  if (signal.empty() || background.empty()) {
    throw NumericError("region mask needs non-empty signal and background sets");
  }
  const size_t n = static_cast<size_t>(width) * height;
  std::vector<uint8_t> seen(n, 0);
  for (uint32_t i : signal) {
    if (i >= n) throw ConfigError("signal index " + std::to_string(i) + " outside the grid");
    seen[i] = 1;
  }
  for (uint32_t i : background) {
    if (i >= n) throw ConfigError("background index " + std::to_string(i) + " outside the grid");
    if (seen[i]) {
      throw ConfigError("signal and background regions overlap at index " + std::to_string(i));
    }
  }
}

SnrReport compute_snr(const PixelMap& image, const RegionMask& mask, uint64_t n_frames) {
  mask.validate();
  require_same_shape(mask.width, mask.height, image.width, image.height, "compute_snr");
  for (uint32_t i : mask.signal) {
    if (!pixel_defined(image.values[i])) {
      throw NumericError("signal region touches undefined pixel " + std::to_string(i));
    }
  }
  for (uint32_t i : mask.background) {
    if (!pixel_defined(image.values[i])) {
      throw NumericError("background region touches undefined pixel " + std::to_string(i));
    }
  }

  SnrReport report;
  report.n_frames = n_frames;
  const double mean_signal = region_mean(image, mask.signal);
  const double mean_background = region_mean(image, mask.background);
  report.s_bar = mean_signal - mean_background;
  report.sigma_n = region_population_variance(image, mask.background, mean_background);

  if (report.sigma_n == 0.0) {
    report.limitation = "zero background variance: SNR is infinite/undefined";
    return report;
  }
  report.snr_linear = report.s_bar * report.s_bar / report.sigma_n;
  if (report.s_bar == 0.0) {
    report.limitation = "zero signal: SNR in dB is undefined";
    return report;
  }
  report.snr_db = 10.0 * std::log10(*report.snr_linear);
  return report;
}

std::string snr_report_text(const SnrReport& report) {
  std::string out;
  out += "s_bar=" + fmt(report.s_bar) + "\n";
  out += "sigma_n=" + fmt(report.sigma_n) + "\n";
  out += "snr_linear=" + (report.snr_linear ? fmt(*report.snr_linear) : "undefined") + "\n";
  out += "snr_db=" + (report.snr_db ? fmt(*report.snr_db) : "undefined") + "\n";
  out += "n_frames=" + std::to_string(report.n_frames) + "\n";
  if (!report.limitation.empty()) out += "limitation=" + report.limitation + "\n";
  return out;
}

std::string snr_report_csv_header() { return "s_bar,sigma_n,snr_linear,snr_db,n_frames"; }

std::string snr_report_csv_row(const SnrReport& report) {
  return fmt(report.s_bar) + "," + fmt(report.sigma_n) + "," +
         (report.snr_linear ? fmt(*report.snr_linear) : "undefined") + "," +
         (report.snr_db ? fmt(*report.snr_db) : "undefined") + "," +
         std::to_string(report.n_frames);
}

RegionMask mask_from_object(const ObjectMap& object, double threshold) {
  object.validate();
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("mask threshold must lie strictly inside (0,1)");
  }
  RegionMask mask;
  mask.width = object.width;
  mask.height = object.height;
  for (size_t i = 0; i < object.values.size(); ++i) {
    if (object.values[i] >= threshold) {
      mask.signal.push_back(static_cast<uint32_t>(i));
    } else {
      mask.background.push_back(static_cast<uint32_t>(i));
    }
  }
  if (mask.signal.empty()) {
    throw NumericError("mask threshold " + std::to_string(threshold) +
                       " leaves an empty signal region");
  }
  if (mask.background.empty()) {
    throw NumericError("mask threshold " + std::to_string(threshold) +
                       " leaves an empty background region");
  }
  return mask;
}

double fidelity(const PixelMap& image, const ObjectMap& object) {
  require_same_shape(image.width, image.height, object.width, object.height, "fidelity");

  double sum_a = 0.0, sum_b = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < image.values.size(); ++i) {
    if (!pixel_defined(image.values[i])) continue;
    sum_a += image.values[i];
    sum_b += object.values[i];
    ++n;
  }
  if (n < 2) throw NumericError("fidelity needs at least two defined pixels");
  const double mean_a = sum_a / static_cast<double>(n);
  const double mean_b = sum_b / static_cast<double>(n);

  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < image.values.size(); ++i) {
    if (!pixel_defined(image.values[i])) continue;
    const double da = image.values[i] - mean_a;
    const double db = object.values[i] - mean_b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw NumericError("fidelity undefined: zero variance on one side");
  }
  return sab / std::sqrt(saa * sbb);
}

uint64_t derived_noise_seed(uint64_t run_seed) {
  return rng::mix(run_seed ^ 0x6332d1b4a5a3f7e9ULL);
}

namespace {

// dB trajectory of one seed across the n-grid.
std::vector<double> seed_trajectory(PatternGridSpec spec, const ObjectMap& object,
                                    ChannelSpec channel, const RegionMask& mask,
                                    const std::vector<uint64_t>& n_grid, uint64_t seed,
                                    bool snr_on_g2) {
  spec.seed = seed;
  channel.noise_seed = derived_noise_seed(seed);

  const uint64_t n_max = n_grid.back();
  const DetectorTrace trace = simulate_trace(spec, object, channel, n_max);

  CorrelationAccumulator acc(spec.width, spec.height);
  std::vector<double> db_points;
  size_t next_grid = 0;
  for (uint64_t k = 0; k < n_max; ++k) {
    acc.ingest(generate_pattern(spec, k), trace.samples[k]);
    if (k + 1 == n_grid[next_grid]) {
      SnrReport report;
      if (snr_on_g2) {
        report = compute_snr(finalize_g2(acc).g2, mask, k + 1);
      } else {
        report = compute_snr(finalize_fluctuation_image(acc), mask, k + 1);
      }
      if (!report.defined()) {
        throw NumericError("SNR undefined at n=" + std::to_string(k + 1) + " (" +
                           report.limitation + ")");
      }
      db_points.push_back(*report.snr_db);
      ++next_grid;
    }
  }
  return db_points;
}

}  // namespace

ConvergenceCurve convergence_curve(const PatternGridSpec& spec, const ObjectMap& object,
                                   const ChannelSpec& channel, const RegionMask& mask,
                                   const std::vector<uint64_t>& n_grid,
                                   const std::vector<uint64_t>& seeds,
                                   const ConvergenceOptions& options) {
  spec.validate();
  object.validate();
  channel.validate();
  mask.validate();
  if (n_grid.empty()) throw ConfigError("convergence needs a non-empty n-grid");
  for (size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("n-grid entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw ConfigError("n-grid must be strictly increasing");
    }
  }
  if (seeds.empty()) throw ConfigError("convergence needs a non-empty seed list");

  // Per-seed trajectories, evaluated in batches of `threads`; the reduction
  // below always walks seeds in list order.
  std::vector<std::vector<double>> trajectories(seeds.size());
  const unsigned threads = std::max(1u, options.threads);
  for (size_t base = 0; base < seeds.size(); base += threads) {
    const size_t end = std::min(seeds.size(), base + threads);
    std::vector<std::future<std::vector<double>>> batch;
    for (size_t s = base + 1; s < end; ++s) {
      batch.push_back(std::async(std::launch::async, seed_trajectory, spec, std::cref(object),
                                 channel, std::cref(mask), std::cref(n_grid), seeds[s],
                                 options.snr_on_g2));
    }
    trajectories[base] =
        seed_trajectory(spec, object, channel, mask, n_grid, seeds[base], options.snr_on_g2);
    for (size_t s = base + 1; s < end; ++s) trajectories[s] = batch[s - base - 1].get();
  }

  ConvergenceCurve curve;
  curve.seeds = seeds;
  curve.scenario_id = options.scenario_id;
  const double n_seeds = static_cast<double>(seeds.size());
  for (size_t gi = 0; gi < n_grid.size(); ++gi) {
    double mean = 0.0;
    for (const auto& t : trajectories) mean += t[gi];
    mean /= n_seeds;
    double var = 0.0;
    for (const auto& t : trajectories) {
      const double d = t[gi] - mean;
      var += d * d;
    }
    curve.points.push_back({n_grid[gi], mean, std::sqrt(var / n_seeds)});
  }
  return curve;
}

void save_convergence_csv(const ConvergenceCurve& curve, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "n_frames,mean_snr_db,std_snr_db,n_seeds\n";
  for (const ConvergencePoint& p : curve.points) {
    out << p.n_frames << "," << fmt(p.mean_snr_db, "%.10g") << "," << fmt(p.std_snr_db, "%.10g")
        << "," << curve.seeds.size() << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace cgi
