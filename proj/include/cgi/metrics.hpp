#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cgi/forward.hpp"
#include "cgi/grid.hpp"

namespace cgi {

/// Disjoint bright/dark pixel sets used by the SNR metric. Indices are flat
/// row-major positions into the image grid.
struct RegionMask {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint32_t> signal;
  std::vector<uint32_t> background;

  void validate() const;
};

/// SNR = s_bar^2 / sigma_n, in dB as 10*log10. s_bar is the mean bright
/// minus mean dark value; sigma_n is the population variance over the dark
/// region. Degenerate cases carry an explicit limitation instead of a number.
struct SnrReport {
  double s_bar = 0.0;
  double sigma_n = 0.0;
  std::optional<double> snr_linear;
  std::optional<double> snr_db;
  uint64_t n_frames = 0;
  std::string limitation;  ///< empty when snr_db is defined

  bool defined() const { return snr_db.has_value(); }
};

SnrReport compute_snr(const PixelMap& image, const RegionMask& mask, uint64_t n_frames = 0);

std::string snr_report_text(const SnrReport& report);
std::string snr_report_csv_header();
std::string snr_report_csv_row(const SnrReport& report);

/// Ground-truth partition: signal = pixels >= threshold, background = rest.
RegionMask mask_from_object(const ObjectMap& object, double threshold = 0.5);

/// Pearson correlation between an image and the ground-truth object over the
/// image's defined pixels.
double fidelity(const PixelMap& image, const ObjectMap& object);

struct ConvergencePoint {
  uint64_t n_frames = 0;
  double mean_snr_db = 0.0;
  double std_snr_db = 0.0;
};

struct ConvergenceCurve {
  std::vector<ConvergencePoint> points;  ///< n_frames strictly increasing
  std::vector<uint64_t> seeds;
  std::string scenario_id;
};

struct ConvergenceOptions {
  bool snr_on_g2 = false;   ///< default: SNR on the fluctuation image
  unsigned threads = 1;     ///< seeds evaluated in parallel batches
  std::string scenario_id;
};

/// Noise seed paired with a run seed, so one scalar names a full run.
uint64_t derived_noise_seed(uint64_t run_seed);

/// SNR trajectory vs. frame count, averaged over seeds. Each seed runs one
/// pass over max(n_grid) frames with snapshots finalized at every grid point;
/// per-seed results are reduced in seed order regardless of thread count.
ConvergenceCurve convergence_curve(const PatternGridSpec& spec, const ObjectMap& object,
                                   const ChannelSpec& channel, const RegionMask& mask,
                                   const std::vector<uint64_t>& n_grid,
                                   const std::vector<uint64_t>& seeds,
                                   const ConvergenceOptions& options = {});

/// CSV: "n_frames,mean_snr_db,std_snr_db,n_seeds".
void save_convergence_csv(const ConvergenceCurve& curve, const std::string& path);

}  // namespace cgi
