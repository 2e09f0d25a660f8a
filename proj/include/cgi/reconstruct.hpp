#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cgi/grid.hpp"
#include "cgi/patterns.hpp"

namespace cgi {

/// One-pass sufficient statistics for the correlation reconstruction:
/// per-pixel sums of the illumination and of illumination x bucket, plus the
/// scalar bucket sums. Accumulators over disjoint frame sets merge by
/// fieldwise addition, so reconstruction can be partitioned freely.
class CorrelationAccumulator {
public:
  CorrelationAccumulator() = default;
  CorrelationAccumulator(uint32_t width, uint32_t height);

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }
  uint64_t frames() const { return n_; }
  double sum_det() const { return sum_det_; }
  double sum_det_sq() const { return sum_det_sq_; }
  const std::vector<double>& sum_pat() const { return sum_pat_; }
  const std::vector<double>& sum_cross() const { return sum_cross_; }

  /// Folds one (pattern, bucket sample) pair into the sums. O(W*H), stores
  /// nothing per frame.
  void ingest(const SpecklePattern& pattern, double sample);

  /// Fieldwise addition; associative and commutative.
  void merge(const CorrelationAccumulator& other);

  // Snapshot file: magic "CGIACC01" | u32 version | u32 width | u32 height |
  // u64 n | f64 sum_det | f64 sum_det_sq | W*H f64 sum_pat | W*H f64
  // sum_cross, little-endian throughout. Round-trips bit-exactly.
  void save_snapshot(const std::string& path) const;
  static CorrelationAccumulator load_snapshot(const std::string& path);

  bool operator==(const CorrelationAccumulator&) const = default;

private:
  uint32_t width_ = 0;
  uint32_t height_ = 0;
  uint64_t n_ = 0;
  double sum_det_ = 0.0;
  double sum_det_sq_ = 0.0;
  std::vector<double> sum_pat_;
  std::vector<double> sum_cross_;
};

/// Undefined pixels (never illuminated, or a zero mean bucket) are marked
/// with quiet NaN rather than a silent default.
inline bool pixel_defined(double v) { return !std::isnan(v); }

/// Normalized correlation image plus its fluctuation form.
struct ReconstructedImage {
  PixelMap g2;     ///< per-pixel normalized second-order correlation
  PixelMap fluct;  ///< per-pixel <pattern * bucket> - <pattern><bucket>
  uint64_t n = 0;
  std::string provenance;        ///< scene fingerprint when known
  size_t undefined_pixels = 0;   ///< count of NaN-flagged g2 pixels
};

/// Finalizes both images from the running sums:
///   g2    = mean_cross / (mean_pat * mean_det)
///   fluct = mean_cross - mean_pat * mean_det
/// g2 pixels with mean_pat = 0 or mean_det = 0 are NaN-flagged and counted.
ReconstructedImage finalize_g2(const CorrelationAccumulator& acc,
                               const std::string& provenance = "");

/// The fluctuation image alone (always defined).
PixelMap finalize_fluctuation_image(const CorrelationAccumulator& acc);

struct DisplayImage {
  ByteMap gray;
  double min_value = 0.0;
  double max_value = 0.0;
  size_t undefined_pixels = 0;  ///< rendered as 0
};

/// Affine map of the defined value range onto [0,255]; a constant image maps
/// to mid-gray 128, undefined pixels render as 0.
DisplayImage normalize_for_display(const PixelMap& image);

// Raw per-pixel CSV (row-major, one image row per line).
void save_pixel_csv(const PixelMap& image, const std::string& path);
PixelMap load_pixel_csv(const std::string& path);

}  // namespace cgi
