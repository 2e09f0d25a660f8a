#include "cgi/reconstruct.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "binio.hpp"

namespace cgi {

using namespace binio;

namespace {

constexpr char kSnapshotMagic[8] = {'C', 'G', 'I', 'A', 'C', 'C', '0', '1'};
constexpr uint32_t kSnapshotVersion = 1;
constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

}  // namespace

CorrelationAccumulator::CorrelationAccumulator(uint32_t width, uint32_t height)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw ConfigError("accumulator grid must be at least 1x1");
  const size_t n = static_cast<size_t>(width) * height;
  sum_pat_.assign(n, 0.0);
  sum_cross_.assign(n, 0.0);
}

void CorrelationAccumulator::ingest(const SpecklePattern& pattern, double sample) {
  require_same_shape(pattern.width, pattern.height, width_, height_, "ingest");
  ++n_;
  sum_det_ += sample;
  sum_det_sq_ += sample * sample;
  const size_t n = sum_pat_.size();
  for (size_t i = 0; i < n; ++i) {
    if (pattern.pixels[i]) {
      sum_pat_[i] += 1.0;
      sum_cross_[i] += sample;
    }
  }
}

void CorrelationAccumulator::merge(const CorrelationAccumulator& other) {
  require_same_shape(other.width_, other.height_, width_, height_, "merge");
  n_ += other.n_;
  sum_det_ += other.sum_det_;
  sum_det_sq_ += other.sum_det_sq_;
  for (size_t i = 0; i < sum_pat_.size(); ++i) {
    sum_pat_[i] += other.sum_pat_[i];
    sum_cross_[i] += other.sum_cross_[i];
  }
}

void CorrelationAccumulator::save_snapshot(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  put_bytes(out, kSnapshotMagic, sizeof(kSnapshotMagic));
  put_u32(out, kSnapshotVersion);
  put_u32(out, width_);
  put_u32(out, height_);
  put_u64(out, n_);
  put_f64(out, sum_det_);
  put_f64(out, sum_det_sq_);
  for (double v : sum_pat_) put_f64(out, v);
  for (double v : sum_cross_) put_f64(out, v);
  if (!out) throw IoError("write failure on '" + path + "'");
}

CorrelationAccumulator CorrelationAccumulator::load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot '" + path + "'");
  char magic[8];
  if (!get_bytes(in, magic, 8) || std::memcmp(magic, kSnapshotMagic, 8) != 0) {
    throw IoError("'" + path + "' is not an accumulator snapshot (bad magic)");
  }
  uint32_t version = 0, w = 0, h = 0;
  if (!get_u32(in, version) || !get_u32(in, w) || !get_u32(in, h)) {
    throw IoError("'" + path + "': truncated snapshot header");
  }
  if (version != kSnapshotVersion) {
    throw IoError("'" + path + "': unsupported snapshot version " + std::to_string(version));
  }
  if (w < 1 || h < 1 || static_cast<size_t>(w) * h > (1u << 30)) {
    throw IoError("'" + path + "': corrupt snapshot dimensions");
  }
  CorrelationAccumulator acc(w, h);
  if (!get_u64(in, acc.n_) || !get_f64(in, acc.sum_det_) || !get_f64(in, acc.sum_det_sq_)) {
    throw IoError("'" + path + "': truncated snapshot header");
  }
  for (double& v : acc.sum_pat_) {
    if (!get_f64(in, v)) throw IoError("'" + path + "': truncated snapshot sums");
  }
  for (double& v : acc.sum_cross_) {
    if (!get_f64(in, v)) throw IoError("'" + path + "': truncated snapshot sums");
  }
  return acc;
}

ReconstructedImage finalize_g2(const CorrelationAccumulator& acc, const std::string& provenance) {
  if (acc.frames() < 1) throw NumericError("cannot finalize an empty accumulator");

  ReconstructedImage image;
  image.n = acc.frames();
  image.provenance = provenance;
  image.g2 = PixelMap(acc.width(), acc.height());
  image.fluct = PixelMap(acc.width(), acc.height());

  const double n = static_cast<double>(acc.frames());
  const double mean_det = acc.sum_det() / n;
  const auto& sum_pat = acc.sum_pat();
  const auto& sum_cross = acc.sum_cross();

  for (size_t i = 0; i < sum_pat.size(); ++i) {
    const double mean_pat = sum_pat[i] / n;
    const double mean_cross = sum_cross[i] / n;
    image.fluct.values[i] = mean_cross - mean_pat * mean_det;
    if (sum_pat[i] == 0.0 || acc.sum_det() == 0.0) {
      image.g2.values[i] = kUndefined;
      ++image.undefined_pixels;
    } else {
      image.g2.values[i] = mean_cross / (mean_pat * mean_det);
    }
  }
  return image;
}

PixelMap finalize_fluctuation_image(const CorrelationAccumulator& acc) {
  if (acc.frames() < 1) throw NumericError("cannot finalize an empty accumulator");
  PixelMap fluct(acc.width(), acc.height());
  const double n = static_cast<double>(acc.frames());
  const double mean_det = acc.sum_det() / n;
  for (size_t i = 0; i < fluct.values.size(); ++i) {
    fluct.values[i] = acc.sum_cross()[i] / n - (acc.sum_pat()[i] / n) * mean_det;
  }
  return fluct;
}

DisplayImage normalize_for_display(const PixelMap& image) {
  DisplayImage display;
  display.gray = ByteMap(image.width, image.height);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  size_t defined = 0;
  for (double v : image.values) {
    if (!pixel_defined(v)) continue;
    ++defined;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (defined == 0) throw NumericError("cannot display an image with no defined pixels");

  display.min_value = lo;
  display.max_value = hi;
  for (size_t i = 0; i < image.values.size(); ++i) {
    const double v = image.values[i];
    if (!pixel_defined(v)) {
      display.gray.values[i] = 0;
      ++display.undefined_pixels;
    } else if (hi == lo) {
      display.gray.values[i] = 128;
    } else {
      display.gray.values[i] = static_cast<uint8_t>(std::lround((v - lo) / (hi - lo) * 255.0));
    }
  }
  return display;
}

void save_pixel_csv(const PixelMap& image, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char buf[40];
  for (uint32_t y = 0; y < image.height; ++y) {
    for (uint32_t x = 0; x < image.width; ++x) {
      std::snprintf(buf, sizeof(buf), "%.17g", image.at(x, y));
      out << (x ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

PixelMap load_pixel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open image CSV '" + path + "'");
  std::vector<double> values;
  uint32_t width = 0, height = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    uint32_t cols = 0;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("'" + path + "': malformed cell '" + cell + "'");
      }
      ++cols;
    }
    if (width == 0) {
      width = cols;
    } else if (cols != width) {
      throw IoError("'" + path + "': ragged rows (" + std::to_string(cols) + " vs " +
                    std::to_string(width) + ")");
    }
    ++height;
  }
  if (width == 0 || height == 0) throw IoError("'" + path + "': empty image CSV");
  PixelMap image(width, height);
  image.values = std::move(values);
  return image;
}

}  // namespace cgi
