#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "cgi/patterns.hpp"
#include "cgi/rng.hpp"
#include "test_util.hpp"

using namespace cgi;

namespace {

PatternGridSpec make_spec(uint32_t w, uint32_t h, double fill, uint64_t seed, FillMode mode) {
  PatternGridSpec spec;
  spec.width = w;
  spec.height = h;
  spec.fill_ratio = fill;
  spec.seed = seed;
  spec.fill_mode = mode;
  return spec;
}

}  // namespace

TEST_CASE("fill ratio 1 forces all white, 0 forces all black") {
  for (FillMode mode : {FillMode::bernoulli, FillMode::exact_count}) {
    const SpecklePattern ones = generate_pattern(make_spec(2, 2, 1.0, 77, mode), 0);
    CHECK(ones.white_count() == 4);
    const SpecklePattern zeros = generate_pattern(make_spec(2, 2, 0.0, 77, mode), 5);
    CHECK(zeros.white_count() == 0);
  }
}

TEST_CASE("exact_count at the reference fill ratio gives 176 of 1600 white pixels") {
  const PatternGridSpec spec = make_spec(40, 40, 0.11, 3, FillMode::exact_count);
  CHECK(spec.white_count() == 176);
  for (uint64_t index : {0ull, 1ull, 17ull, 9999ull}) {
    CHECK(generate_pattern(spec, index).white_count() == 176);
  }
}

TEST_CASE("pixels are strictly binary") {
  const PatternGridSpec spec = make_spec(9, 7, 0.4, 5, FillMode::bernoulli);
  const SpecklePattern p = generate_pattern(spec, 3);
  for (uint8_t v : p.pixels) CHECK((v == 0 || v == 1));
}

TEST_CASE("generation is deterministic and randomly accessible") {
  const PatternGridSpec spec = make_spec(16, 16, 0.3, 41, FillMode::exact_count);
  const SpecklePattern a = generate_pattern(spec, 123);
  const SpecklePattern b = generate_pattern(spec, 123);
  CHECK(a.pixels == b.pixels);

  const PatternStream stream = pattern_stream(spec, 200);
  for (uint64_t i : {0ull, 7ull, 123ull, 199ull}) {
    CHECK(stream.at(i).pixels == generate_pattern(spec, i).pixels);
  }
}

TEST_CASE("stream of one frame is the zeroth pattern") {
  const PatternGridSpec spec = make_spec(4, 4, 0.5, 9, FillMode::bernoulli);
  const PatternStream stream = pattern_stream(spec, 1);
  CHECK(stream.count() == 1);
  CHECK(stream.at(0).pixels == generate_pattern(spec, 0).pixels);
}

TEST_CASE("exact_count keeps the per-frame white count constant") {
  const PatternGridSpec spec = make_spec(3, 3, 1.0 / 3.0, 11, FillMode::exact_count);
  const PatternStream stream = pattern_stream(spec, 100);
  for (uint64_t i = 0; i < stream.count(); ++i) CHECK(stream.at(i).white_count() == 3);
}

TEST_CASE("bernoulli empirical fill over 18000 frames stays within 0.11 +- 0.005") {
  const PatternGridSpec spec = make_spec(40, 40, 0.11, 2024, FillMode::bernoulli);
  double white = 0.0;
  const uint64_t frames = 18000;
  for (uint64_t i = 0; i < frames; ++i) {
    white += static_cast<double>(generate_pattern(spec, i).white_count());
  }
  const double mean_fill = white / (static_cast<double>(frames) * spec.pixel_count());
  CHECK(mean_fill == doctest::Approx(0.11).epsilon(0.005 / 0.11));
}

TEST_CASE("bernoulli per-pixel rates stay within 5 binomial sigma") {
  const PatternGridSpec spec = make_spec(12, 12, 0.3, 7, FillMode::bernoulli);
  const uint64_t frames = 10000;
  std::vector<uint64_t> counts(spec.pixel_count(), 0);
  for (uint64_t i = 0; i < frames; ++i) {
    const SpecklePattern p = generate_pattern(spec, i);
    for (size_t c = 0; c < counts.size(); ++c) counts[c] += p.pixels[c];
  }
  const double sigma = std::sqrt(0.3 * 0.7 / static_cast<double>(frames));
  for (uint64_t c : counts) {
    const double rate = static_cast<double>(c) / static_cast<double>(frames);
    CHECK(std::abs(rate - 0.3) < 5.0 * sigma);
  }
}

TEST_CASE("pixel values at two fixed positions are uncorrelated across frames") {
  for (FillMode mode : {FillMode::bernoulli, FillMode::exact_count}) {
    const PatternGridSpec spec = make_spec(10, 10, 0.25, 13, mode);
    const uint64_t frames = 10000;
    const size_t a = 7, b = 64;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (uint64_t i = 0; i < frames; ++i) {
      const SpecklePattern p = generate_pattern(spec, i);
      const double va = p.pixels[a], vb = p.pixels[b];
      sa += va;
      sb += vb;
      saa += va * va;
      sbb += vb * vb;
      sab += va * vb;
    }
    const double n = static_cast<double>(frames);
    const double cov = sab / n - (sa / n) * (sb / n);
    const double var_a = saa / n - (sa / n) * (sa / n);
    const double var_b = sbb / n - (sb / n) * (sb / n);
    const double corr = cov / std::sqrt(var_a * var_b);
    CHECK(std::abs(corr) < 0.05);
  }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(generate_pattern(make_spec(2, 2, -0.1, 0, FillMode::bernoulli), 0), ConfigError);
  CHECK_THROWS_AS(generate_pattern(make_spec(2, 2, 1.5, 0, FillMode::exact_count), 0),
                  ConfigError);
  CHECK_THROWS_AS(generate_pattern(make_spec(0, 4, 0.5, 0, FillMode::bernoulli), 0), ConfigError);
  CHECK_THROWS_AS(pattern_stream(make_spec(4, 4, 0.5, 0, FillMode::bernoulli), 0), ConfigError);
}

TEST_CASE("pattern file round-trips bit-exactly with its metadata") {
  testutil::TempDir dir("patterns");
  const PatternGridSpec spec = make_spec(2, 2, 0.5, 99, FillMode::bernoulli);
  const std::string path = dir.file("stream.pat");
  save_patterns(spec, 3, path);

  const LoadedPatterns loaded = load_patterns(path);
  CHECK(loaded.spec == spec);
  CHECK(loaded.generator == rng::kGeneratorName);
  REQUIRE(loaded.frames.size() == 3);
  for (uint64_t i = 0; i < 3; ++i) {
    CHECK(loaded.frames[i].index == i);
    CHECK(loaded.frames[i].pixels == generate_pattern(spec, i).pixels);
  }
}

TEST_CASE("pattern file round-trips a 40x40 exact_count stream") {
  testutil::TempDir dir("patterns40");
  const PatternGridSpec spec = make_spec(40, 40, 0.11, 5, FillMode::exact_count);
  const std::string path = dir.file("stream.pat");
  save_patterns(spec, 32, path);
  const LoadedPatterns loaded = load_patterns(path);
  REQUIRE(loaded.frames.size() == 32);
  for (uint64_t i = 0; i < 32; ++i) {
    CHECK(loaded.frames[i].pixels == generate_pattern(spec, i).pixels);
  }
}

TEST_CASE("corrupted dimension header is a structured format error") {
  testutil::TempDir dir("patcorrupt");
  const std::string path = dir.file("stream.pat");
  save_patterns(make_spec(4, 4, 0.5, 1, FillMode::bernoulli), 2, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(12);  // width field
    const char zero[4] = {0, 0, 0, 0};
    f.write(zero, 4);
  }
  CHECK_THROWS_WITH_AS(load_patterns(path), doctest::Contains("corrupt dimension header"),
                       IoError);
}

TEST_CASE("wrong magic is rejected") {
  testutil::TempDir dir("patmagic");
  const std::string path = dir.file("stream.pat");
  std::ofstream(path) << "definitely not a pattern file";
  CHECK_THROWS_WITH_AS(load_patterns(path), doctest::Contains("bad magic"), IoError);
}

TEST_CASE("truncation mid-frame names the frame index") {
  testutil::TempDir dir("pattrunc");
  const PatternGridSpec spec = make_spec(8, 8, 0.5, 1, FillMode::bernoulli);
  const std::string path = dir.file("stream.pat");
  save_patterns(spec, 3, path);

  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full - 4);  // cut into the last 8-byte frame
  CHECK_THROWS_WITH_AS(load_patterns(path), doctest::Contains("truncated mid-frame at frame 2"),
                       IoError);
}
