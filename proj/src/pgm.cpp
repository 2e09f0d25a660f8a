#include "cgi/pgm.hpp"

#include <fstream>

namespace cgi::pgm {

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) continue;
    tok.push_back(static_cast<char>(c));
    while ((c = in.peek()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(in.get()));
    return tok;
  }
  return tok;
}

uint32_t parse_dim(const std::string& tok, const std::string& path, const char* what) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw IoError("'" + path + "': malformed PGM " + what);
  }
  const unsigned long v = std::stoul(tok);
  if (v == 0 || v > (1u << 20)) throw IoError("'" + path + "': unreasonable PGM " + what);
  return static_cast<uint32_t>(v);
}

}  // namespace

ByteMap read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path + "'");

  if (next_token(in) != "P5") {
    throw IoError("'" + path + "': unsupported image format (only binary P5 graymaps)");
  }
  ByteMap image;
  image.width = parse_dim(next_token(in), path, "width");
  image.height = parse_dim(next_token(in), path, "height");
  const std::string maxval = next_token(in);
  if (maxval != "255") {
    throw IoError("'" + path + "': only 8-bit graymaps supported (maxval 255, got '" + maxval +
                  "')");
  }
  // Exactly one whitespace byte separates the header from the raster.
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) {
    throw IoError("'" + path + "': missing whitespace before the PGM raster");
  }
  image.values.resize(image.count());
  in.read(reinterpret_cast<char*>(image.values.data()),
          static_cast<std::streamsize>(image.count()));
  if (static_cast<size_t>(in.gcount()) != image.count()) {
    throw IoError("'" + path + "': truncated PGM raster");
  }
  return image;
}

void write(const ByteMap& image, const std::string& path) {
  if (image.width < 1 || image.height < 1) throw ConfigError("cannot write empty image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.values.data()),
            static_cast<std::streamsize>(image.count()));
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace cgi::pgm
