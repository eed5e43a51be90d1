#include "tmatch/image.hpp"

#include <cmath>
#include <fstream>

namespace tmatch {

namespace {

// Reads one PGM header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

struct PgmRaw {
  int width = 0, height = 0, maxval = 0;
  std::vector<std::uint8_t> bytes;
};

PgmRaw read_pgm_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  if (next_token(in) != "P5") throw IoFailure(path + ": not a binary PGM (P5)");
  PgmRaw raw;
  try {
    raw.width = std::stoi(next_token(in));
    raw.height = std::stoi(next_token(in));
    raw.maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw IoFailure(path + ": malformed PGM header");
  }
  if (raw.width <= 0 || raw.height <= 0 || raw.maxval <= 0 || raw.maxval > 255) {
    throw IoFailure(path + ": unsupported PGM dimensions or maxval");
  }
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  raw.bytes.resize(n);
  in.read(reinterpret_cast<char*>(raw.bytes.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw IoFailure(path + ": truncated pixel data");
  }
  return raw;
}

void write_pgm_raw(const std::string& path, int w, int h,
                   const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  out << "P5\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("failed writing " + path);
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  const PgmRaw raw = read_pgm_raw(path);
  GrayImage img(raw.width, raw.height);
  for (std::size_t i = 0; i < raw.bytes.size(); ++i) {
    img.data[i] = static_cast<double>(raw.bytes[i]) / raw.maxval;
  }
  return img;
}

void write_pgm(const std::string& path, const GrayImage& img) {
  std::vector<std::uint8_t> bytes(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = std::clamp(img.data[i], 0.0, 1.0);
    bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  write_pgm_raw(path, img.width, img.height, bytes);
}

MaskImage read_mask_pgm(const std::string& path) {
  const PgmRaw raw = read_pgm_raw(path);
  MaskImage mask(raw.width, raw.height);
  for (std::size_t i = 0; i < raw.bytes.size(); ++i) {
    mask.data[i] = raw.bytes[i] > 127 ? 1 : 0;
  }
  return mask;
}

void write_mask_pgm(const std::string& path, const MaskImage& mask) {
  std::vector<std::uint8_t> bytes(mask.data.size());
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    bytes[i] = mask.data[i] ? 255 : 0;
  }
  write_pgm_raw(path, mask.width, mask.height, bytes);
}

void write_edge_pgm(const std::string& path, const EdgeImage& edges) {
  std::vector<std::uint8_t> bytes(edges.strength.size());
  for (std::size_t i = 0; i < edges.strength.size(); ++i) {
    const double v = std::clamp(edges.strength[i], 0.0, 1.0);
    bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  write_pgm_raw(path, edges.width, edges.height, bytes);
}

EdgeImage read_edge_pgm(const std::string& path, double binary_low) {
  const PgmRaw raw = read_pgm_raw(path);
  EdgeImage e(raw.width, raw.height);
  for (std::size_t i = 0; i < raw.bytes.size(); ++i) {
    e.strength[i] = static_cast<double>(raw.bytes[i]) / raw.maxval;
    e.binary[i] = e.strength[i] >= binary_low ? 1 : 0;
  }
  return e;
}

}  // namespace tmatch
