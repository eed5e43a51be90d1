#include "tmatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "tmatch/edges.hpp"
#include "tmatch/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace tmatch {

MaskImage warp_mask(const MaskImage& mask, const Homography& h, int width, int height) {
  const Homography hinv = invert(h);
  MaskImage out(width, height);
  auto sample = [&mask](int x, int y) -> double {
    return mask.in_bounds(x, y) && mask.at(x, y) ? 1.0 : 0.0;
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Eigen::Vector2d src;
      try {
        src = apply_homography(hinv, {static_cast<double>(x), static_cast<double>(y)});
      } catch (const DegeneratePoint&) {
        continue;
      }
      const int x0 = static_cast<int>(std::floor(src.x()));
      const int y0 = static_cast<int>(std::floor(src.y()));
      if (x0 < -1 || x0 >= mask.width || y0 < -1 || y0 >= mask.height) continue;
      const double ax = src.x() - x0, ay = src.y() - y0;
      const double v = (1 - ax) * (1 - ay) * sample(x0, y0) +
                       ax * (1 - ay) * sample(x0 + 1, y0) +
                       (1 - ax) * ay * sample(x0, y0 + 1) +
                       ax * ay * sample(x0 + 1, y0 + 1);
      if (v >= 0.5) out.at(x, y) = 1;
    }
  }
  return out;
}

namespace {

void add_noise_segments(EdgeImage& e, int count, Rng& rng) {
  for (int s = 0; s < count; ++s) {
    const double x0 = rng.uniform(0.0, e.width - 1.0);
    const double y0 = rng.uniform(0.0, e.height - 1.0);
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    const double len = rng.uniform(10.0, 40.0);
    const int steps = static_cast<int>(len);
    for (int t = 0; t < steps; ++t) {
      const int x = static_cast<int>(std::lround(x0 + t * std::cos(ang)));
      const int y = static_cast<int>(std::lround(y0 + t * std::sin(ang)));
      if (!e.in_bounds(x, y)) break;
      const std::size_t i = static_cast<std::size_t>(y) * e.width + x;
      e.strength[i] = 1.0;
      e.binary[i] = 1;
    }
  }
}

void gaussian_blur(EdgeImage& e, double sigma) {
  if (sigma <= 0.0) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  std::vector<double> tmp(e.strength.size(), 0.0);
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int sx = std::clamp(x + i, 0, e.width - 1);
        acc += kernel[i + radius] * e.strength[static_cast<std::size_t>(y) * e.width + sx];
      }
      tmp[static_cast<std::size_t>(y) * e.width + x] = acc;
    }
  }
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int sy = std::clamp(y + i, 0, e.height - 1);
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(sy) * e.width + x];
      }
      e.strength[static_cast<std::size_t>(y) * e.width + x] = acc;
    }
  }
}

std::vector<std::string> list_mask_files(const std::string& dir) {
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::vector<SampleRecord> synth_dataset(const std::string& masks_dir,
                                        const std::string& out_dir, int n,
                                        const PipelineConfig& cfg, std::uint64_t seed) {
  if (n < 1) throw InvalidRange("need at least one sample");

  std::vector<MaskImage> masks;
  if (masks_dir == "builtin") {
    for (int i = 0; i < builtin_mask_count(); ++i) {
      masks.push_back(builtin_mask(i, cfg.width, cfg.height));
    }
  } else {
    for (const auto& f : list_mask_files(masks_dir)) {
      masks.push_back(read_mask_pgm(f));
    }
  }
  if (masks.empty()) throw NoMasks("no mask PGMs found in " + masks_dir);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw IoFailure("cannot create " + out_dir);

  std::vector<SampleRecord> records;
  records.reserve(n);
  const PerturbationConfig pert = cfg.perturbation();
  for (int k = 0; k < n; ++k) {
    const MaskImage centered =
        center_mask(masks[k % masks.size()], cfg.width, cfg.height);
    const std::uint64_t sample_seed = derive_seed(seed, static_cast<std::uint64_t>(k));
    const Homography h = sample_gt_homography(sample_seed, pert);

    const MaskImage placed = warp_mask(centered, h, cfg.width, cfg.height);
    EdgeImage source = mask_to_edges(placed);
    if (cfg.noise_edges > 0) {
      Rng noise_rng(derive_seed(sample_seed, 0x6e6f6973));
      add_noise_segments(source, cfg.noise_edges, noise_rng);
    }
    gaussian_blur(source, cfg.blur_sigma);

    std::ostringstream id;
    id << "s" << std::setw(4) << std::setfill('0') << k;
    SampleRecord rec;
    rec.id = id.str();
    rec.mask_path = (fs::path(out_dir) / (rec.id + "_mask.pgm")).string();
    rec.source_path = (fs::path(out_dir) / (rec.id + "_source.pgm")).string();
    rec.h_gt = h;
    rec.seed = sample_seed;
    write_mask_pgm(rec.mask_path, centered);
    write_edge_pgm(rec.source_path, source);
    records.push_back(std::move(rec));
  }
  write_manifest((fs::path(out_dir) / "manifest.json").string(), records, seed);
  return records;
}

void write_manifest(const std::string& path, const std::vector<SampleRecord>& records,
                    std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["samples"] = json::array();
  for (const auto& r : records) {
    json s;
    s["id"] = r.id;
    s["mask"] = fs::path(r.mask_path).filename().string();
    s["source"] = fs::path(r.source_path).filename().string();
    s["seed"] = r.seed;
    s["h"] = to_line(r.h_gt);
    j["samples"].push_back(std::move(s));
  }
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<SampleRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoFailure(path + ": invalid JSON: " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  std::vector<SampleRecord> records;
  for (const auto& s : j.at("samples")) {
    SampleRecord r;
    r.id = s.at("id").get<std::string>();
    r.mask_path = (base / s.at("mask").get<std::string>()).string();
    r.source_path = (base / s.at("source").get<std::string>()).string();
    r.seed = s.at("seed").get<std::uint64_t>();
    r.h_gt = homography_from_line(s.at("h").get<std::string>());
    records.push_back(std::move(r));
  }
  if (records.empty()) throw IoFailure(path + ": manifest holds no samples");
  return records;
}

namespace {

// Shape predicates on a unit frame; (u, v) in [0,1] x [0,1]. The silhouettes
// mimic planar machine parts: curvature-rich and free of near-symmetries.

double seg_dist(double u, double v, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((u - ax) * dx + (v - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(u - (ax + t * dx), v - (ay + t * dy));
}

bool shape_conrod(double u, double v) {
  // connecting rod: big end, small end, tapered shank, a hole in each end
  const bool big_end = std::hypot(u - 0.30, v - 0.62) < 0.155;
  const bool small_end = std::hypot(u - 0.72, v - 0.36) < 0.095;
  const bool shank = seg_dist(u, v, 0.30, 0.62, 0.72, 0.36) < 0.055;
  const bool big_hole = std::hypot(u - 0.30, v - 0.62) < 0.075;
  const bool small_hole = std::hypot(u - 0.72, v - 0.36) < 0.042;
  return (big_end || small_end || shank) && !big_hole && !small_hole;
}

bool shape_gear(double u, double v) {
  const double du = u - 0.5, dv = v - 0.5;
  const double r = std::hypot(du, dv);
  const double th = std::atan2(dv, du);
  const double rim = 0.27 * (1.0 + 0.13 * std::cos(9.0 * th));
  const bool disc = r < rim;
  const bool hub = std::hypot(u - 0.58, v - 0.5) < 0.06;
  return disc && !hub;
}

bool shape_cam(double u, double v) {
  // eccentric cam lobe with an off-center shaft bore
  const double du = u - 0.48, dv = v - 0.52;
  const double r = std::hypot(du, dv);
  const double th = std::atan2(dv, du);
  const double lobe = 0.21 * (1.0 + 0.38 * std::cos(th - 0.6) + 0.10 * std::sin(2.0 * th));
  const bool body = r < lobe;
  const bool bore = std::hypot(u - 0.44, v - 0.55) < 0.055;
  return body && !bore;
}

bool shape_wrench(double u, double v) {
  // open-end wrench: C-shaped jaw, angled handle with a rounded tail
  const double jx = 0.30, jy = 0.38;
  const bool head = std::hypot(u - jx, v - jy) < 0.15;
  const double gap_th = std::atan2(v - jy, u - jx);
  const bool gap = std::hypot(u - jx, v - jy) < 0.085 &&
                   std::cos(gap_th - 2.2) > 0.35;  // jaw opening
  const bool slot = std::hypot(u - jx - 0.11 * std::cos(2.2), v - jy - 0.11 * std::sin(2.2)) < 0.055;
  const bool handle = seg_dist(u, v, jx + 0.1, jy + 0.12, 0.72, 0.66) < 0.048;
  const bool tail = std::hypot(u - 0.72, v - 0.66) < 0.065;
  return (head || handle || tail) && !gap && !slot;
}

bool shape_key(double u, double v) {
  // long stem, two unequal teeth, offset bow with a hole; nothing symmetric
  const bool stem = u > 0.18 && u < 0.78 && v > 0.47 && v < 0.57;
  const bool tooth1 = u > 0.64 && u < 0.70 && v > 0.57 && v < 0.68;
  const bool tooth2 = u > 0.73 && u < 0.78 && v > 0.57 && v < 0.63;
  const bool bow = std::hypot(u - 0.24, v - 0.48) < 0.13;
  const bool bow_hole = std::hypot(u - 0.22, v - 0.44) < 0.055;
  return (stem || tooth1 || tooth2 || bow) && !bow_hole;
}

}  // namespace

int builtin_mask_count() { return 5; }

MaskImage builtin_mask(int index, int width, int height) {
  bool (*shapes[])(double, double) = {shape_conrod, shape_gear, shape_cam,
                                      shape_wrench, shape_key};
  if (index < 0 || index >= builtin_mask_count()) {
    throw InvalidRange("builtin mask index out of range");
  }
  MaskImage mask(width, height);
  const double span = std::min(width, height);
  const double ox = (width - span) / 2.0, oy = (height - span) / 2.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x - ox) / span;
      const double v = (y - oy) / span;
      if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) continue;
      if (shapes[index](u, v)) mask.at(x, y) = 1;
    }
  }
  return mask;
}

}  // namespace tmatch
