#include "tmatch/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tmatch {

using json = nlohmann::ordered_json;

void PipelineConfig::validate() const {
  auto fail = [](const std::string& why) { throw ConfigError("config: " + why); };
  if (width < 16 || height < 16) fail("width/height must be at least 16");
  if (n_patches < 1) fail("n_patches must be positive");
  if (n_coarse_layers < 0 || n_fine_layers < 0) fail("layer counts must be non-negative");
  if (coarse_dim < 8 || coarse_dim % 4 != 0) fail("coarse_dim must be >= 8 and divisible by 4");
  if (fine_dim < 8 || fine_dim % 4 != 0) fail("fine_dim must be >= 8 and divisible by 4");
  if (coarse_windows.empty() || coarse_windows.size() > 4) {
    fail("coarse_windows needs 1 to 4 scales");
  }
  for (int w : coarse_windows) {
    if (w < 4 || w > 512) fail("coarse window scales must lie in [4, 512]");
  }
  if (coarse_scale_weights.size() != coarse_windows.size()) {
    fail("coarse_scale_weights must match coarse_windows in length");
  }
  for (double w : coarse_scale_weights) {
    if (!(w > 0.0)) fail("coarse scale weights must be positive");
  }
  if (fine_window < 2) fail("fine descriptor window must be at least 2");
  if (fine_subdiv < 1 || fine_subdiv > 4) fail("fine_subdiv must lie in [1, 4]");
  if (!(temperature > 0.0) || !(fine_temperature > 0.0)) fail("temperatures must be positive");
  if (matching != "ot" && matching != "ds") fail("matching must be 'ot' or 'ds'");
  if (sinkhorn_iters < 1) fail("sinkhorn_iters must be positive");
  if (!(theta_c > 0.0) || !(theta_c < 1.0)) fail("theta_c must lie in (0, 1)");
  if (!(sigma_d > 0.0) || !(sigma_alpha > 0.0)) fail("sigma_d and sigma_alpha must be positive");
  if (lambda_c < 0.0 || lambda_c > 1.0) fail("lambda_c must lie in [0, 1]");
  if (k_nn < 1) fail("k_nn must be positive");
  if (window < 2) fail("correlation window must be at least 2");
  if (center_prior < 0.0) fail("center_prior must be non-negative");
  if (lambda_total < 0.0) fail("lambda_total must be non-negative");
  if (!(edge_low > 0.0) || !(edge_high > edge_low) || edge_high >= 1.0) {
    fail("edge thresholds need 0 < low < high < 1");
  }
  if (source_mode != "edge" && source_mode != "gray") fail("source_mode must be 'edge' or 'gray'");
  if (!(scale_min > 0.0) || scale_max < scale_min) fail("scale range must be ordered and positive");
  if (rotation_deg < 0.0 || corner_px < 0.0) fail("perturbation bounds must be non-negative");
  if (noise_edges < 0) fail("noise_edges must be non-negative");
  if (blur_sigma < 0.0) fail("blur_sigma must be non-negative");
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "width", "height", "n_patches", "n_coarse_layers", "coarse_dim",
      "coarse_windows", "coarse_scale_weights", "temperature", "matching",
      "sinkhorn_iters",
      "dustbin_score", "theta_c", "sigma_d", "sigma_alpha", "lambda_c", "k_nn",
      "n_fine_layers", "fine_dim", "fine_window", "fine_subdiv", "window", "fine_temperature",
      "center_prior",
      "lambda_total", "edge_low", "edge_high", "source_mode", "attention",
      "weights_file", "fusion_file", "scale_min", "scale_max", "rotation_deg",
      "corner_px", "noise_edges", "blur_sigma", "seed"};
  return keys;
}

}  // namespace

std::string PipelineConfig::to_json() const {
  json j;
  j["width"] = width;
  j["height"] = height;
  j["n_patches"] = n_patches;
  j["n_coarse_layers"] = n_coarse_layers;
  j["coarse_dim"] = coarse_dim;
  j["coarse_windows"] = coarse_windows;
  j["coarse_scale_weights"] = coarse_scale_weights;
  j["temperature"] = temperature;
  j["matching"] = matching;
  j["sinkhorn_iters"] = sinkhorn_iters;
  j["dustbin_score"] = dustbin_score;
  j["theta_c"] = theta_c;
  j["sigma_d"] = sigma_d;
  j["sigma_alpha"] = sigma_alpha;
  j["lambda_c"] = lambda_c;
  j["k_nn"] = k_nn;
  j["n_fine_layers"] = n_fine_layers;
  j["fine_dim"] = fine_dim;
  j["fine_window"] = fine_window;
  j["fine_subdiv"] = fine_subdiv;
  j["window"] = window;
  j["fine_temperature"] = fine_temperature;
  j["center_prior"] = center_prior;
  j["lambda_total"] = lambda_total;
  j["edge_low"] = edge_low;
  j["edge_high"] = edge_high;
  j["source_mode"] = source_mode;
  j["attention"] = attention;
  j["weights_file"] = weights_file;
  j["fusion_file"] = fusion_file;
  j["scale_min"] = scale_min;
  j["scale_max"] = scale_max;
  j["rotation_deg"] = rotation_deg;
  j["corner_px"] = corner_px;
  j["noise_edges"] = noise_edges;
  j["blur_sigma"] = blur_sigma;
  j["seed"] = seed;
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keys().count(key)) throw ConfigError("config: unknown key '" + key + "'");
  }

  PipelineConfig c;
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("width", c.width);
    get("height", c.height);
    get("n_patches", c.n_patches);
    get("n_coarse_layers", c.n_coarse_layers);
    get("coarse_dim", c.coarse_dim);
    get("coarse_windows", c.coarse_windows);
    get("coarse_scale_weights", c.coarse_scale_weights);
    get("temperature", c.temperature);
    get("matching", c.matching);
    get("sinkhorn_iters", c.sinkhorn_iters);
    get("dustbin_score", c.dustbin_score);
    get("theta_c", c.theta_c);
    get("sigma_d", c.sigma_d);
    get("sigma_alpha", c.sigma_alpha);
    get("lambda_c", c.lambda_c);
    get("k_nn", c.k_nn);
    get("n_fine_layers", c.n_fine_layers);
    get("fine_dim", c.fine_dim);
    get("fine_window", c.fine_window);
    get("fine_subdiv", c.fine_subdiv);
    get("window", c.window);
    get("fine_temperature", c.fine_temperature);
    get("center_prior", c.center_prior);
    get("lambda_total", c.lambda_total);
    get("edge_low", c.edge_low);
    get("edge_high", c.edge_high);
    get("source_mode", c.source_mode);
    get("attention", c.attention);
    get("weights_file", c.weights_file);
    get("fusion_file", c.fusion_file);
    get("scale_min", c.scale_min);
    get("scale_max", c.scale_max);
    get("rotation_deg", c.rotation_deg);
    get("corner_px", c.corner_px);
    get("noise_edges", c.noise_edges);
    get("blur_sigma", c.blur_sigma);
    get("seed", c.seed);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: bad value type: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void PipelineConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write " + path);
  out << to_json() << "\n";
}

}  // namespace tmatch
