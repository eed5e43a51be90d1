#include "tmatch/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "tmatch/consistency.hpp"
#include "tmatch/contour.hpp"
#include "tmatch/edges.hpp"
#include "tmatch/rng.hpp"
#include "tmatch/sampling.hpp"

namespace fs = std::filesystem;

namespace tmatch {

namespace {

constexpr std::uint64_t kLiftStream = 0x4c494654;     // descriptor lift
constexpr std::uint64_t kCoarseWStream = 0x43575453;  // coarse transformer
constexpr std::uint64_t kFineWStream = 0x46575453;    // fine global transformer
constexpr std::uint64_t kLocalWStream = 0x4c575453;   // fine local transformer

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

TokenSet tokens_from_cells(const DescriptorGrid& grid, const std::vector<int>& cell_indices,
                           TokenSide side) {
  TokenSet ts;
  ts.side = side;
  ts.descriptors.resize(static_cast<Eigen::Index>(cell_indices.size()), grid.dim);
  ts.positions.reserve(cell_indices.size());
  for (std::size_t k = 0; k < cell_indices.size(); ++k) {
    const int idx = cell_indices[k];
    ts.descriptors.row(static_cast<Eigen::Index>(k)) = grid.d.row(idx);
    ts.positions.emplace_back(idx % grid.cells_x, idx / grid.cells_x);
  }
  return ts;
}

TokenSet tokens_all_cells(const DescriptorGrid& grid, TokenSide side) {
  TokenSet ts;
  ts.side = side;
  ts.descriptors = grid.d;
  ts.positions.reserve(static_cast<std::size_t>(grid.cells_x) * grid.cells_y);
  for (int gy = 0; gy < grid.cells_y; ++gy)
    for (int gx = 0; gx < grid.cells_x; ++gx) ts.positions.emplace_back(gx, gy);
  return ts;
}

struct FineOutcome {
  Homography h_coarse;
  Homography h_final;
  bool fine_fallback = false;
  std::vector<FineMatch> fine;
  WeightedMatchSet final_matches;
};

}  // namespace

EdgeImage load_source_edges(const std::string& path, const PipelineConfig& cfg) {
  if (cfg.source_mode == "gray") {
    return detect_edges(read_pgm(path), cfg.edge_config());
  }
  return read_edge_pgm(path, cfg.edge_low);
}

PipelineResult run_pipeline(const MaskImage& tmpl, const GrayImage& source_gray,
                            const PipelineConfig& cfg, const RunOptions& opts) {
  return run_pipeline(tmpl, detect_edges(source_gray, cfg.edge_config()), cfg, opts);
}

PipelineResult run_pipeline(const MaskImage& tmpl, const EdgeImage& source_edges,
                            const PipelineConfig& cfg, const RunOptions& opts) {
  PipelineResult res;
  const auto t_start = std::chrono::steady_clock::now();
  try {
    // -- translation: both inputs become edge maps
    const EdgeImage t_edges = mask_to_edges(tmpl);
    const EdgeImage& i_edges = source_edges;

    // -- coarse grids and template patch sampling
    const PatchGrid t_grid = build_patch_grid(t_edges, 8);
    const PatchGrid i_grid = build_patch_grid(i_edges, 8);

    std::vector<int> edge_cells;
    std::vector<Eigen::Vector2d> edge_centers;
    for (std::size_t i = 0; i < t_grid.cells.size(); ++i) {
      if (t_grid.cells[i].contains_edge) {
        edge_cells.push_back(static_cast<int>(i));
        edge_centers.push_back(t_grid.cells[i].center);
      }
    }
    if (edge_cells.empty()) throw PipelineDegenerate("template has no edge cells");

    const std::vector<int> picks =
        fps(edge_centers, cfg.n_patches, centroid_seed_index(edge_centers));
    std::vector<int> sampled_cells;
    sampled_cells.reserve(picks.size());
    for (int p : picks) sampled_cells.push_back(edge_cells[p]);

    // -- coarse descriptors
    const std::uint64_t lift_seed = derive_seed(cfg.seed, kLiftStream);
    std::vector<std::uint8_t> t_needed(t_grid.cells.size(), 0);
    for (int c : sampled_cells) t_needed[c] = 1;
    const DescriptorGrid t_coarse =
        context_grid(t_edges, 8, cfg.coarse_windows, cfg.coarse_scale_weights,
                     cfg.coarse_dim, lift_seed, &t_needed);
    const DescriptorGrid i_coarse = context_grid(i_edges, 8, cfg.coarse_windows,
                                                 cfg.coarse_scale_weights, cfg.coarse_dim,
                                                 lift_seed);

    TokenSet t_tokens = tokens_from_cells(t_coarse, sampled_cells, TokenSide::Template);
    TokenSet i_tokens = tokens_all_cells(i_coarse, TokenSide::Image);
    res.n_template_tokens = t_tokens.size();
    res.n_image_tokens = i_tokens.size();

    // -- transformer aggregation
    if (cfg.attention && cfg.n_coarse_layers > 0) {
      const TransformerWeights w =
          cfg.weights_file.empty()
              ? TransformerWeights::seeded(cfg.n_coarse_layers, cfg.coarse_dim,
                                           derive_seed(cfg.seed, kCoarseWStream))
              : load_weights(cfg.weights_file);
      auto [t_tr, i_tr] = run_transformer(t_tokens, i_tokens, w);
      t_tokens = std::move(t_tr);
      i_tokens = std::move(i_tr);
    }

    // -- differentiable matching
    const ScoreMatrix sm = score_matrix(t_tokens, i_tokens, cfg.temperature);
    const AssignmentMatrix assign = cfg.match_method() == MatchMethod::DualSoftmax
                                        ? dual_softmax(sm)
                                        : sinkhorn(sm, cfg.sinkhorn_iters, cfg.dustbin_score);
    res.coarse = mnn_filter(assign, cfg.theta_c);
    const int k = static_cast<int>(res.coarse.pairs.size());
    if (k < 4) {
      throw PipelineDegenerate("only " + std::to_string(k) + " coarse matches");
    }

    for (const auto& pm : res.coarse.pairs) {
      const int t_cell = sampled_cells[pm.t_index];
      res.coarse_t_px.push_back(t_grid.cells[t_cell].center);
      // Sub-cell image position: confidence-weighted centroid over the
      // winning cell's 3x3 neighborhood. Cell centers alone quantize the
      // correspondence to the stride, which the later stages cannot undo.
      const int jx = pm.i_index % i_grid.cells_x, jy = pm.i_index / i_grid.cells_x;
      Eigen::Vector2d num = Eigen::Vector2d::Zero();
      double den = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = jx + dx, ny = jy + dy;
          if (nx < 0 || nx >= i_grid.cells_x || ny < 0 || ny >= i_grid.cells_y) continue;
          const double m = assign.c(pm.t_index, ny * i_grid.cells_x + nx);
          num += m * i_grid.at(nx, ny).center;
          den += m;
        }
      }
      res.coarse_i_px.push_back(den > 0.0 ? Eigen::Vector2d(num / den)
                                          : i_grid.cells[pm.i_index].center);
      res.s.push_back(std::clamp(pm.score, 0.0, 1.0));
    }

    // -- consistency weighting
    Eigen::VectorXd e = Eigen::VectorXd::Ones(k);
    if (opts.use_consistency_weights) {
      try {
        const Eigen::MatrixXd compat =
            build_compat_matrix(res.coarse_t_px, res.coarse_i_px, cfg.consistency_params());
        e = leading_eigenvector(compat);
      } catch (const TooFewMatches&) {
        // fall back to feature scores alone
      }
    }
    res.e.assign(e.data(), e.data() + e.size());
    res.coarse_ms = ms_since(t_start);

    // -- shared fine-stage inputs
    const auto t_fine_start = std::chrono::steady_clock::now();
    const int fine_cells_x = (t_edges.width + 1) / 2;
    const int fine_cells_y = (t_edges.height + 1) / 2;
    const int lo = -((cfg.window - 1) / 2);
    const int reach = std::max(-lo, lo + cfg.window - 1);
    std::vector<std::uint8_t> fine_needed(
        static_cast<std::size_t>(fine_cells_x) * fine_cells_y, 0);
    for (int cell : sampled_cells) {
      const int gx0 = (cell % t_grid.cells_x) * 4, gy0 = (cell / t_grid.cells_x) * 4;
      for (int gy = gy0 - reach; gy < gy0 + 4 + reach; ++gy) {
        for (int gx = gx0 - reach; gx < gx0 + 4 + reach; ++gx) {
          if (gx >= 0 && gx < fine_cells_x && gy >= 0 && gy < fine_cells_y) {
            fine_needed[static_cast<std::size_t>(gy) * fine_cells_x + gx] = 1;
          }
        }
      }
    }
    // Spatial subdivision matters here: a plain orientation histogram cannot
    // tell where an edge sits inside the window, which leaves whole runs of
    // contour cells exactly tied in the correlation step.
    const DescriptorGrid t_fine = describe_grid(t_edges, 2, cfg.fine_window, cfg.fine_dim,
                                                cfg.fine_subdiv, lift_seed, &fine_needed);

    std::vector<Eigen::Vector2i> edge_px;
    for (int cell : sampled_cells) {
      const int x0 = (cell % t_grid.cells_x) * 8, y0 = (cell / t_grid.cells_x) * 8;
      const int x1 = std::min(x0 + 8, t_edges.width), y1 = std::min(y0 + 8, t_edges.height);
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          if (t_edges.edge_at(x, y)) edge_px.emplace_back(x, y);
    }
    std::sort(edge_px.begin(), edge_px.end(), [](const auto& a, const auto& b) {
      return a.y() != b.y() ? a.y() < b.y() : a.x() < b.x();
    });

    const FusionWeights fusion =
        cfg.fusion_file.empty() ? FusionWeights::identity_fine(cfg.coarse_dim, cfg.fine_dim)
                                : load_fusion_weights(cfg.fusion_file);
    const bool fine_attention = cfg.attention && cfg.n_fine_layers > 0;
    const TransformerWeights fine_global_w =
        fine_attention ? TransformerWeights::seeded(cfg.n_fine_layers, cfg.coarse_dim,
                                                    derive_seed(cfg.seed, kFineWStream))
                       : TransformerWeights();
    const TransformerWeights local_w =
        fine_attention ? TransformerWeights::seeded(cfg.n_fine_layers, cfg.fine_dim,
                                                    derive_seed(cfg.seed, kLocalWStream))
                       : TransformerWeights();

    // Runs coarse DLT with the given per-match weights, then the whole
    // fine stage against the re-warped source.
    auto complete = [&](const Eigen::VectorXd& weights_e) {
      FineOutcome out;
      std::vector<PointMatch> coarse_pm;
      coarse_pm.reserve(k);
      for (int i = 0; i < k; ++i) coarse_pm.push_back({res.coarse_t_px[i], res.coarse_i_px[i]});
      const WeightedMatchSet coarse_ms = combine_weights(std::move(coarse_pm), res.s, weights_e);
      out.h_coarse = dlt_weighted(coarse_ms);

      const Homography h_align = invert(out.h_coarse);
      const WarpedImage warped =
          warp_image(i_edges, h_align, cfg.edge_low, t_edges.width, t_edges.height);

      const DescriptorGrid iw_fine = describe_grid(warped.image, 2, cfg.fine_window,
                                                   cfg.fine_dim, cfg.fine_subdiv,
                                                   lift_seed, &fine_needed);
      const DescriptorGrid iw_coarse =
          context_grid(warped.image, 8, cfg.coarse_windows, cfg.coarse_scale_weights,
                       cfg.coarse_dim, lift_seed, &t_needed);
      TokenSet t_fuse = tokens_from_cells(t_coarse, sampled_cells, TokenSide::Template);
      TokenSet iw_fuse = tokens_from_cells(iw_coarse, sampled_cells, TokenSide::Image);
      if (fine_attention) {
        auto [t_tr, iw_tr] = run_transformer(t_fuse, iw_fuse, fine_global_w);
        t_fuse = std::move(t_tr);
        iw_fuse = std::move(iw_tr);
      }
      const DescriptorGrid f_t = fuse_features(t_fuse, t_fine, fusion);
      const DescriptorGrid f_iw = fuse_features(iw_fuse, iw_fine, fusion);

      // One heatmap per fine cell; pixels within a cell share offset/variance.
      std::map<int, std::optional<std::pair<Eigen::Vector2d, double>>> cell_memo;
      for (const auto& px : edge_px) {
        const int cx = px.x() / 2, cy = px.y() / 2;
        const int cell_idx = cy * f_t.cells_x + cx;
        auto it = cell_memo.find(cell_idx);
        if (it == cell_memo.end()) {
          std::optional<std::pair<Eigen::Vector2d, double>> entry;
          if (fine_attention) {
            const auto t_win = crop_window(f_t, px, cfg.window);
            const auto i_win = crop_window(f_iw, px, cfg.window);
            if (t_win && i_win) {
              TokenSet tw, iw;
              tw.side = TokenSide::Template;
              iw.side = TokenSide::Image;
              tw.descriptors = *t_win;
              iw.descriptors = *i_win;
              for (int r = 0; r < cfg.window; ++r)
                for (int c = 0; c < cfg.window; ++c) {
                  tw.positions.emplace_back(cx + lo + c, cy + lo + r);
                  iw.positions.emplace_back(cx + lo + c, cy + lo + r);
                }
              auto [t_tr, i_tr] = run_transformer(tw, iw, local_w);
              const FineMatch fm =
                  subpixel_from_windows(t_tr.descriptors, i_tr.descriptors, cfg.window,
                                        cfg.fine_temperature, px.cast<double>(), 2,
                                        cfg.center_prior);
              entry = std::make_pair(fm.offset, fm.variance);
            }
          } else {
            const auto fm = subpixel_match(f_t, f_iw, px, cfg.window, cfg.fine_temperature,
                                           cfg.center_prior);
            if (fm) entry = std::make_pair(fm->offset, fm->variance);
          }
          it = cell_memo.emplace(cell_idx, entry).first;
        }
        if (!it->second) continue;  // border skip
        FineMatch fm;
        fm.i_px = px.cast<double>();
        fm.offset = it->second->first;
        fm.variance = it->second->second;
        fm.j_warped_px = fm.i_px + fm.offset * 2.0;
        out.fine.push_back(fm);
      }

      if (out.fine.size() >= 4) {
        try {
          out.final_matches = finalize_matches(out.fine, h_align);
          out.h_final = estimate_final_homography(out.final_matches);
        } catch (const Error&) {
          out.h_final = out.h_coarse;
          out.fine_fallback = true;
        }
      } else {
        out.h_final = out.h_coarse;
        out.fine_fallback = true;
      }
      return out;
    };

    FineOutcome main_out = complete(e);
    res.h_coarse = main_out.h_coarse;
    res.h_final = main_out.h_final;
    res.fine_fallback = main_out.fine_fallback;
    res.fine = std::move(main_out.fine);
    res.final_matches = std::move(main_out.final_matches);

    std::vector<PointMatch> dummy;
    for (int i = 0; i < k; ++i) dummy.push_back({res.coarse_t_px[i], res.coarse_i_px[i]});
    const WeightedMatchSet coarse_ms = combine_weights(std::move(dummy), res.s, e);
    res.w = coarse_ms.w;

    if (opts.also_unweighted) {
      try {
        res.h_final_unweighted = complete(Eigen::VectorXd::Ones(k)).h_final;
      } catch (const Error&) {
        res.h_final_unweighted.reset();
      }
    }

    res.fine_ms = ms_since(t_fine_start);
    res.total_ms = ms_since(t_start);
    res.ok = true;
  } catch (const Error& err) {
    res.ok = false;
    res.failure = err.what();
    res.total_ms = ms_since(t_start);
  }
  return res;
}

void write_artifacts(const std::string& out_dir, const PipelineResult& result,
                     const MaskImage& tmpl, const EdgeImage& source_edges) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  {
    std::ofstream out(fs::path(out_dir) / "homography.txt");
    if (!out) throw IoFailure("cannot write homography.txt");
    if (result.ok) out << to_line(result.h_final) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "coarse_matches.txt");
    for (std::size_t i = 0; i < result.coarse.pairs.size(); ++i) {
      const auto& t = result.coarse_t_px[i];
      const auto& im = result.coarse_i_px[i];
      // grid coordinates at stride 8
      out << static_cast<int>(t.x()) / 8 << " " << static_cast<int>(t.y()) / 8 << " "
          << static_cast<int>(im.x()) / 8 << " " << static_cast<int>(im.y()) / 8 << " "
          << result.w[i] << "\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "fine_matches.txt");
    for (std::size_t i = 0; i < result.fine.size(); ++i) {
      const auto& fm = result.fine[i];
      const Eigen::Vector2d j = result.final_matches.matches.empty()
                                    ? fm.j_warped_px
                                    : result.final_matches.matches[i].p_i;
      out << fm.i_px.x() << " " << fm.i_px.y() << " " << j.x() << " " << j.y() << " "
          << fm.variance << "\n";
    }
  }
  {
    // Source edges in mid-gray, projected template contour at full white.
    GrayImage overlay(source_edges.width, source_edges.height);
    for (std::size_t i = 0; i < overlay.data.size(); ++i) {
      overlay.data[i] = 0.5 * source_edges.strength[i];
    }
    if (result.ok) {
      try {
        const EdgeImage t_edges = mask_to_edges(tmpl);
        for (int y = 0; y < t_edges.height; ++y) {
          for (int x = 0; x < t_edges.width; ++x) {
            if (!t_edges.edge_at(x, y)) continue;
            const Eigen::Vector2d p = apply_homography(
                result.h_final, {static_cast<double>(x), static_cast<double>(y)});
            const int px = static_cast<int>(std::lround(p.x()));
            const int py = static_cast<int>(std::lround(p.y()));
            if (overlay.in_bounds(px, py)) overlay.at(px, py) = 1.0;
          }
        }
      } catch (const Error&) {
        // leave the plain source overlay
      }
    }
    write_pgm((fs::path(out_dir) / "overlay.pgm").string(), overlay);
  }
}

}  // namespace tmatch
