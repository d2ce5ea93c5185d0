#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

#include "obscura/error.hpp"
#include "obscura/restore.hpp"

namespace obscura {
namespace {

struct Span1D {
  std::size_t begin;
  std::size_t length;
};

// Tile starts along one axis; the last tile is aligned to the far edge.
std::vector<Span1D> tile_spans(std::size_t extent, std::size_t tile, std::size_t overlap) {
  if (extent <= tile) return {{0, extent}};
  const std::size_t stride = tile - overlap;
  std::vector<Span1D> spans;
  for (std::size_t start = 0;; start += stride) {
    if (start + tile >= extent) {
      spans.push_back({extent - tile, tile});
      break;
    }
    spans.push_back({start, tile});
  }
  return spans;
}

// Blend weight of sample `i` inside a tile span: raised-cosine ramps across
// the overlap on sides that touch another tile, 1 elsewhere.
double blend_weight(std::size_t i, const Span1D& span, std::size_t extent, std::size_t overlap) {
  double w = 1.0;
  const double ramp_len = static_cast<double>(overlap);
  if (span.begin > 0 && i < overlap) {
    w *= 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) / ramp_len);
  }
  const std::size_t from_end = span.length - 1 - i;
  if (span.begin + span.length < extent && from_end < overlap) {
    w *= 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(from_end) + 0.5) / ramp_len);
  }
  return w;
}

void merge_reports(RestoreReport& into, const RestoreReport& tile) {
  into.method = tile.method;
  into.final_objective += tile.final_objective;
  into.converged = into.converged && tile.converged;
  const auto n = static_cast<std::size_t>(tile.iterations_run);
  if (into.primal_residuals.size() < n) {
    into.primal_residuals.resize(n, 0.0);
    into.dual_residuals.resize(n, 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    into.primal_residuals[i] = std::max(into.primal_residuals[i], tile.primal_residuals[i]);
    into.dual_residuals[i] = std::max(into.dual_residuals[i], tile.dual_residuals[i]);
  }
  into.iterations_run = std::max(into.iterations_run, tile.iterations_run);
}

}  // namespace

RestoreResult restore_tiled(const PlanarImage& image, const Psf& psf, const OpticalConfig& cfg,
                            const RestoreMethod& method, const PipelineOptions& options, const TileOptions& tiles) {
  if (tiles.tile_size == 0 || tiles.overlap * 2 > tiles.tile_size) {
    throw InvalidArgument("tile size must be positive and at least twice the overlap");
  }
  const std::size_t h = image.height();
  const std::size_t w = image.width();
  const auto rows = tile_spans(h, tiles.tile_size, tiles.overlap);
  const auto cols = tile_spans(w, tiles.tile_size, tiles.overlap);
  const std::size_t margin = std::max(psf.radius_rows(), psf.radius_cols()) + options.taper_width;

  PlanarImage accum(image.channels(), h, w);
  Plane weight_sum(h, w);
  RestoreReport report;
  report.converged = true;

  const std::size_t count = rows.size() * cols.size();
  std::size_t workers = tiles.workers != 0 ? tiles.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);

  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::condition_variable committed_cv;
  std::size_t committed = 0;
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= count) return;
      const Span1D rs = rows[index / cols.size()];
      const Span1D cs = cols[index % cols.size()];
      RestoreResult tile;
      std::exception_ptr error;
      try {
        const std::size_t r0 = rs.begin >= margin ? rs.begin - margin : 0;
        const std::size_t c0 = cs.begin >= margin ? cs.begin - margin : 0;
        const std::size_t r1 = std::min(h, rs.begin + rs.length + margin);
        const std::size_t c1 = std::min(w, cs.begin + cs.length + margin);
        tile = restore_pipeline(image.crop(r0, c0, r1 - r0, c1 - c0), psf, cfg, method, options);
        tile.image = tile.image.crop(rs.begin - r0, cs.begin - c0, rs.length, cs.length);
      } catch (...) {
        error = std::current_exception();
      }
      // Commit tiles strictly in index order so overlapping sums are
      // bit-identical whatever the worker count.
      std::unique_lock lock(mutex);
      committed_cv.wait(lock, [&] { return committed == index; });
      if (error && !failure) failure = error;
      if (!failure) {
        for (std::size_t r = 0; r < rs.length; ++r) {
          const double wr = blend_weight(r, rs, h, tiles.overlap);
          for (std::size_t c = 0; c < cs.length; ++c) {
            const double wgt = wr * blend_weight(c, cs, w, tiles.overlap);
            weight_sum(rs.begin + r, cs.begin + c) += wgt;
            for (std::size_t ch = 0; ch < image.channels(); ++ch) {
              accum.at(ch, rs.begin + r, cs.begin + c) += wgt * tile.image.at(ch, r, c);
            }
          }
        }
        merge_reports(report, tile.report);
      }
      ++committed;
      committed_cv.notify_all();
    }
  };

  std::vector<std::jthread> pool;
  for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);

  for (std::size_t ch = 0; ch < accum.channels(); ++ch) {
    auto values = accum.channel(ch).values();
    const auto weights = weight_sum.values();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] /= weights[i];
  }
  report.reblur_mse = reblur_residual(accum, image, psf);
  return {std::move(accum), std::move(report)};
}

RestoreResult restore_auto(const PlanarImage& image, const Psf& psf, const OpticalConfig& cfg,
                           const RestoreMethod& method, const PipelineOptions& options, const TileOptions& tiles) {
  if (image.height() * image.width() > tiles.area_threshold) {
    return restore_tiled(image, psf, cfg, method, options, tiles);
  }
  return restore_pipeline(image, psf, cfg, method, options);
}

}  // namespace obscura
