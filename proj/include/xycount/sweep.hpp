#ifndef XYCOUNT_SWEEP_HPP
#define XYCOUNT_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "counting.hpp"
#include "moments.hpp"
#include "spectrum.hpp"

namespace xycount {

inline constexpr double kDefaultFdStep = 1e-3;

/// Number of pairs that contribute in the given counting mode.
inline std::size_t counted_pairs(const ModelParams& params, CountMode mode) {
  return mode == CountMode::total ? static_cast<std::size_t>(params.n_pairs())
                                  : every_second_pairs(params);
}

/**
  Moments of the counting distribution at one parameter point, in O(N).

  For the ferromagnetic sign the mean is replaced by N (1/2 - mean/N); the
  Fano factor then uses its magnitude.
*/
inline MomentSet point_moments(const ModelParams& params, CountMode mode) {
  const auto spectrum = build_spectrum(params);
  auto moments =
      moments_from_spectrum(spectrum, params.kappa, counted_pairs(params, mode));
  if (params.magnetic_sign == MagneticSign::ferromagnetic) {
    const double n = params.n_sites;
    moments.mean = n * ferromagnetic_mean(moments.mean / n);
    moments.fano = fano_factor(moments.mean, moments.variance);
  }
  return moments;
}

struct SweepRecord {
  ModelParams params;
  MomentSet moments;
  double mean_per_site = 0.0;
  double var_per_site = 0.0;
  double d_mean_dg = 0.0;
  double d_var_dg = 0.0;
  double fd_step = 0.0;
  Classification classification = Classification::poissonian_within_tol;
  /// |g - 1| < 10 fd_step: the stencil straddles the critical field.
  bool near_critical = false;
};

struct SweepOptions {
  CountMode mode = CountMode::total;
  unsigned threads = 1;
};

inline SweepRecord sweep_point(ModelParams params, double step, CountMode mode) {
  const double n = params.n_sites;
  SweepRecord rec;
  rec.params = params;
  rec.moments = point_moments(params, mode);
  rec.mean_per_site = rec.moments.mean / n;
  rec.var_per_site = rec.moments.variance / n;

  const double g = params.g;
  params.g = g + step;
  const auto hi = point_moments(params, mode);
  params.g = g - step;
  const auto lo = point_moments(params, mode);
  rec.d_mean_dg = (hi.mean - lo.mean) / (2.0 * step * n);
  rec.d_var_dg = (hi.variance - lo.variance) / (2.0 * step * n);
  rec.fd_step = step;
  rec.classification = classify(rec.moments.fano);
  rec.near_critical = std::abs(g - 1.0) < 10.0 * step;
  return rec;
}

/**
  Moments and central-difference g-derivatives of mean/N and var/N over a
  strictly increasing field grid. Grid points are independent and may be
  evaluated on several threads; the result is ordered by grid index and does
  not depend on the thread count.
*/
inline std::vector<SweepRecord> derivative_sweep(const ModelParams& tmpl,
                                                 std::span<const double> g_grid,
                                                 double step,
                                                 SweepOptions options = {}) {
  tmpl.validate();
  if (g_grid.empty()) throw InvalidInput("g grid is empty");
  if (!(step > 0.0) || !std::isfinite(step))
    throw InvalidInput("finite-difference step must be positive");
  for (std::size_t i = 0; i < g_grid.size(); ++i) {
    if (!std::isfinite(g_grid[i])) throw InvalidInput("g grid must be finite");
    if (i > 0) {
      const double spacing = g_grid[i] - g_grid[i - 1];
      if (!(spacing > 0.0))
        throw InvalidInput("g grid must be strictly increasing");
      if (!(step < spacing))
        throw InvalidInput("finite-difference step must be below grid spacing");
    }
  }
  if (options.mode == CountMode::every_second) every_second_pairs(tmpl);

  std::vector<SweepRecord> out(g_grid.size());
  auto eval = [&](std::size_t i) {
    ModelParams p = tmpl;
    p.g = g_grid[i];
    out[i] = sweep_point(p, step, options.mode);
  };

  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, options.threads), g_grid.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < g_grid.size(); ++i) eval(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < g_grid.size(); i = next++) {
          try {
            eval(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// Field values (midpoints) where the Poissonian classification changes.
inline std::vector<double> classification_changes(
    std::span<const SweepRecord> records) {
  std::vector<double> out;
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].classification != records[i - 1].classification)
      out.push_back(0.5 * (records[i].params.g + records[i - 1].params.g));
  return out;
}

}  // namespace xycount

#endif  // XYCOUNT_SWEEP_HPP
