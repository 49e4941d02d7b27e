#ifndef XYCOUNT_SPECTRUM_HPP
#define XYCOUNT_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "model.hpp"

namespace xycount {

/// Below this quasiparticle energy scale a mode sits exactly on a Fermi point.
inline constexpr double kDegenerateLambda = 1e-14;

/**
  Bogoliubov data of one momentum pair (k, N-k).

  v_sq is the probability that the pair is occupied in the ground state;
  u_sq is derived so that u_sq + v_sq == 1 holds exactly.
*/
struct PairMode {
  double phi = 0.0;
  double v_sq = 0.0;
  double epsilon = 0.0;
  bool degenerate = false;

  double u_sq() const { return 1.0 - v_sq; }
};

struct ModeOccupation {
  double v_sq;
  double lambda;
  bool degenerate;
};

// Half-angle form 1/2 (1 - x/Lambda) with x = cos(phi) - g. The branch is the
// one whose d-vacuum fills every pair as g -> infinity.
inline ModeOccupation mode_occupation(double phi, double gamma, double g) {
  const double x = std::cos(phi) - g;
  const double y = gamma * std::sin(phi);
  const double lambda = std::hypot(x, y);
  if (lambda < kDegenerateLambda) return {0.5, lambda, true};
  return {std::clamp(0.5 * (1.0 - x / lambda), 0.0, 1.0), lambda, false};
}

/// Ordered list of pair modes k = 1 .. n_pairs plus the parameters that made it.
class PairSpectrum {
 public:
  PairSpectrum() = default;
  PairSpectrum(ModelParams params, std::vector<PairMode> modes)
      : params_(params), modes_(std::move(modes)) {}

  /// Spectrum built directly from pair occupations (synthetic or perturbed).
  static PairSpectrum from_occupations(std::span<const double> v_sq) {
    std::vector<PairMode> modes;
    modes.reserve(v_sq.size());
    for (std::size_t i = 0; i < v_sq.size(); ++i) {
      if (!(v_sq[i] >= 0.0 && v_sq[i] <= 1.0))
        throw InvalidInput("pair occupation outside [0,1]");
      modes.push_back({0.0, v_sq[i], 0.0, false});
    }
    ModelParams p;
    p.n_sites = static_cast<int>(2 * std::max<std::size_t>(1, v_sq.size()));
    return PairSpectrum(p, std::move(modes));
  }

  const ModelParams& params() const { return params_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }
  const PairMode& operator[](std::size_t i) const { return modes_[i]; }
  auto begin() const { return modes_.begin(); }
  auto end() const { return modes_.end(); }
  std::span<const PairMode> modes() const { return modes_; }

  bool has_degenerate_mode() const {
    return std::any_of(modes_.begin(), modes_.end(),
                       [](const PairMode& m) { return m.degenerate; });
  }

 private:
  ModelParams params_;
  std::vector<PairMode> modes_;
};

/**
  Pair spectrum of the periodic chain: phi_k = 2 pi k / N for k = 1 .. N/2.

  The k = 0 mode is not part of the list and k = N/2 enters as an ordinary
  pair, matching the product form of the counting generating function.
*/
inline PairSpectrum build_spectrum(const ModelParams& params) {
  params.validate();
  const int n = params.n_sites;
  std::vector<PairMode> modes;
  modes.reserve(static_cast<std::size_t>(n / 2));
  for (int k = 1; k <= n / 2; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    const auto occ = mode_occupation(phi, params.gamma, params.g);
    modes.push_back({phi, occ.v_sq, 2.0 * occ.lambda, occ.degenerate});
  }
  return PairSpectrum(params, std::move(modes));
}

/// Smallest quasiparticle energy on the discrete momentum grid (units of J).
inline double spectral_gap(const ModelParams& params) {
  const auto spectrum = build_spectrum(params);
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& m : spectrum) gap = std::min(gap, m.epsilon);
  return gap;
}

}  // namespace xycount

#endif  // XYCOUNT_SPECTRUM_HPP
