#ifndef XYCOUNT_MOMENTS_HPP
#define XYCOUNT_MOMENTS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>

#include "counting.hpp"
#include "spectrum.hpp"

namespace xycount {

/// Parity contrast above which a distribution counts as even/odd split.
inline constexpr double kSplitThreshold = 0.1;
/// Half-width of the band around Fano = 1 classified as Poissonian.
inline constexpr double kPoissonTolerance = 1e-9;

enum class Classification { sub_poissonian, super_poissonian, poissonian_within_tol };

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::sub_poissonian: return "sub_poissonian";
    case Classification::super_poissonian: return "super_poissonian";
    default: return "poissonian_within_tol";
  }
}

struct MomentSet {
  double mean = 0.0;
  double variance = 0.0;
  /// variance / |mean|; empty when the mean vanishes.
  std::optional<double> fano;
  /// Cumulants of order 2, 3 and 4.
  std::array<double, 3> cumulants{};
  double parity_sum = 1.0;
};

inline std::optional<double> fano_factor(double mean, double variance) {
  if (mean == 0.0) return std::nullopt;
  return variance / std::abs(mean);
}

// A point mass at zero is the zero-mean Poisson law, hence the fallback.
inline Classification classify(const std::optional<double>& fano,
                               double tol = kPoissonTolerance) {
  if (!fano) return Classification::poissonian_within_tol;
  if (*fano < 1.0 - tol) return Classification::sub_poissonian;
  if (*fano > 1.0 + tol) return Classification::super_poissonian;
  return Classification::poissonian_within_tol;
}

/// m(M+1) = m(M) + 2 kappa v_{M+1}^2, summed over the first n_pairs pairs.
inline double mean_by_recurrence(const PairSpectrum& spectrum, double kappa,
                                 std::size_t n_pairs) {
  require_kappa(kappa);
  detail::check_pairs(spectrum, n_pairs);
  double mean = 0.0;
  for (std::size_t k = 0; k < n_pairs; ++k)
    mean += 2.0 * kappa * spectrum[k].v_sq;
  return mean;
}

/// Variance of one thinned pair: 2 kappa v^2 + 2 kappa^2 v^2 (1 - 2 v^2).
inline double pair_variance(double v_sq, double kappa) {
  return 2.0 * kappa * v_sq + 2.0 * kappa * kappa * v_sq * (1.0 - 2.0 * v_sq);
}

/// Sum of per-pair trinomial variances; pairs are independent.
inline double variance_exact(const PairSpectrum& spectrum, double kappa,
                             std::size_t n_pairs) {
  require_kappa(kappa);
  detail::check_pairs(spectrum, n_pairs);
  double var = 0.0;
  for (std::size_t k = 0; k < n_pairs; ++k)
    var += pair_variance(spectrum[k].v_sq, kappa);
  return var;
}

/**
  var(M+1) = var(M) + 4 kappa^2 v^2 (1 - v^2).

  The perfect-detection variance scaled by kappa^2. Agrees with
  variance_exact only at kappa = 1.
*/
inline double variance_scaled_recurrence(const PairSpectrum& spectrum,
                                        double kappa, std::size_t n_pairs) {
  require_kappa(kappa);
  detail::check_pairs(spectrum, n_pairs);
  double var = 0.0;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const double v = spectrum[k].v_sq;
    var += 4.0 * kappa * kappa * v * (1.0 - v);
  }
  return var;
}

/// Central moments by direct summation over the distribution.
inline MomentSet cumulants_from_distribution(const CountDistribution& dist) {
  const double mean = dist.mean();
  double mu2 = 0.0, mu3 = 0.0, mu4 = 0.0, even = 0.0, odd = 0.0;
  for (std::size_t m = 0; m < dist.size(); ++m) {
    (m % 2 ? odd : even) += dist[m];
    const double d = static_cast<double>(m) - mean;
    const double d2 = d * d;
    mu2 += d2 * dist[m];
    mu3 += d2 * d * dist[m];
    mu4 += d2 * d2 * dist[m];
  }
  MomentSet out;
  out.mean = mean;
  out.variance = mu2;
  out.fano = fano_factor(mean, mu2);
  out.cumulants = {mu2, mu3, mu4 - 3.0 * mu2 * mu2};
  out.parity_sum = (even - odd) / (even + odd);
  return out;
}

/**
  Moments of the first n_pairs pairs without building the distribution:
  cumulants of independent pairs add and the parity sum is the product of
  per-pair values 1 - 4 kappa (1 - kappa) v^2.
*/
inline MomentSet moments_from_spectrum(const PairSpectrum& spectrum,
                                       double kappa, std::size_t n_pairs) {
  require_kappa(kappa);
  detail::check_pairs(spectrum, n_pairs);
  MomentSet out;
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const auto d = pair_probs(spectrum[k].v_sq, kappa);
    const double mu = d.p1 + 2.0 * d.p2;
    const double a = -mu, b = 1.0 - mu, c = 2.0 - mu;
    const double m2 = d.p0 * a * a + d.p1 * b * b + d.p2 * c * c;
    const double m3 = d.p0 * a * a * a + d.p1 * b * b * b + d.p2 * c * c * c;
    const double m4 =
        d.p0 * a * a * a * a + d.p1 * b * b * b * b + d.p2 * c * c * c * c;
    out.mean += mu;
    out.cumulants[0] += m2;
    out.cumulants[1] += m3;
    out.cumulants[2] += m4 - 3.0 * m2 * m2;
    out.parity_sum *= 1.0 - 4.0 * kappa * (1.0 - kappa) * spectrum[k].v_sq;
  }
  out.variance = out.cumulants[0];
  out.fano = fano_factor(out.mean, out.variance);
  return out;
}

/// Closed form of sum_m (-1)^m p(m): prod_k (1 - 4 kappa (1 - kappa) v_k^2).
inline double parity_product(const PairSpectrum& spectrum, double kappa,
                             std::size_t n_pairs) {
  require_kappa(kappa);
  detail::check_pairs(spectrum, n_pairs);
  double prod = 1.0;
  for (std::size_t k = 0; k < n_pairs; ++k)
    prod *= 1.0 - 4.0 * kappa * (1.0 - kappa) * spectrum[k].v_sq;
  return prod;
}

/// (even mass - odd mass) / total mass; normalization drift cancels.
inline double parity_contrast(const CountDistribution& dist) {
  double even = 0.0, odd = 0.0;
  for (std::size_t m = 0; m < dist.size(); ++m) (m % 2 ? odd : even) += dist[m];
  return (even - odd) / (even + odd);
}

inline bool is_split(double contrast, double threshold = kSplitThreshold) {
  return contrast > threshold;
}

/// Mean per site after switching to the ferromagnetic sign; variance is unchanged.
inline double ferromagnetic_mean(double mean_per_site) {
  return 0.5 - mean_per_site;
}

}  // namespace xycount

#endif  // XYCOUNT_MOMENTS_HPP
