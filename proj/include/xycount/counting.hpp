#ifndef XYCOUNT_COUNTING_HPP
#define XYCOUNT_COUNTING_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "spectrum.hpp"

namespace xycount {

enum class CountMode { total, every_second };

inline std::string_view to_string(CountMode m) {
  return m == CountMode::total ? "total" : "every-second";
}

/// Probabilities of registering 0, 1 or 2 particles from one mode pair.
struct PairDetection {
  double p0 = 1.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

/**
  Detection probabilities of a pair occupied with probability v_sq, each
  particle counted independently with probability kappa.
*/
inline PairDetection pair_probs(double v_sq, double kappa) {
  const double p2 = kappa * kappa * v_sq;
  const double p1 = 2.0 * kappa * (1.0 - kappa) * v_sq;
  // (1 - v^2) + v^2 (1 - kappa)^2, never formed as 1 - p1 - p2.
  const double miss = 1.0 - kappa;
  const double p0 = (1.0 - v_sq) + v_sq * miss * miss;
  return {p0, p1, p2};
}

/**
  Probability vector p(0 .. m_max) of a counting experiment with summary
  statistics computed once at construction.
*/
class CountDistribution {
 public:
  CountDistribution() : CountDistribution({1.0}, CountMode::total, {}) {}
  CountDistribution(std::vector<double> probs, CountMode mode,
                    ModelParams params)
      : probs_(std::move(probs)), mode_(mode), params_(params) {
    double mean = 0.0, parity = 0.0;
    for (std::size_t m = 0; m < probs_.size(); ++m) {
      mean += static_cast<double>(m) * probs_[m];
      parity += (m % 2 == 0 ? probs_[m] : -probs_[m]);
    }
    double var = 0.0;
    for (std::size_t m = 0; m < probs_.size(); ++m) {
      const double d = static_cast<double>(m) - mean;
      var += d * d * probs_[m];
    }
    mean_ = mean;
    variance_ = var;
    parity_sum_ = parity;
  }

  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t m) const { return probs_[m]; }
  std::size_t size() const { return probs_.size(); }
  std::size_t max_count() const { return probs_.size() - 1; }
  CountMode count_mode() const { return mode_; }
  const ModelParams& params() const { return params_; }

  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double parity_sum() const { return parity_sum_; }
  std::optional<double> fano() const {
    if (mean_ == 0.0) return std::nullopt;
    return variance_ / mean_;
  }

  double total() const {
    double s = 0.0;
    for (double p : probs_) s += p;
    return s;
  }

 private:
  std::vector<double> probs_;
  CountMode mode_;
  ModelParams params_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double parity_sum_ = 1.0;
};

namespace detail {

inline void fold_pair(std::vector<double>& p, const PairDetection& d) {
  const std::size_t old = p.size();
  p.resize(old + 2, 0.0);
  for (std::size_t m = old + 2; m-- > 0;) {
    double acc = d.p0 * p[m];
    if (m >= 1) acc += d.p1 * p[m - 1];
    if (m >= 2) acc += d.p2 * p[m - 2];
    p[m] = acc;
  }
}

inline std::vector<double> fold_pairs(const PairSpectrum& spectrum,
                                      double kappa, std::size_t n_pairs) {
  std::vector<double> p{1.0};
  p.reserve(2 * n_pairs + 1);
  for (std::size_t k = 0; k < n_pairs; ++k)
    fold_pair(p, pair_probs(spectrum[k].v_sq, kappa));
  return p;
}

inline void check_pairs(const PairSpectrum& spectrum, std::size_t n_pairs) {
  if (n_pairs < 1) throw InvalidInput("n_pairs must be >= 1");
  if (n_pairs > spectrum.size())
    throw InvalidInput("n_pairs exceeds the number of pairs in the spectrum");
}

}  // namespace detail

/**
  Counting distribution of the first n_pairs pairs.

  Starts from the empty distribution and folds in one pair at a time:
  p(m, M+1) = P0 p(m, M) + P1 p(m-1, M) + P2 p(m-2, M).
*/
inline CountDistribution distribution(const PairSpectrum& spectrum,
                                      double kappa, std::size_t n_pairs) {
  require_kappa(kappa);
  detail::check_pairs(spectrum, n_pairs);
  auto params = spectrum.params();
  params.kappa = kappa;
  return {detail::fold_pairs(spectrum, kappa, n_pairs), CountMode::total,
          params};
}

inline CountDistribution distribution(const PairSpectrum& spectrum,
                                      double kappa) {
  return distribution(spectrum, kappa, spectrum.size());
}

/// Pairs entering the every-second-site product: k = 1 .. N/4.
inline std::size_t every_second_pairs(const ModelParams& params) {
  if (params.n_sites % 4 != 0)
    throw InvalidInput("every-second counting needs n_sites divisible by 4");
  return static_cast<std::size_t>(params.n_sites / 4);
}

/**
  Counting distribution for particles on every second site, using the same
  per-pair factor as total counting restricted to k = 1 .. N/4.
*/
inline CountDistribution every_second_distribution(
    const PairSpectrum& spectrum, double kappa) {
  require_kappa(kappa);
  const std::size_t n_pairs = every_second_pairs(spectrum.params());
  detail::check_pairs(spectrum, n_pairs);
  auto params = spectrum.params();
  params.kappa = kappa;
  return {detail::fold_pairs(spectrum, kappa, n_pairs),
          CountMode::every_second, params};
}

/**
  Coefficients c_j of Q(lambda) = prod_k (1 - 2 lambda kappa v_k^2
  + lambda^2 kappa^2 v_k^2), lowest order first.

  Real may be any floating type with the usual arithmetic (including
  multiprecision types); the derivative read-out needs extra precision beyond
  roughly ten pairs.
*/
template <class Real = double>
std::vector<Real> generating_polynomial(const PairSpectrum& spectrum,
                                        double kappa, std::size_t n_pairs) {
  require_kappa(kappa);
  detail::check_pairs(spectrum, n_pairs);
  std::vector<Real> c{Real(1)};
  c.reserve(2 * n_pairs + 1);
  const Real k(kappa);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const Real v(spectrum[i].v_sq);
    const Real a = Real(-2) * k * v;
    const Real b = k * k * v;
    const std::size_t old = c.size();
    c.resize(old + 2, Real(0));
    for (std::size_t j = old + 2; j-- > 0;) {
      Real acc = c[j];
      if (j >= 1) acc += a * c[j - 1];
      if (j >= 2) acc += b * c[j - 2];
      c[j] = acc;
    }
  }
  return c;
}

struct DerivativeReadout {
  CountDistribution distribution;
  /// Set when some p(m) < -1e-9, i.e. the alternating sums lost all accuracy.
  bool cancellation = false;
  double most_negative = 0.0;
};

inline constexpr double kCancellationFloor = -1e-9;

/**
  p(m) = (-1)^m / m! Q^(m)(1) = (-1)^m sum_{j >= m} c_j binom(j, m).

  Evaluated in Real and rounded to double at the end.
*/
template <class Real>
DerivativeReadout distribution_from_polynomial(std::span<const Real> coeffs) {
  if (coeffs.empty()) throw InvalidInput("empty coefficient vector");
  const std::size_t degree = coeffs.size() - 1;
  std::vector<double> probs(degree + 1);
  // Pascal row binom(j, 0..j), rebuilt incrementally over j.
  std::vector<Real> acc(degree + 1, Real(0));
  std::vector<Real> row{Real(1)};
  for (std::size_t j = 0; j <= degree; ++j) {
    if (j > 0) {
      row.push_back(Real(1));
      for (std::size_t m = j - 1; m >= 1; --m) row[m] = row[m] + row[m - 1];
    }
    for (std::size_t m = 0; m <= j; ++m) acc[m] += coeffs[j] * row[m];
  }
  DerivativeReadout out;
  for (std::size_t m = 0; m <= degree; ++m) {
    const Real pm = (m % 2 == 0) ? acc[m] : Real(-acc[m]);
    probs[m] = static_cast<double>(pm);
    if (probs[m] < out.most_negative) out.most_negative = probs[m];
  }
  out.cancellation = out.most_negative < kCancellationFloor;
  out.distribution = CountDistribution(std::move(probs), CountMode::total, {});
  return out;
}

template <class Real>
DerivativeReadout distribution_from_polynomial(const std::vector<Real>& c) {
  return distribution_from_polynomial(std::span<const Real>(c));
}

}  // namespace xycount

#endif  // XYCOUNT_COUNTING_HPP
