#ifndef XYCOUNT_ORACLE_HPP
#define XYCOUNT_ORACLE_HPP

// Small-system exact reference: many-body ground states built without the
// momentum-space shortcuts, followed by binomial detection thinning.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "counting.hpp"
#include "model.hpp"
#include "spectrum.hpp"

namespace xycount::oracle {

inline constexpr int kMaxPairBasisPairs = 14;
inline constexpr int kMaxRealSpaceSites = 12;
inline constexpr double kDegeneracyGap = 1e-10;

enum class ModeBasis { site, momentum_pair };

/**
  Many-body state over n_modes two-level modes. Bit j of a basis index is the
  occupation of mode j; in the momentum-pair basis one occupied mode carries
  two particles.
*/
struct FockState {
  ModeBasis basis = ModeBasis::site;
  int n_modes = 0;
  std::vector<std::complex<double>> amplitudes;

  std::size_t dimension() const { return amplitudes.size(); }
  int particles_per_mode() const {
    return basis == ModeBasis::momentum_pair ? 2 : 1;
  }
  double norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return std::sqrt(s);
  }
};

/// Pre-detection distribution of the number of particles in the counted modes.
struct NumberDistribution {
  std::vector<double> probs;
};

/// BCS product state (x)_k (u_k |00> + i v_k |11>) in the pair-occupation basis.
inline FockState pair_basis_ground_state(const PairSpectrum& spectrum,
                                         std::size_t n_pairs) {
  if (n_pairs < 1 || n_pairs > spectrum.size())
    throw InvalidInput("n_pairs outside the spectrum");
  if (n_pairs > static_cast<std::size_t>(kMaxPairBasisPairs))
    throw InvalidInput("pair basis limited to 14 pairs");
  std::vector<std::complex<double>> u(n_pairs), v(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    u[k] = std::sqrt(spectrum[k].u_sq());
    v[k] = std::complex<double>(0.0, std::sqrt(spectrum[k].v_sq));
  }
  FockState st;
  st.basis = ModeBasis::momentum_pair;
  st.n_modes = static_cast<int>(n_pairs);
  st.amplitudes.resize(std::size_t{1} << n_pairs);
  for (std::size_t s = 0; s < st.amplitudes.size(); ++s) {
    std::complex<double> amp = 1.0;
    for (std::size_t k = 0; k < n_pairs; ++k)
      amp *= ((s >> k) & 1u) ? v[k] : u[k];
    st.amplitudes[s] = amp;
  }
  return st;
}

namespace detail {

struct Applied {
  std::uint32_t state;
  int sign;
};

// Modes ordered by site index: an operator on mode j picks up (-1)^(number
// of occupied modes below j).
inline int jw_sign(std::uint32_t s, int j) {
  return (std::popcount(s & ((std::uint32_t{1} << j) - 1u)) % 2) ? -1 : 1;
}

inline std::optional<Applied> annihilate(std::uint32_t s, int j) {
  const std::uint32_t bit = std::uint32_t{1} << j;
  if (!(s & bit)) return std::nullopt;
  return Applied{s ^ bit, jw_sign(s, j)};
}

inline std::optional<Applied> create(std::uint32_t s, int j) {
  const std::uint32_t bit = std::uint32_t{1} << j;
  if (s & bit) return std::nullopt;
  return Applied{s | bit, jw_sign(s, j)};
}

// Applies op2 then op1 (operator product op1 op2) to basis state s.
template <class Op1, class Op2>
std::optional<Applied> apply_pair(std::uint32_t s, Op1 op1, int j1, Op2 op2,
                                  int j2) {
  const auto a = op2(s, j2);
  if (!a) return std::nullopt;
  const auto b = op1(a->state, j1);
  if (!b) return std::nullopt;
  return Applied{b->state, a->sign * b->sign};
}

}  // namespace detail

/// Dense matrix of c_j (or c_j^dagger) on n_modes modes, for convention checks.
inline Eigen::MatrixXd fermion_operator(int n_modes, int j, bool creation) {
  const std::size_t dim = std::size_t{1} << n_modes;
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(dim, dim);
  for (std::uint32_t s = 0; s < dim; ++s) {
    const auto r = creation ? detail::create(s, j) : detail::annihilate(s, j);
    if (r) op(r->state, s) = r->sign;
  }
  return op;
}

/**
  Matrix of the ring Hamiltonian
    H = sum_j [ 1/2 (c_j^+ c_{j+1} + h.c.) + gamma/2 (c_j^+ c_{j+1}^+ + h.c.)
                - g c_j^+ c_j ],   c_N == c_0,
  restricted to basis states of the given fermion parity. This is the
  fermion chain with the hopping sign that fills every site as g -> infinity.
*/
inline Eigen::MatrixXd ring_hamiltonian_sector(const ModelParams& params,
                                               int parity,
                                               std::vector<std::uint32_t>& states) {
  const int n = params.n_sites;
  const std::uint32_t full = std::uint32_t{1} << n;
  states.clear();
  std::vector<int> index(full, -1);
  for (std::uint32_t s = 0; s < full; ++s) {
    if (std::popcount(s) % 2 == parity) {
      index[s] = static_cast<int>(states.size());
      states.push_back(s);
    }
  }
  const auto dim = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const double half = 0.5, pair = 0.5 * params.gamma;
  using detail::annihilate;
  using detail::create;
  for (Eigen::Index col = 0; col < dim; ++col) {
    const std::uint32_t s = states[col];
    for (int j = 0; j < n; ++j) {
      if ((s >> j) & 1u) h(col, col) -= params.g;
      const int k = (j + 1) % n;
      auto add = [&](const std::optional<detail::Applied>& r, double amp) {
        if (r) h(index[r->state], col) += amp * r->sign;
      };
      add(detail::apply_pair(s, create, j, annihilate, k), half);
      add(detail::apply_pair(s, create, k, annihilate, j), half);
      add(detail::apply_pair(s, create, j, create, k), pair);
      add(detail::apply_pair(s, annihilate, k, annihilate, j), pair);
    }
  }
  return h;
}

struct RealSpaceGroundState {
  FockState state;
  /// Orthonormal basis of the ground space (one vector unless degenerate).
  std::vector<FockState> ground_space;
  double energy = 0.0;
  /// Splitting between the two lowest many-body levels.
  double gap = 0.0;
  bool degenerate = false;
};

/**
  Ground state of the periodic ring by dense diagonalization of both fermion
  parity sectors (dimension 2^(N-1) each). Eigenvectors are formed only in
  the sectors that contain the ground space.
*/
inline RealSpaceGroundState real_space_ground_state(const ModelParams& params) {
  params.validate();
  if (params.n_sites > kMaxRealSpaceSites)
    throw InvalidInput("real-space diagonalization limited to 12 sites");
  const int n = params.n_sites;

  struct Level {
    double energy;
    int parity;
    Eigen::Index column;
  };
  std::vector<Level> levels;
  std::vector<std::uint32_t> states[2];
  Eigen::MatrixXd hamiltonians[2];
  for (int parity = 0; parity < 2; ++parity) {
    hamiltonians[parity] = ring_hamiltonian_sector(params, parity, states[parity]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        hamiltonians[parity], Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("eigensolver failed");
    const auto& ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      levels.push_back({ev(i), parity, i});
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.energy < b.energy; });

  RealSpaceGroundState out;
  out.energy = levels.front().energy;
  out.gap = levels.size() > 1 ? levels[1].energy - out.energy : 0.0;
  out.degenerate = out.gap < kDegeneracyGap;

  // Eigenvectors only for sectors that hold part of the ground space.
  Eigen::MatrixXd vectors[2];
  for (const auto& lvl : levels) {
    if (lvl.energy - out.energy >= kDegeneracyGap) break;
    auto& vec = vectors[lvl.parity];
    if (vec.size() == 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonians[lvl.parity]);
      if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed");
      vec = solver.eigenvectors();
    }
    FockState st;
    st.basis = ModeBasis::site;
    st.n_modes = n;
    st.amplitudes.assign(std::size_t{1} << n, 0.0);
    const auto& basis = states[lvl.parity];
    for (std::size_t i = 0; i < basis.size(); ++i)
      st.amplitudes[basis[i]] = vec(static_cast<Eigen::Index>(i), lvl.column);
    out.ground_space.push_back(std::move(st));
  }
  out.state = out.ground_space.front();
  return out;
}

/// All-modes mask.
inline std::vector<bool> full_mask(int n_modes) {
  return std::vector<bool>(static_cast<std::size_t>(n_modes), true);
}

/// Mask selecting sites 0, 2, 4, ...
inline std::vector<bool> even_site_mask(int n_sites) {
  std::vector<bool> m(static_cast<std::size_t>(n_sites));
  for (int j = 0; j < n_sites; j += 2) m[j] = true;
  return m;
}

/// Distribution of the total occupation of the masked modes (all by default).
inline NumberDistribution number_distribution(
    const FockState& state, const std::optional<std::vector<bool>>& mask = {}) {
  const auto sel = mask.value_or(full_mask(state.n_modes));
  if (static_cast<int>(sel.size()) != state.n_modes)
    throw InvalidInput("mask length does not match the number of modes");
  std::uint32_t bits = 0;
  int counted = 0;
  for (int j = 0; j < state.n_modes; ++j)
    if (sel[j]) {
      bits |= std::uint32_t{1} << j;
      ++counted;
    }
  const int ppm = state.particles_per_mode();
  NumberDistribution nd;
  nd.probs.assign(static_cast<std::size_t>(counted * ppm + 1), 0.0);
  for (std::size_t s = 0; s < state.amplitudes.size(); ++s)
    nd.probs[std::popcount(static_cast<std::uint32_t>(s) & bits) * ppm] +=
        std::norm(state.amplitudes[s]);
  return nd;
}

/**
  p(m) = sum_n nd(n) binom(n, m) kappa^m (1 - kappa)^(n - m).

  Binomial rows are built by repeated Bernoulli convolution, so no factorials
  or large powers appear.
*/
inline CountDistribution binomial_thinning(const NumberDistribution& nd,
                                           double kappa,
                                           ModelParams params = {}) {
  require_kappa(kappa);
  if (nd.probs.empty()) throw InvalidInput("empty number distribution");
  std::vector<double> out(nd.probs.size(), 0.0);
  std::vector<double> row{1.0};
  for (std::size_t n = 0; n < nd.probs.size(); ++n) {
    if (n > 0) {
      row.push_back(0.0);
      for (std::size_t m = n; m-- > 0;) {
        row[m + 1] += kappa * row[m];
        row[m] *= 1.0 - kappa;
      }
    }
    for (std::size_t m = 0; m <= n; ++m) out[m] += nd.probs[n] * row[m];
  }
  params.kappa = kappa;
  return {std::move(out), CountMode::total, params};
}

/// Entrywise min/max of counting distributions over a degenerate ground space.
struct DistributionRange {
  std::vector<double> lower;
  std::vector<double> upper;
};

inline DistributionRange counting_range(
    const RealSpaceGroundState& gs, double kappa,
    const std::optional<std::vector<bool>>& mask = {}) {
  DistributionRange r;
  for (const auto& st : gs.ground_space) {
    const auto d = binomial_thinning(number_distribution(st, mask), kappa);
    if (r.lower.empty()) {
      r.lower.assign(d.probs().begin(), d.probs().end());
      r.upper = r.lower;
      continue;
    }
    for (std::size_t m = 0; m < d.size(); ++m) {
      r.lower[m] = std::min(r.lower[m], d[m]);
      r.upper[m] = std::max(r.upper[m], d[m]);
    }
  }
  return r;
}

/// Counting distribution of the real-space ground state (first ground vector).
inline CountDistribution real_space_distribution(
    const ModelParams& params, const std::optional<std::vector<bool>>& mask = {}) {
  const auto gs = real_space_ground_state(params);
  auto d = binomial_thinning(number_distribution(gs.state, mask), params.kappa,
                             params);
  return d;
}

/// Counting distribution through the pair-basis BCS state.
inline CountDistribution pair_basis_distribution(const PairSpectrum& spectrum,
                                                 double kappa,
                                                 std::size_t n_pairs) {
  const auto st = pair_basis_ground_state(spectrum, n_pairs);
  return binomial_thinning(number_distribution(st), kappa, spectrum.params());
}

/// Largest entrywise difference; the shorter vector is padded with zeros.
inline double max_abs_deviation(std::span<const double> a,
                                std::span<const double> b) {
  double dev = 0.0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    dev = std::max(dev, std::abs(x - y));
  }
  return dev;
}

}  // namespace xycount::oracle

#endif  // XYCOUNT_ORACLE_HPP
