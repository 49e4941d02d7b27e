#ifndef XYCOUNT_MODEL_HPP
#define XYCOUNT_MODEL_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xycount {

/// Thrown for any argument outside an operation's domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class MagneticSign { antiferromagnetic, ferromagnetic };

inline std::string_view to_string(MagneticSign s) {
  return s == MagneticSign::antiferromagnetic ? "afm" : "fm";
}

/**
  Parameters of the periodic XY chain (equivalently the p-wave paired fermion
  ring) together with the detector efficiency.

  gamma is the anisotropy, g = h/J the reduced transverse field and kappa the
  probability that a present particle is counted.
*/
struct ModelParams {
  int n_sites = 300;
  double gamma = 1.0;
  double g = 0.0;
  double kappa = 1.0;
  MagneticSign magnetic_sign = MagneticSign::antiferromagnetic;

  int n_pairs() const { return n_sites / 2; }

  void validate() const {
    if (n_sites < 2 || n_sites % 2 != 0)
      throw InvalidInput("n_sites must be even and >= 2, got " +
                         std::to_string(n_sites));
    if (!std::isfinite(gamma) || !std::isfinite(g))
      throw InvalidInput("gamma and g must be finite");
    if (!(kappa >= 0.0 && kappa <= 1.0))
      throw InvalidInput("kappa must lie in [0,1]");
  }

  bool operator==(const ModelParams&) const = default;
};

inline void require_kappa(double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0))
    throw InvalidInput("kappa must lie in [0,1]");
}

}  // namespace xycount

#endif  // XYCOUNT_MODEL_HPP
