#include "rotorxy/bessel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rotorxy {

std::vector<double> bessel_i_scaled(int kmax, double x) {
  if (kmax < 0) throw std::invalid_argument("bessel_i_scaled: kmax < 0");
  if (x < 0) throw std::invalid_argument("bessel_i_scaled: x < 0");
  std::vector<double> out(kmax + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  // Start the downward recurrence well above both kmax and x; the minimal
  // solution is picked up regardless of the (arbitrary) seed.
  const int start = std::max(kmax, static_cast<int>(std::ceil(x))) + 40 +
                    static_cast<int>(2.0 * std::sqrt(static_cast<double>(kmax) + 1.0));
  std::vector<double> f(start + 2, 0.0);
  f[start + 1] = 0.0;
  f[start] = 1e-280;
  for (int k = start; k >= 1; --k) {
    f[k - 1] = f[k + 1] + (2.0 * k / x) * f[k];
    if (f[k - 1] > 1e260) {  // rescale; only ratios matter before normalizing
      for (int j = k - 1; j <= start + 1; ++j) f[j] *= 1e-260;
    }
  }
  double norm = f[0];
  for (int k = 1; k <= start; ++k) norm += 2.0 * f[k];
  for (int k = 0; k <= kmax; ++k) out[k] = f[k] / norm;
  return out;
}

std::vector<double> bessel_i_scaled_deriv(const std::vector<double>& scaled) {
  const int kmax = static_cast<int>(scaled.size()) - 1;
  std::vector<double> d(kmax + 1, 0.0);
  for (int k = 0; k <= kmax; ++k) {
    const double below = (k == 0) ? scaled[1] : scaled[k - 1];
    const double above = (k + 1 <= kmax) ? scaled[k + 1] : 0.0;
    d[k] = 0.5 * (below + above) - scaled[k];
  }
  return d;
}

double bessel_i(int k, double x) {
  if (k < 0) k = -k;  // I_{-k} = I_k
  const auto table = bessel_i_scaled(k, x);
  return table[k] * std::exp(x);
}

double log_bessel_i(int k, double x) {
  if (k < 0) k = -k;
  if (x == 0.0) {
    return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const auto table = bessel_i_scaled(k, x);
  return std::log(table[k]) + x;
}

}  // namespace rotorxy
