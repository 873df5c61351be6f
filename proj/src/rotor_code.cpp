#include "rotorxy/rotor_code.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "rotorxy/bessel.hpp"

namespace rotorxy::rotor_code {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double x) {
  // to (-pi, pi]
  double w = std::remainder(x, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

}  // namespace

NoiseModel::NoiseModel(double sigma_in) : sigma(sigma_in) {
  if (!(sigma > 0.0)) {
    throw std::domain_error("NoiseModel: sigma must be > 0");
  }
}

double von_mises_pdf(double theta, double sigma) {
  const NoiseModel noise(sigma);
  const double kappa = noise.kappa();
  // scaled Bessel keeps this finite for tiny sigma
  const double log_i0 = log_bessel_i(0, kappa);
  return std::exp(kappa * std::cos(theta) - log_i0) / (2.0 * kPi);
}

double von_mises_sample(Rng& rng, double sigma) {
  const NoiseModel noise(sigma);
  const double kappa = noise.kappa();
  if (kappa < 1e-10) return 2.0 * kPi * rng.next_double() - kPi;
  // Best & Fisher (1979): wrapped-Cauchy envelope with
  //   tau = 1 + sqrt(1 + 4 kappa^2), rho = (tau - sqrt(2 tau)) / (2 kappa),
  //   r = (1 + rho^2) / (2 rho)
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = rng.next_double();
    const double z = std::cos(kPi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = rng.next_double();
    if (c * (2.0 - c) - u2 > 0.0 ||
        (u2 > 0.0 && std::log(c / u2) + 1.0 - c >= 0.0)) {
      const double u3 = rng.next_double();
      const double theta = (u3 < 0.5 ? -1.0 : 1.0) * std::acos(f);
      return theta;
    }
  }
}

SyndromeSample syndrome_sample(const TorusLattice& lat, double sigma,
                               Rng& rng) {
  SyndromeSample out;
  out.edge_shift.resize(lat.num_edges());
  for (int e = 0; e < lat.num_edges(); ++e) {
    out.edge_shift[e] = von_mises_sample(rng, sigma);
  }
  out.face_holonomy.resize(lat.num_faces());
  for (int f = 0; f < lat.num_faces(); ++f) {
    double s = 0.0;
    for (const auto& [e, sign] : lat.face_boundary(f)) {
      s += sign * out.edge_shift[e];
    }
    out.face_holonomy[f] = wrap_pi(s);
  }
  double sx = 0.0, sy = 0.0;
  for (int e : lat.loop_x()) sx += out.edge_shift[e];
  for (int e : lat.loop_y()) sy += out.edge_shift[e];
  out.loop_x = wrap_pi(sx);
  out.loop_y = wrap_pi(sy);
  return out;
}

exact_dual::PartitionResult exact_spectrum(int size, double sigma) {
  const NoiseModel noise(sigma);
  // memoized: every fidelity/lambda quantity at one (L, sigma) shares the
  // same winding spectrum
  static std::mutex mu;
  static std::map<std::pair<int, double>, exact_dual::PartitionResult> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    const auto it = cache.find({size, sigma});
    if (it != cache.end()) return it->second;
  }
  exact_dual::DualSumSpec spec;
  spec.size = size;
  spec.beta = noise.beta();
  spec.want_energy = false;
  auto res = exact_dual::z_current_transfer(spec);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(std::make_pair(size, sigma), res);
  return res;
}

double rel_fidelity(const exact_dual::PartitionResult& spectrum, double phi) {
  const auto& p = spectrum.winding_probs;
  double r = p.empty() ? 1.0 : p[0];
  for (std::size_t m = 1; m < p.size(); ++m) {
    r += 2.0 * p[m] * std::cos(static_cast<double>(m) * phi);
  }
  return r;
}

double rel_fidelity(int size, double sigma, double phi) {
  return rel_fidelity(exact_spectrum(size, sigma), phi);
}

FidelityCurve fidelity_curve(int size, double sigma, int grid) {
  if (grid < 8) throw std::invalid_argument("fidelity_curve: grid too small");
  const auto spectrum = exact_spectrum(size, sigma);
  FidelityCurve out;
  out.chi_f = spectrum.k2_mean;
  out.phi.resize(grid);
  out.ln_r.resize(grid);
  for (int i = 0; i < grid; ++i) {
    const double phi = -kPi + 2.0 * kPi * (i + 0.5) / grid;
    out.phi[i] = phi;
    out.ln_r[i] = std::log(rel_fidelity(spectrum, phi));
  }
  return out;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double s,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(sl + sr - s) < 15.0 * tol) {
    return sl + sr + (sl + sr - s) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, sl, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, sr, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double s = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, s, tol, 40);
}

}  // namespace

double lambda_gaussian(double rho_s, double temperature, int dim, int size) {
  if (rho_s < 0.0) throw std::domain_error("lambda_gaussian: rho_s < 0");
  if (!(temperature > 0.0)) {
    throw std::domain_error("lambda_gaussian: temperature must be > 0");
  }
  if (dim < 2) throw std::domain_error("lambda_gaussian: dim must be >= 2");
  if (size < 1) throw std::domain_error("lambda_gaussian: size must be >= 1");
  const double a =
      rho_s * std::pow(static_cast<double>(size), dim - 2) / (2.0 * temperature);
  auto weight = [a](double phi) { return std::exp(-a * phi * phi); };
  auto weighted_cos = [&](double phi) { return std::cos(phi) * weight(phi); };
  // split at the Gaussian width so the peak is resolved before refinement
  const double w = std::min(1.0, 3.0 / std::sqrt(1.0 + a));
  const double tol = 1e-9;
  double num = 0.0, den = 0.0;
  const double cuts[5] = {-kPi, -w, 0.0, w, kPi};
  for (int i = 0; i < 4; ++i) {
    num += integrate(weighted_cos, cuts[i], cuts[i + 1], tol);
    den += integrate(weight, cuts[i], cuts[i + 1], tol);
  }
  return num / den;
}

double lambda_exact(int size, double sigma, int grid) {
  if (grid < 64) {
    throw std::invalid_argument("lambda_exact: grid must be >= 64");
  }
  const auto spectrum = exact_spectrum(size, sigma);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double phi = -kPi + 2.0 * kPi * (i + 0.5) / grid;
    const double r = rel_fidelity(spectrum, phi);
    num += std::cos(phi) * r;
    den += r;
  }
  return num / den;
}

std::vector<ResilienceResult> lambda_sweep(const analysis::StiffnessTable& table,
                                           std::span<const double> sigmas,
                                           int dim, int size, LimitMode mode,
                                           double sigma_c) {
  const std::size_t n = table.temperature.size();
  if (n < 2 || table.rho.size() != n) {
    throw std::invalid_argument("lambda_sweep: malformed stiffness table");
  }
  const analysis::MonotoneCubic rho_of_t(table.temperature, table.rho);
  const bool have_err = table.rho_err.size() == n;
  std::vector<ResilienceResult> out;
  out.reserve(sigmas.size());
  for (double sigma : sigmas) {
    if (!(sigma > 0.0)) {
      throw std::domain_error("lambda_sweep: sigma must be > 0");
    }
    ResilienceResult r;
    r.sigma = sigma;
    if (mode == LimitMode::Thermodynamic && sigma > sigma_c) {
      r.rho_s_used = 0.0;  // the stiffness jump kills the weight entirely
      r.lambda = 0.0;
      r.lambda_err = 0.0;
      out.push_back(r);
      continue;
    }
    const double rho = std::max(0.0, rho_of_t(sigma));
    r.rho_s_used = rho;
    r.lambda = lambda_gaussian(rho, sigma, dim, size);
    r.lambda_err = 0.0;
    if (have_err) {
      // linear interpolation of the error band
      const auto& ts = table.temperature;
      std::size_t i = 1;
      while (i + 1 < n && ts[i] < sigma) ++i;
      const double t0 = ts[i - 1], t1 = ts[i];
      const double frac = (sigma - t0) / (t1 - t0);
      const double err = (1.0 - frac) * table.rho_err[i - 1] +
                         frac * table.rho_err[i];
      const double lo = lambda_gaussian(std::max(0.0, rho - err), sigma, dim, size);
      const double hi = lambda_gaussian(rho + err, sigma, dim, size);
      r.lambda_err = std::max(std::abs(hi - r.lambda), std::abs(r.lambda - lo));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace rotorxy::rotor_code
