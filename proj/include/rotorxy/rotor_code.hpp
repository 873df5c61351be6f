#pragma once

#include <span>
#include <vector>

#include "rotorxy/analysis.hpp"
#include "rotorxy/exact_dual.hpp"
#include "rotorxy/lattice.hpp"
#include "rotorxy/rng.hpp"

namespace rotorxy::rotor_code {

// Von Mises phase noise of width sigma. The density is
//   P(T) = e^{kappa cos T} / (2 pi I_0(kappa)),  kappa = 1/sigma,
// normalized so that the integral over [-pi, pi] is 1; the same kappa = 1/sigma
// plays the role of the inverse temperature beta of the XY model, which is
// the sigma <-> T dictionary used throughout.
struct NoiseModel {
  double sigma;
  explicit NoiseModel(double sigma_in);
  double kappa() const { return 1.0 / sigma; }
  double beta() const { return 1.0 / sigma; }
};

double von_mises_pdf(double theta, double sigma);
// Best-Fisher rejection sampler with a wrapped-Cauchy envelope; exact (no
// series truncation). Returns an angle in [-pi, pi].
double von_mises_sample(Rng& rng, double sigma);

// Continuous syndrome of one sampled error: per-face and per-loop oriented
// sums of the sampled shifts, wrapped to (-pi, pi].
struct SyndromeSample {
  std::vector<double> edge_shift;
  std::vector<double> face_holonomy;
  double loop_x = 0.0;
  double loop_y = 0.0;
};
SyndromeSample syndrome_sample(const TorusLattice& lat, double sigma, Rng& rng);

// Winding spectrum of the exact evaluator at beta = 1/sigma; caches the one
// expensive piece every fidelity quantity is built from.
exact_dual::PartitionResult exact_spectrum(int size, double sigma);

// Relative gate fidelity r(phi) = F_phi / F = Z_phi / Z.
double rel_fidelity(int size, double sigma, double phi);
double rel_fidelity(const exact_dual::PartitionResult& spectrum, double phi);

struct FidelityCurve {
  std::vector<double> phi;
  std::vector<double> ln_r;
  double chi_f = 0.0;  // <K^2>, the fidelity susceptibility
};
FidelityCurve fidelity_curve(int size, double sigma, int grid = 64);

// lambda = int cos(phi) e^{-a phi^2} dphi / int e^{-a phi^2} dphi over
// [-pi, pi], a = rho_s L^{d-2} / (2 T); adaptive quadrature to 1e-8.
double lambda_gaussian(double rho_s, double temperature, int dim, int size);

// lambda with the exact weight r(phi) on a periodic grid (>= 64 points).
double lambda_exact(int size, double sigma, int grid = 128);

enum class LimitMode { FiniteSize, Thermodynamic };

struct ResilienceResult {
  double sigma;
  double lambda;
  double lambda_err;
  double rho_s_used;
};

// Interpolates the Monte Carlo stiffness table at T = sigma (monotone cubic),
// evaluates lambda_gaussian, and propagates the stiffness errors by
// re-evaluating at rho_s +- err. In Thermodynamic mode the stiffness is set
// to zero above sigma_c (the universal jump), giving lambda = 0 there.
std::vector<ResilienceResult> lambda_sweep(const analysis::StiffnessTable& table,
                                           std::span<const double> sigmas,
                                           int dim, int size, LimitMode mode,
                                           double sigma_c = 0.89);

}  // namespace rotorxy::rotor_code
