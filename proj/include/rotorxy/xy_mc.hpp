#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rotorxy/lattice.hpp"
#include "rotorxy/rng.hpp"

namespace rotorxy::xy_mc {

enum class Algorithm { Metropolis, MetropolisOverrelax, Wolff };
enum class StartMode { Cold, Hot };

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm a);

struct MCParams {
  int size = 8;
  // J = 1 throughout. An infinite temperature is allowed and gives the
  // beta = 0 free-spin limit used by several tests.
  double temperature = 1.0;
  long long therm_sweeps = -1;  // -1 -> max(1000, sweeps/10)
  long long sweeps = 10000;     // measurement-phase sweeps
  long long stride = 2;         // sweeps between measurements
  Algorithm algorithm = Algorithm::MetropolisOverrelax;
  double proposal_width = 1.5;  // radians; adapted during thermalization
  std::uint64_t seed = 1;
  StartMode start = StartMode::Cold;

  double beta() const { return 1.0 / temperature; }
  long long effective_therm() const;
  void validate() const;
};

// Spin state stored as unit vectors (cos, sin) per vertex; angles are
// recovered on demand, reduced to [0, 2pi).
struct SpinConfig {
  SpinConfig(int size, StartMode mode, Rng& rng);
  int size;
  std::vector<double> cn, sn;
  int num_sites() const { return static_cast<int>(cn.size()); }
  double theta(int v) const;
  void set_theta(int v, double value);
  void rotate_all(double angle);
  void renormalize();
};

struct MeasureRecord {
  double energy;        // -sum_e cos Theta_e
  double sum_cos_x;     // over all x-axis bonds
  double sum_sin_x;
  double sum_cos_cut;   // over the twisted cut B_y
  double sum_sin_cut;
  double mag_cos;       // sum_i cos theta_i
  double mag_sin;
};

struct ObservableSeries {
  MCParams params;
  std::vector<MeasureRecord> records;
  double acceptance_rate = 0.0;  // measurement phase, Metropolis proposals
  double final_width = 0.0;
  double mean_cluster_size = 0.0;  // Wolff only
};

MeasureRecord measure(const TorusLattice& lat, const SpinConfig& cfg);

// One deterministic raster Metropolis sweep; returns accepted proposals.
int metropolis_sweep(const TorusLattice& lat, SpinConfig& cfg, double beta,
                     double width, Rng& rng);
// Microcanonical reflection sweep (rejection free, no RNG).
void overrelax_sweep(const TorusLattice& lat, SpinConfig& cfg);
// Embedded-cluster reflection update; returns the flipped cluster size.
int wolff_update(const TorusLattice& lat, SpinConfig& cfg, double beta,
                 Rng& rng);

ObservableSeries run(const MCParams& params);

struct StiffnessEstimate {
  double value = 0.0;
  double error = 0.0;
  std::string kind;             // "distributed" or "boundary"
  double cos_mean = 0.0;        // <E_dir>
  double sin_mean = 0.0;        // <I_dir>
  double sin_sq_mean = 0.0;     // <I_dir^2>
};

// Helicity modulus with the twist gauge-distributed over every x-bond:
//   rho_s = (1/N)[<C> - beta (<S^2> - <S>^2)],  C,S = x-bond cos/sin sums.
StiffnessEstimate stiffness_distributed(const ObservableSeries& series,
                                        double beta, int size);
// Twist concentrated on the cut B_y; no 1/N, the L^{2-d} factor is 1 in 2D:
//   rho_s = <C_B> - beta (<S_B^2> - <S_B>^2).
StiffnessEstimate stiffness_boundary(const ObservableSeries& series,
                                     double beta, int size);

std::pair<double, double> energy_estimate(const ObservableSeries& series);

// Parallel temperature sweep with per-point derived seeds; output order and
// content are independent of the worker count.
struct SweepPointResult {
  int index;
  double temperature;
  StiffnessEstimate rho_dist;
  StiffnessEstimate rho_boundary;
  double energy_mean, energy_err;
  double acceptance;
};

struct SweepRequest {
  int size = 16;
  std::vector<double> temperatures;
  long long sweeps = 20000;
  long long therm_sweeps = -1;
  long long stride = 2;
  Algorithm algorithm = Algorithm::MetropolisOverrelax;
  std::uint64_t master_seed = 1;
  int workers = 2;
};

std::vector<SweepPointResult> stiffness_sweep(const SweepRequest& request);

}  // namespace rotorxy::xy_mc
