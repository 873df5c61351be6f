#include "rotorxy/xy_mc.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "rotorxy/analysis.hpp"

namespace rotorxy::xy_mc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  return t < 0.0 ? t + kTwoPi : t;
}

// flat neighbor table: for vertex v the entries (+x, -x, +y, -y)
std::vector<int> neighbor_table(const TorusLattice& lat) {
  const int L = lat.size();
  std::vector<int> nbr(4 * lat.num_vertices());
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      const int v = lat.vertex_index(x, y);
      nbr[4 * v + 0] = lat.vertex_index(x + 1, y);
      nbr[4 * v + 1] = lat.vertex_index(x - 1, y);
      nbr[4 * v + 2] = lat.vertex_index(x, y + 1);
      nbr[4 * v + 3] = lat.vertex_index(x, y - 1);
    }
  }
  return nbr;
}

};  // namespace

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "metropolis") return Algorithm::Metropolis;
  if (name == "metropolis+overrelax" || name == "overrelax") {
    return Algorithm::MetropolisOverrelax;
  }
  if (name == "wolff") return Algorithm::Wolff;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Metropolis: return "metropolis";
    case Algorithm::MetropolisOverrelax: return "metropolis+overrelax";
    case Algorithm::Wolff: return "wolff";
  }
  return "?";
}

long long MCParams::effective_therm() const {
  if (therm_sweeps >= 0) return therm_sweeps;
  return std::max<long long>(1000, sweeps / 10);
}

void MCParams::validate() const {
  if (size < 2) throw std::invalid_argument("MCParams: size must be >= 2");
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("MCParams: temperature must be > 0");
  }
  if (sweeps < 1) throw std::invalid_argument("MCParams: sweeps must be >= 1");
  if (stride < 1) throw std::invalid_argument("MCParams: stride must be >= 1");
  if (!(proposal_width > 0.0) || proposal_width > std::numbers::pi) {
    throw std::invalid_argument("MCParams: proposal width must be in (0, pi]");
  }
}

SpinConfig::SpinConfig(int size_in, StartMode mode, Rng& rng) : size(size_in) {
  const int n = size * size;
  cn.assign(n, 1.0);
  sn.assign(n, 0.0);
  if (mode == StartMode::Hot) {
    for (int v = 0; v < n; ++v) {
      const double t = kTwoPi * rng.next_double();
      cn[v] = std::cos(t);
      sn[v] = std::sin(t);
    }
  }
}

double SpinConfig::theta(int v) const {
  return wrap_angle(std::atan2(sn[v], cn[v]));
}

void SpinConfig::set_theta(int v, double value) {
  cn[v] = std::cos(value);
  sn[v] = std::sin(value);
}

void SpinConfig::rotate_all(double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (std::size_t v = 0; v < cn.size(); ++v) {
    const double c = cn[v], s = sn[v];
    cn[v] = c * ca - s * sa;
    sn[v] = s * ca + c * sa;
  }
}

void SpinConfig::renormalize() {
  for (std::size_t v = 0; v < cn.size(); ++v) {
    const double r = 1.0 / std::sqrt(cn[v] * cn[v] + sn[v] * sn[v]);
    cn[v] *= r;
    sn[v] *= r;
  }
}

MeasureRecord measure(const TorusLattice& lat, const SpinConfig& cfg) {
  MeasureRecord rec{};
  const int n = lat.num_vertices();
  for (int e = 0; e < lat.num_edges(); ++e) {
    const Edge& ed = lat.edge(e);
    const double c = cfg.cn[ed.start] * cfg.cn[ed.end] +
                     cfg.sn[ed.start] * cfg.sn[ed.end];
    const double s = cfg.sn[ed.start] * cfg.cn[ed.end] -
                     cfg.cn[ed.start] * cfg.sn[ed.end];
    rec.energy -= c;
    if (e < n) {  // x-axis bonds
      rec.sum_cos_x += c;
      rec.sum_sin_x += s;
    }
    if (lat.twisted(e)) {
      rec.sum_cos_cut += c;
      rec.sum_sin_cut += s;
    }
  }
  for (int v = 0; v < n; ++v) {
    rec.mag_cos += cfg.cn[v];
    rec.mag_sin += cfg.sn[v];
  }
  return rec;
}

namespace {

int metropolis_sweep_impl(const std::vector<int>& nbr, SpinConfig& cfg,
                          double beta, double width, Rng& rng) {
  int accepted = 0;
  const int n = cfg.num_sites();
  for (int v = 0; v < n; ++v) {
    const int* nb = nbr.data() + 4 * v;
    double hx = 0.0, hy = 0.0;
    for (int i = 0; i < 4; ++i) {
      hx += cfg.cn[nb[i]];
      hy += cfg.sn[nb[i]];
    }
    const double d = width * (2.0 * rng.next_double() - 1.0);
    const double cd = std::cos(d), sd = std::sin(d);
    const double c_new = cfg.cn[v] * cd - cfg.sn[v] * sd;
    const double s_new = cfg.sn[v] * cd + cfg.cn[v] * sd;
    const double delta_e = -((c_new - cfg.cn[v]) * hx + (s_new - cfg.sn[v]) * hy);
    if (delta_e <= 0.0 || rng.next_double() < std::exp(-beta * delta_e)) {
      cfg.cn[v] = c_new;
      cfg.sn[v] = s_new;
      ++accepted;
    }
  }
  return accepted;
}

void overrelax_sweep_impl(const std::vector<int>& nbr, SpinConfig& cfg) {
  const int n = cfg.num_sites();
  for (int v = 0; v < n; ++v) {
    const int* nb = nbr.data() + 4 * v;
    double hx = 0.0, hy = 0.0;
    for (int i = 0; i < 4; ++i) {
      hx += cfg.cn[nb[i]];
      hy += cfg.sn[nb[i]];
    }
    const double h2 = hx * hx + hy * hy;
    if (h2 < 1e-300) continue;
    // reflect about the local field: theta -> 2 alpha - theta, done in
    // components via cos/sin(2 alpha) = (hx^2 - hy^2, 2 hx hy)/h^2
    const double c2 = (hx * hx - hy * hy) / h2;
    const double s2 = 2.0 * hx * hy / h2;
    const double c = cfg.cn[v], s = cfg.sn[v];
    cfg.cn[v] = c2 * c + s2 * s;
    cfg.sn[v] = s2 * c - c2 * s;
  }
}

int wolff_update_impl(const std::vector<int>& nbr, SpinConfig& cfg,
                      double beta, Rng& rng, std::vector<int>& stack,
                      std::vector<char>& in_cluster) {
  const int n = cfg.num_sites();
  const double alpha = kTwoPi * rng.next_double();
  const double rx = std::cos(alpha), ry = std::sin(alpha);
  std::fill(in_cluster.begin(), in_cluster.end(), 0);
  stack.clear();
  const int seed = static_cast<int>(rng.next_below(n));
  stack.push_back(seed);
  in_cluster[seed] = 1;
  int size = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    ++size;
    const double pv = cfg.cn[v] * rx + cfg.sn[v] * ry;
    for (int i = 0; i < 4; ++i) {
      const int w = nbr[4 * v + i];
      if (in_cluster[w]) continue;
      const double pw = cfg.cn[w] * rx + cfg.sn[w] * ry;
      const double coupling = 2.0 * beta * pv * pw;
      if (coupling <= 0.0) continue;
      if (rng.next_double() < 1.0 - std::exp(-coupling)) {
        in_cluster[w] = 1;
        stack.push_back(w);
      }
    }
  }
  // flip the cluster: reflect each member through the plane normal to r
  const double c2 = rx * rx - ry * ry;
  const double s2 = 2.0 * rx * ry;
  for (int v = 0; v < n; ++v) {
    if (!in_cluster[v]) continue;
    const double c = cfg.cn[v], s = cfg.sn[v];
    cfg.cn[v] = -(c2 * c + s2 * s);
    cfg.sn[v] = -(s2 * c - c2 * s);
  }
  return size;
}

}  // namespace

int metropolis_sweep(const TorusLattice& lat, SpinConfig& cfg, double beta,
                     double width, Rng& rng) {
  const auto nbr = neighbor_table(lat);
  return metropolis_sweep_impl(nbr, cfg, beta, width, rng);
}

void overrelax_sweep(const TorusLattice& lat, SpinConfig& cfg) {
  const auto nbr = neighbor_table(lat);
  overrelax_sweep_impl(nbr, cfg);
}

int wolff_update(const TorusLattice& lat, SpinConfig& cfg, double beta,
                 Rng& rng) {
  if (!(beta >= 0.0)) throw std::invalid_argument("wolff_update: beta < 0");
  const auto nbr = neighbor_table(lat);
  std::vector<int> stack;
  std::vector<char> in_cluster(cfg.num_sites(), 0);
  return wolff_update_impl(nbr, cfg, beta, rng, stack, in_cluster);
}

ObservableSeries run(const MCParams& params) {
  params.validate();
  const TorusLattice lat(params.size);
  const auto nbr = neighbor_table(lat);
  const double beta = std::isinf(params.temperature) ? 0.0 : params.beta();

  Rng rng(params.seed);
  SpinConfig cfg(params.size, params.start, rng);

  ObservableSeries out;
  out.params = params;

  const int n = lat.num_vertices();
  double width = params.proposal_width;
  const long long therm = params.effective_therm();

  std::vector<int> stack;
  std::vector<char> in_cluster(n, 0);
  const bool use_overrelax = params.algorithm == Algorithm::MetropolisOverrelax;
  const bool use_wolff = params.algorithm == Algorithm::Wolff;

  // thermalization with width adaptation toward 40-60% acceptance
  long long window_accepts = 0;
  const long long adapt_window = 100;
  for (long long sweep = 0; sweep < therm; ++sweep) {
    window_accepts += metropolis_sweep_impl(nbr, cfg, beta, width, rng);
    if (use_overrelax) overrelax_sweep_impl(nbr, cfg);
    if (use_wolff) wolff_update_impl(nbr, cfg, beta, rng, stack, in_cluster);
    if ((sweep + 1) % adapt_window == 0) {
      const double rate =
          static_cast<double>(window_accepts) / (adapt_window * n);
      if (rate < 0.40) width *= 0.8;
      if (rate > 0.60) width *= 1.25;
      width = std::min(std::max(width, 0.01), std::numbers::pi);
      window_accepts = 0;
    }
    if ((sweep + 1) % 256 == 0) cfg.renormalize();
  }
  // width frozen from here on (detailed balance)
  out.final_width = width;

  long long accepts = 0;
  long long cluster_total = 0;
  out.records.reserve(params.sweeps / params.stride + 1);
  for (long long sweep = 1; sweep <= params.sweeps; ++sweep) {
    accepts += metropolis_sweep_impl(nbr, cfg, beta, width, rng);
    if (use_overrelax) overrelax_sweep_impl(nbr, cfg);
    if (use_wolff) {
      cluster_total += wolff_update_impl(nbr, cfg, beta, rng, stack, in_cluster);
    }
    if (sweep % 256 == 0) cfg.renormalize();
    if (sweep % params.stride == 0) {
      out.records.push_back(measure(lat, cfg));
    }
  }
  out.acceptance_rate =
      static_cast<double>(accepts) / (static_cast<double>(params.sweeps) * n);
  if (use_wolff && params.sweeps > 0) {
    out.mean_cluster_size =
        static_cast<double>(cluster_total) / static_cast<double>(params.sweeps);
  }
  return out;
}

namespace {

StiffnessEstimate stiffness_impl(const ObservableSeries& series, double beta,
                                 double norm, bool boundary) {
  if (series.records.empty()) {
    throw std::invalid_argument("stiffness: empty series");
  }
  const auto& recs = series.records;
  std::vector<double> cos_s(recs.size()), sin_s(recs.size()), sin2_s(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const double c = boundary ? recs[i].sum_cos_cut : recs[i].sum_cos_x;
    const double s = boundary ? recs[i].sum_sin_cut : recs[i].sum_sin_x;
    cos_s[i] = c;
    sin_s[i] = s;
    sin2_s[i] = s * s;
  }
  auto stat = [beta, norm](std::span<const double> means) {
    return (means[0] - beta * (means[2] - means[1] * means[1])) / norm;
  };
  const auto [value, error] =
      analysis::binned_jackknife({cos_s, sin_s, sin2_s}, stat);
  StiffnessEstimate est;
  est.value = value;
  est.error = error;
  est.kind = boundary ? "boundary" : "distributed";
  double mc = 0, ms = 0, ms2 = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    mc += cos_s[i];
    ms += sin_s[i];
    ms2 += sin2_s[i];
  }
  est.cos_mean = mc / recs.size();
  est.sin_mean = ms / recs.size();
  est.sin_sq_mean = ms2 / recs.size();
  return est;
}

}  // namespace

StiffnessEstimate stiffness_distributed(const ObservableSeries& series,
                                        double beta, int size) {
  return stiffness_impl(series, beta, static_cast<double>(size) * size, false);
}

StiffnessEstimate stiffness_boundary(const ObservableSeries& series,
                                     double beta, int size) {
  (void)size;  // L^{2-d} = 1 in two dimensions
  return stiffness_impl(series, beta, 1.0, true);
}

std::pair<double, double> energy_estimate(const ObservableSeries& series) {
  if (series.records.empty()) {
    throw std::invalid_argument("energy_estimate: empty series");
  }
  std::vector<double> e(series.records.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = series.records[i].energy;
  return analysis::mean_error(e);
}

std::vector<SweepPointResult> stiffness_sweep(const SweepRequest& request) {
  const int npts = static_cast<int>(request.temperatures.size());
  std::vector<SweepPointResult> results(npts);
  std::atomic<int> next{0};
  const int workers =
      std::max(1, std::min(request.workers, npts > 0 ? npts : 1));
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= npts) return;
      MCParams p;
      p.size = request.size;
      p.temperature = request.temperatures[i];
      p.sweeps = request.sweeps;
      p.therm_sweeps = request.therm_sweeps;
      p.stride = request.stride;
      p.algorithm = request.algorithm;
      p.seed = derive_seed(request.master_seed, static_cast<std::uint64_t>(i));
      p.start = p.temperature < 1.0 ? StartMode::Cold : StartMode::Hot;
      const ObservableSeries series = run(p);
      SweepPointResult r;
      r.index = i;
      r.temperature = p.temperature;
      r.rho_dist = stiffness_distributed(series, p.beta(), p.size);
      r.rho_boundary = stiffness_boundary(series, p.beta(), p.size);
      std::tie(r.energy_mean, r.energy_err) = energy_estimate(series);
      r.acceptance = series.acceptance_rate;
      results[i] = r;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace rotorxy::xy_mc
