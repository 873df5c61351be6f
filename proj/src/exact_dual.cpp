#include "rotorxy/exact_dual.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rotorxy/bessel.hpp"
#include "rotorxy/lattice.hpp"

namespace rotorxy::exact_dual {

namespace {

constexpr double kConvergedTol = 1e-8;   // warning-flag tolerance
constexpr double kAutoGrowTol = 1e-10;   // auto-cutoff target (transfer)

struct Kahan {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// ---------------------------------------------------------------------------
// Enumerate engine: direct sum over the height box |n_f|,|m|,|m'| <= Q with
// the reference face pinned to 0. Variables are assigned in the fixed order
// (m, m', n_1, .., n_{F-1}); each edge weight is multiplied in at the level
// where its last face is assigned, so the recursion carries running partial
// products.
// ---------------------------------------------------------------------------

struct EnumEdge {
  int f_plus, f_minus;
  int cx, cy;  // winding multipliers (0/1)
};

struct EnumAccum {
  std::vector<Kahan> w_by_m;  // index m + Q
  Kahan w_inner;              // all variables within Q-1
  Kahan w_ratio;              // sum of w * sum_e I'_k/I_k
  Kahan w_m2;
  Kahan w_m1;
};

struct EnumContext {
  int q;
  int f_count;
  std::vector<std::vector<EnumEdge>> edges_at_level;
  std::vector<double> scaled;  // I~_k table
  std::vector<double> ratio;   // I'_k / I_k
  std::vector<int> heights;    // by face, heights[0] = 0
  int m = 0, mp = 0;
  EnumAccum acc;
};

void enum_level(EnumContext& ctx, int level, double w, double rsum,
                bool inner) {
  const int total_levels = ctx.f_count + 1;  // m, m', faces 1..F-1
  if (level == total_levels) {
    ctx.acc.w_by_m[ctx.m + ctx.q].add(w);
    if (inner) ctx.acc.w_inner.add(w);
    ctx.acc.w_ratio.add(w * rsum);
    ctx.acc.w_m1.add(w * ctx.m);
    ctx.acc.w_m2.add(w * static_cast<double>(ctx.m) * ctx.m);
    return;
  }
  for (int v = -ctx.q; v <= ctx.q; ++v) {
    if (level == 0) {
      ctx.m = v;
    } else if (level == 1) {
      ctx.mp = v;
    } else {
      ctx.heights[level - 1] = v;
    }
    double w2 = w;
    double r2 = rsum;
    for (const EnumEdge& e : ctx.edges_at_level[level]) {
      const int k = std::abs(ctx.heights[e.f_plus] - ctx.heights[e.f_minus] +
                             e.cx * ctx.m + e.cy * ctx.mp);
      w2 *= ctx.scaled[k];
      r2 += ctx.ratio[k];
    }
    enum_level(ctx, level + 1, w2, r2, inner && std::abs(v) <= ctx.q - 1);
  }
}

struct RawSums {
  double tot = 0.0;
  double tot_phi = 0.0;
  double tot_inner = 0.0;  // enumerate only
  double k1 = 0.0;         // sum w*m
  double k2 = 0.0;         // sum w*m^2
  double dtot = 0.0;       // d tot / d beta (scaled weights)
  bool has_deriv_ratio = false;
  double ratio_tot = 0.0;  // sum w * sum_e I'_k/I_k  (enumerate)
  std::vector<double> w_abs_m;
};

RawSums enumerate_raw(int size, double beta, int q, double phi) {
  const TorusLattice lat(size);
  const int f_count = lat.num_faces();
  EnumContext ctx;
  ctx.q = q;
  ctx.f_count = f_count;
  ctx.heights.assign(f_count, 0);
  ctx.edges_at_level.assign(f_count + 1, {});
  for (int e = 0; e < lat.num_edges(); ++e) {
    const auto& faces = lat.edge_faces(e);
    EnumEdge ee;
    ee.f_plus = faces[0][1] > 0 ? faces[0][0] : faces[1][0];
    ee.f_minus = faces[0][1] > 0 ? faces[1][0] : faces[0][0];
    ee.cx = lat.in_loop_x(e) ? 1 : 0;
    ee.cy = lat.in_loop_y(e) ? 1 : 0;
    int level = 0;
    if (ee.cx) level = std::max(level, 0);
    if (ee.cy) level = std::max(level, 1);
    if (ee.f_plus > 0) level = std::max(level, ee.f_plus + 1);
    if (ee.f_minus > 0) level = std::max(level, ee.f_minus + 1);
    ctx.edges_at_level[level].push_back(ee);
  }
  const int kmax = 3 * q + 4;
  ctx.scaled = bessel_i_scaled(kmax + 2, beta);
  ctx.ratio.assign(kmax + 1, 0.0);
  for (int k = 0; k <= kmax; ++k) {
    const double below = (k == 0) ? ctx.scaled[1] : ctx.scaled[k - 1];
    ctx.ratio[k] = (below + ctx.scaled[k + 1]) / (2.0 * ctx.scaled[k]);
  }
  ctx.acc.w_by_m.assign(2 * q + 1, Kahan{});

  enum_level(ctx, 0, 1.0, 0.0, true);

  RawSums out;
  out.w_abs_m.assign(q + 1, 0.0);
  for (int m = -q; m <= q; ++m) {
    const double wm = ctx.acc.w_by_m[m + q].sum;
    out.tot += wm;
    out.tot_phi += wm * std::cos(phi * m);
    out.w_abs_m[std::abs(m)] += wm;
  }
  for (int m = 0; m <= q; ++m) out.w_abs_m[m] *= (m == 0) ? 1.0 : 0.5;
  out.tot_inner = ctx.acc.w_inner.sum;
  out.k1 = ctx.acc.w_m1.sum;
  out.k2 = ctx.acc.w_m2.sum;
  out.ratio_tot = ctx.acc.w_ratio.sum;
  out.has_deriv_ratio = true;
  return out;
}

// ---------------------------------------------------------------------------
// Height-box transfer engine (L <= 3): the same finite sum as enumerate_raw,
// reorganized as a column-to-column propagation. The state is one column of
// face heights; the reference face pins component 0 of column 0. Kernels
// factor over rows, so they are applied axis by axis.
// ---------------------------------------------------------------------------

struct PairMatrix {
  // (value, d/dbeta) pair of an S x C array, row-major
  std::vector<double> v, d;
};

class HeightTransfer {
 public:
  HeightTransfer(int size, double beta, int q)
      : L_(size), q_(q), n_(2 * q + 1) {
    s_total_ = 1;
    for (int y = 0; y < L_; ++y) s_total_ *= n_;
    s_col_ = s_total_ / n_;
    const int kmax = 3 * q + 4;
    scaled_ = bessel_i_scaled(kmax + 2, beta);
    dscaled_ = bessel_i_scaled_deriv(scaled_);
    scaled_.resize(kmax + 1);
    dscaled_.resize(kmax + 1);
  }

  RawSums run(double phi) {
    RawSums out;
    out.w_abs_m.assign(q_ + 1, 0.0);
    for (int m = -q_; m <= q_; ++m) {
      double wm_tot = 0.0, dwm_tot = 0.0;
      run_m(m, wm_tot, dwm_tot);
      out.tot += wm_tot;
      out.dtot += dwm_tot;
      out.tot_phi += wm_tot * std::cos(phi * m);
      out.k1 += wm_tot * m;
      out.k2 += wm_tot * static_cast<double>(m) * m;
      out.w_abs_m[std::abs(m)] += (m == 0) ? wm_tot : 0.5 * wm_tot;
    }
    return out;
  }

 private:
  int digit(long long s, int axis) const {
    long long p = 1;
    for (int i = 0; i < axis; ++i) p *= n_;
    return static_cast<int>((s / p) % n_);
  }

  double ib(int k) const { return scaled_[std::abs(k)]; }
  double dib(int k) const { return dscaled_[std::abs(k)]; }

  // D_m(s) = prod_y I[s_{y-1} - s_y + m d_{y0}]  (cyclic in y)
  void build_diag(int m, std::vector<double>& dv, std::vector<double>& dd) {
    dv.assign(s_total_, 0.0);
    dd.assign(s_total_, 0.0);
    for (long long s = 0; s < s_total_; ++s) {
      double p = 1.0, dp = 0.0;
      for (int y = 0; y < L_; ++y) {
        const int prev = digit(s, (y + L_ - 1) % L_) - q_;
        const int cur = digit(s, y) - q_;
        const int k = prev - cur + (y == 0 ? m : 0);
        dp = dp * ib(k) + p * dib(k);
        p *= ib(k);
      }
      dv[s] = p;
      dd[s] = dp;
    }
  }

  // Apply the factored kernel t(a->b) = I[b - a + shift] along every axis of
  // the row index of (X, dX), S x C row-major.
  void apply_kernel(PairMatrix& x, int shift) const {
    const long long c = static_cast<long long>(x.v.size()) / s_total_;
    std::vector<double> fiber_v(n_ * c), fiber_d(n_ * c);
    for (int axis = 0; axis < L_; ++axis) {
      long long pre = 1;
      for (int i = 0; i < axis; ++i) pre *= n_;
      const long long stride = pre * c;
      const long long outer = s_total_ / (pre * n_);
      for (long long o = 0; o < outer; ++o) {
        for (long long in = 0; in < pre; ++in) {
          const long long base = (o * n_ * pre + in) * c;
          std::fill(fiber_v.begin(), fiber_v.end(), 0.0);
          std::fill(fiber_d.begin(), fiber_d.end(), 0.0);
          for (int b = 0; b < n_; ++b) {
            double* fv = fiber_v.data() + b * c;
            double* fd = fiber_d.data() + b * c;
            for (int a = 0; a < n_; ++a) {
              const int k = b - a + shift;
              if (std::abs(k) >= static_cast<int>(scaled_.size())) continue;
              const double t = ib(k), dt = dib(k);
              const double* xv = x.v.data() + base + a * stride;
              const double* xd = x.d.data() + base + a * stride;
              for (long long j = 0; j < c; ++j) {
                fv[j] += t * xv[j];
                fd[j] += t * xd[j] + dt * xv[j];
              }
            }
          }
          for (int b = 0; b < n_; ++b) {
            std::copy_n(fiber_v.data() + b * c, c,
                        x.v.data() + base + b * stride);
            std::copy_n(fiber_d.data() + b * c, c,
                        x.d.data() + base + b * stride);
          }
        }
      }
    }
  }

  void run_m(int m, double& w_out, double& dw_out) {
    std::vector<double> dv, dd;
    build_diag(m, dv, dd);

    // pinned states: digit of axis 0 equals q_ (height 0)
    PairMatrix x;
    x.v.assign(s_total_ * s_col_, 0.0);
    x.d.assign(s_total_ * s_col_, 0.0);
    for (long long j = 0; j < s_col_; ++j) {
      const long long s0 = q_ + n_ * j;
      x.v[s0 * s_col_ + j] = dv[s0];
      x.d[s0 * s_col_ + j] = dd[s0];
    }
    for (int step = 1; step < L_; ++step) {
      apply_kernel(x, 0);
      for (long long s = 0; s < s_total_; ++s) {
        double* xv = x.v.data() + s * s_col_;
        double* xd = x.d.data() + s * s_col_;
        for (long long j = 0; j < s_col_; ++j) {
          xd[j] = xd[j] * dv[s] + xv[j] * dd[s];
          xv[j] *= dv[s];
        }
      }
    }
    Kahan w, dw;
    for (int mp = -q_; mp <= q_; ++mp) {
      PairMatrix y = x;
      apply_kernel(y, mp);
      for (long long j = 0; j < s_col_; ++j) {
        const long long s0 = q_ + n_ * j;
        w.add(y.v[s0 * s_col_ + j]);
        dw.add(y.d[s0 * s_col_ + j]);
      }
    }
    w_out = w.sum;
    dw_out = dw.sum;
  }

  int L_, q_, n_;
  long long s_total_, s_col_;
  std::vector<double> scaled_, dscaled_;
};

// ---------------------------------------------------------------------------
// Current-basis transfer engine (2 <= L <= 5): the state is the column's
// relative-current pattern r in [-Q,Q]^{L-1}; the per-link offset u and the
// second winding are absorbed into an unconstrained sum inside the kernel
//   W(r,r') = sum_u I[u] prod_y I[u + r'_y - r_y],
// and the x-winding m survives as a global sector label with diagonal weight
//   D_m(r) = I[r_{L-1} + m] prod_y I[rho_{y-1} - rho_y],  rho = (0, r).
// Sector weights are w_m = tr[(D_m W)^L]; the twist enters as cos(m phi).
// Truncation here is per current variable, so winding tilt sectors (which
// force heights ~ c L in the height box) are captured at small Q.
// ---------------------------------------------------------------------------

struct CurrentRaw {
  double tot = 0.0, tot_phi = 0.0, dtot = 0.0, k2 = 0.0;
  bool has_energy = false;
  std::vector<double> w_abs_m;
};

CurrentRaw current_transfer_raw(int size, double beta, int q, double phi,
                                std::size_t max_states, bool want_energy) {
  const int L = size;
  const int n = 2 * q + 1;
  long long s = 1;
  for (int y = 0; y < L - 1; ++y) s *= n;
  if (static_cast<std::size_t>(s) > max_states) {
    throw std::runtime_error(
        "z_transfer: state space (2Q+1)^(L-1) = " + std::to_string(s) +
        " exceeds max_states = " + std::to_string(max_states) +
        "; lower the cutoff or raise the bound");
  }
  const int m_cap = 60;
  const int kmax = 3 * q + m_cap + 4;
  auto scaled = bessel_i_scaled(kmax + 2, beta);
  auto dscaled = bessel_i_scaled_deriv(scaled);
  auto ib = [&](int k) { return scaled[std::abs(k)]; };
  auto dib = [&](int k) { return dscaled[std::abs(k)]; };

  // state r components, comps[a][y] = r_y in [-q, q]
  std::vector<int> comps(s * (L - 1));
  for (long long a = 0; a < s; ++a) {
    long long rest = a;
    for (int y = 0; y < L - 1; ++y) {
      comps[a * (L - 1) + y] = static_cast<int>(rest % n) - q;
      rest /= n;
    }
  }
  auto comp = [&](long long st, int y) { return comps[st * (L - 1) + y]; };

  Eigen::MatrixXd w_mat(s, s), dw_mat;
  if (want_energy) dw_mat.resize(s, s);
  for (long long a = 0; a < s; ++a) {
    for (long long b = 0; b < s; ++b) {
      double acc = 0.0, dacc = 0.0;
      if (want_energy) {
        for (int u = -q; u <= q; ++u) {
          double p = ib(u), dp = dib(u);
          for (int y = 0; y < L - 1; ++y) {
            const int k = u + comp(b, y) - comp(a, y);
            dp = dp * ib(k) + p * dib(k);
            p *= ib(k);
          }
          acc += p;
          dacc += dp;
        }
        dw_mat(a, b) = dacc;
      } else {
        for (int u = -q; u <= q; ++u) {
          double p = ib(u);
          for (int y = 0; y < L - 1; ++y) {
            p *= ib(u + comp(b, y) - comp(a, y));
          }
          acc += p;
        }
      }
      w_mat(a, b) = acc;
    }
  }

  CurrentRaw out;
  out.has_energy = want_energy;
  Eigen::VectorXd diag(s), ddiag(s);
  int m = 0;
  double w0 = 0.0;
  std::vector<double> wm_list, dwm_list;
  for (;; ++m) {
    if (m > m_cap) break;
    for (long long a = 0; a < s; ++a) {
      double p = 1.0, dp = 0.0;
      int rho_prev = 0;
      for (int y = 0; y < L - 1; ++y) {
        const int rho = comp(a, y);
        const int k = rho_prev - rho;
        dp = dp * ib(k) + p * dib(k);
        p *= ib(k);
        rho_prev = rho;
      }
      const int k0 = rho_prev + m;  // the y=0 x-edge carries the winding
      ddiag(a) = dp * ib(k0) + p * dib(k0);
      diag(a) = p * ib(k0);
    }
    const Eigen::MatrixXd a_mat = diag.asDiagonal() * w_mat;
    Eigen::MatrixXd da_mat;
    if (want_energy) {
      da_mat = diag.asDiagonal() * dw_mat;
      da_mat += ddiag.asDiagonal() * w_mat;
    }

    double wm = 0.0, dwm = 0.0;
    if (L == 2) {
      wm = a_mat.cwiseProduct(a_mat.transpose()).sum();
      if (want_energy) dwm = 2.0 * a_mat.cwiseProduct(da_mat.transpose()).sum();
    } else if (L == 3) {
      const Eigen::MatrixXd a2 = a_mat * a_mat;
      wm = a2.cwiseProduct(a_mat.transpose()).sum();
      if (want_energy) dwm = 3.0 * a2.cwiseProduct(da_mat.transpose()).sum();
    } else if (L == 4) {
      const Eigen::MatrixXd a2 = a_mat * a_mat;
      wm = a2.cwiseProduct(a2.transpose()).sum();
      if (want_energy) {
        const Eigen::MatrixXd a3 = a2 * a_mat;
        dwm = 4.0 * a3.cwiseProduct(da_mat.transpose()).sum();
      }
    } else {  // L == 5
      const Eigen::MatrixXd a2 = a_mat * a_mat;
      const Eigen::MatrixXd a3 = a2 * a_mat;
      wm = a2.cwiseProduct(a3.transpose()).sum();
      if (want_energy) {
        const Eigen::MatrixXd a4 = a2 * a2;
        dwm = 5.0 * a4.cwiseProduct(da_mat.transpose()).sum();
      }
    }
    wm_list.push_back(wm);
    dwm_list.push_back(dwm);
    if (m == 0) w0 = wm;
    if (m >= 3 && wm <= 1e-16 * w0) break;
  }
  out.w_abs_m.assign(wm_list.size(), 0.0);
  for (std::size_t i = 0; i < wm_list.size(); ++i) {
    const double mult = (i == 0) ? 1.0 : 2.0;  // w_{-m} = w_m
    out.tot += mult * wm_list[i];
    out.dtot += mult * dwm_list[i];
    out.tot_phi += mult * wm_list[i] * std::cos(phi * static_cast<double>(i));
    out.k2 += mult * wm_list[i] * static_cast<double>(i) * i;
    out.w_abs_m[i] = wm_list[i];
  }
  return out;
}

PartitionResult finish(int size, double beta, int q, double phi,
                       DualMethod method, const RawSums& raw,
                       double tot_prev_q) {
  const double m_edges = 2.0 * size * size;
  PartitionResult res;
  res.method = method;
  res.cutoff = q;
  res.ln_z = std::log(raw.tot) + m_edges * beta;
  if (raw.tot_phi <= 0.0) {
    throw std::runtime_error("exact_dual: twisted sum non-positive");
  }
  res.ln_z_twisted = std::log(raw.tot_phi) + m_edges * beta;
  res.k_mean = raw.k1 / raw.tot;
  res.k2_mean = raw.k2 / raw.tot;
  if (raw.has_deriv_ratio) {
    res.energy = -raw.ratio_tot / raw.tot;
  } else {
    res.energy = -(m_edges + raw.dtot / raw.tot);
  }
  res.convergence = std::abs(res.ln_z - (std::log(tot_prev_q) + m_edges * beta));
  res.converged = res.convergence <= kConvergedTol;
  res.winding_probs.assign(raw.w_abs_m.size(), 0.0);
  for (std::size_t i = 0; i < raw.w_abs_m.size(); ++i) {
    res.winding_probs[i] = raw.w_abs_m[i] / raw.tot;
  }
  res.twist = phi;
  return res;
}

PartitionResult zero_beta_result(double phi, DualMethod method, int q) {
  // only the all-zero current survives: Z = 1 for any twist
  PartitionResult res;
  res.method = method;
  res.cutoff = q;
  res.ln_z = 0.0;
  res.ln_z_twisted = 0.0;
  res.k_mean = 0.0;
  res.k2_mean = 0.0;
  res.energy = 0.0;
  res.convergence = 0.0;
  res.converged = true;
  res.winding_probs = {1.0};
  res.twist = phi;
  return res;
}

}  // namespace

void DualSumSpec::validate() const {
  if (size < 2) throw std::invalid_argument("DualSumSpec: size must be >= 2");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("DualSumSpec: beta must be finite and >= 0");
  }
  if (cutoff < 0) throw std::invalid_argument("DualSumSpec: cutoff < 0");
  if (!(std::abs(twist) <= 3.14159265358979323846 + 1e-12)) {
    throw std::invalid_argument("DualSumSpec: twist must lie in [-pi, pi]");
  }
}

int default_cutoff(double beta) {
  return static_cast<int>(std::ceil(2.0 * std::sqrt(std::max(0.0, beta)))) + 3;
}

PartitionResult z_dual_sum(const DualSumSpec& spec) {
  spec.validate();
  if (spec.size > 3) {
    throw std::invalid_argument(
        "z_dual_sum: enumeration supports L <= 3; use the transfer method");
  }
  const int q_cap = spec.size == 2 ? 14 : 4;
  int q = spec.cutoff > 0 ? spec.cutoff : std::min(default_cutoff(spec.beta), q_cap);
  if (q > q_cap) {
    throw std::invalid_argument("z_dual_sum: cutoff " + std::to_string(q) +
                                " exceeds the enumeration cap " +
                                std::to_string(q_cap) + " at L = " +
                                std::to_string(spec.size));
  }
  if (spec.beta == 0.0) return zero_beta_result(spec.twist, DualMethod::Enumerate, q);
  RawSums raw = enumerate_raw(spec.size, spec.beta, q, spec.twist);
  // single-pass convergence: tot restricted to the (Q-1)-box
  return finish(spec.size, spec.beta, q, spec.twist, DualMethod::Enumerate, raw,
                raw.tot_inner);
}

PartitionResult z_transfer(const DualSumSpec& spec) {
  spec.validate();
  if (spec.size > 5) {
    throw std::invalid_argument("z_transfer: supports L <= 5");
  }
  if (spec.size <= 3) {
    // exact reorganization of the height-box sum; identical to z_dual_sum
    const int q_cap = spec.size == 2 ? 14 : 6;
    int q = spec.cutoff > 0 ? spec.cutoff
                            : std::min(default_cutoff(spec.beta), q_cap);
    const long long prop_size = [&] {
      long long v = 1;
      for (int i = 0; i < 2 * spec.size - 1; ++i) v *= 2 * q + 1;
      return v;  // propagated block is S * S_col = (2Q+1)^(2L-1)
    }();
    if (q > q_cap || prop_size > 4'000'000) {
      throw std::runtime_error("z_transfer: height-box state space too large");
    }
    if (spec.beta == 0.0) return zero_beta_result(spec.twist, DualMethod::Transfer, q);
    HeightTransfer ht(spec.size, spec.beta, q);
    RawSums raw = ht.run(spec.twist);
    HeightTransfer ht_prev(spec.size, spec.beta, q - 1);
    RawSums raw_prev = ht_prev.run(spec.twist);
    return finish(spec.size, spec.beta, q, spec.twist, DualMethod::Transfer,
                  raw, raw_prev.tot);
  }
  return z_current_transfer(spec);
}

PartitionResult z_current_transfer(const DualSumSpec& spec) {
  spec.validate();
  if (spec.size > 5) {
    throw std::invalid_argument("z_transfer: supports L <= 5");
  }
  const bool auto_q = spec.cutoff == 0;
  // The per-variable current truncation converges like (I_{Q+1}/I_0)^L, so
  // the auto default starts well below the height-box rule and grows until
  // the Q -> Q-1 change is negligible.
  int q = auto_q ? std::max(3, static_cast<int>(std::ceil(spec.beta)) + 2)
                 : spec.cutoff;
  if (spec.beta == 0.0) return zero_beta_result(spec.twist, DualMethod::Transfer, q);

  auto states_of = [&](int qq) {
    long long v = 1;
    for (int i = 0; i < spec.size - 1; ++i) v *= 2 * qq + 1;
    return v;
  };
  if (auto_q) {
    while (states_of(q) > static_cast<long long>(spec.max_states) && q > 1) --q;
  }
  const int grow_limit = q + 4;
  CurrentRaw prev = current_transfer_raw(spec.size, spec.beta, q - 1,
                                         spec.twist, spec.max_states, false);
  for (;;) {
    CurrentRaw raw = current_transfer_raw(spec.size, spec.beta, q, spec.twist,
                                          spec.max_states, spec.want_energy);
    RawSums rs;
    rs.tot = raw.tot;
    rs.tot_phi = raw.tot_phi;
    rs.dtot = raw.dtot;
    rs.k1 = 0.0;  // exact by w_{-m} = w_m
    rs.k2 = raw.k2;
    rs.w_abs_m = raw.w_abs_m;
    PartitionResult res = finish(spec.size, spec.beta, q, spec.twist,
                                 DualMethod::Transfer, rs, prev.tot);
    if (!raw.has_energy) res.energy = std::nan("");
    if (!auto_q || res.convergence <= kAutoGrowTol || q >= grow_limit ||
        states_of(q + 1) > static_cast<long long>(spec.max_states)) {
      return res;
    }
    prev = std::move(raw);
    ++q;
  }
}

QuadratureResult z_vertex_quadrature(double beta, double twist, int grid) {
  if (grid < 64) {
    throw std::invalid_argument("z_vertex_quadrature: grid must be >= 64");
  }
  if (!(beta >= 0.0)) {
    throw std::invalid_argument("z_vertex_quadrature: beta must be >= 0");
  }
  const TorusLattice lat(2);
  const int m_edges = lat.num_edges();
  struct Bond {
    int i, j;
    double shift;
  };
  std::vector<Bond> bonds;
  for (int e = 0; e < m_edges; ++e) {
    bonds.push_back(
        {lat.edge(e).start, lat.edge(e).end, lat.twisted(e) ? twist : 0.0});
  }
  const double step = 2.0 * 3.14159265358979323846 / grid;
  Kahan sw, sws;
  double theta[4];
  theta[0] = 0.0;
  for (int i1 = 0; i1 < grid; ++i1) {
    theta[1] = step * i1;
    for (int i2 = 0; i2 < grid; ++i2) {
      theta[2] = step * i2;
      for (int i3 = 0; i3 < grid; ++i3) {
        theta[3] = step * i3;
        double s = 0.0;
        for (const Bond& b : bonds) s += std::cos(theta[b.i] - theta[b.j] - b.shift);
        const double w = std::exp(beta * (s - m_edges));
        sw.add(w);
        sws.add(w * s);
      }
    }
  }
  const double inv_points = 1.0 / (static_cast<double>(grid) * grid * grid);
  QuadratureResult res;
  res.ln_z = std::log(sw.sum * inv_points) + beta * m_edges;
  res.energy = -sws.sum / sw.sum;
  return res;
}

PartitionResult z_exact(const DualSumSpec& spec) {
  switch (spec.method) {
    case DualMethod::Enumerate:
      return z_dual_sum(spec);
    case DualMethod::Transfer:
      return z_transfer(spec);
    case DualMethod::Quadrature: {
      if (spec.size != 2) {
        throw std::invalid_argument("quadrature method requires L = 2");
      }
      const auto q0 = z_vertex_quadrature(spec.beta, 0.0);
      PartitionResult res;
      res.method = DualMethod::Quadrature;
      res.cutoff = 0;
      res.ln_z = q0.ln_z;
      res.energy = q0.energy;
      res.twist = spec.twist;
      if (spec.twist != 0.0) {
        res.ln_z_twisted = z_vertex_quadrature(spec.beta, spec.twist).ln_z;
      } else {
        res.ln_z_twisted = q0.ln_z;
      }
      // chi_F by central second difference; the series engines get it exactly
      const double h = 0.05;
      const double lzp = z_vertex_quadrature(spec.beta, h).ln_z;
      res.k2_mean = (2.0 * q0.ln_z - 2.0 * lzp) / (h * h);
      res.k_mean = 0.0;
      res.convergence = 0.0;
      res.converged = true;
      return res;
    }
  }
  throw std::logic_error("z_exact: unknown method");
}

double stiffness_exact(int size, double beta, int cutoff) {
  if (beta <= 0.0) return 0.0;
  DualSumSpec spec;
  spec.size = size;
  spec.beta = beta;
  spec.cutoff = cutoff;
  spec.want_energy = false;
  const PartitionResult res = z_current_transfer(spec);
  return res.k2_mean / beta;  // T <K^2>
}

double energy_exact(int size, double beta, int cutoff) {
  DualSumSpec spec;
  spec.size = size;
  spec.beta = beta;
  spec.cutoff = cutoff;
  return z_current_transfer(spec).energy;
}

}  // namespace rotorxy::exact_dual
