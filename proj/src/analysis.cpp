#include "rotorxy/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rotorxy::analysis {

double integrated_autocorr_time(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) return 0.5;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var <= 0.0) return 0.5;

  double tau = 0.5;
  const std::size_t w_max = n / 4;
  for (std::size_t t = 1; t <= w_max; ++t) {
    double c = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) {
      c += (series[i] - mean) * (series[i + t] - mean);
    }
    c /= static_cast<double>(n - t) * var;
    tau += c;
    if (static_cast<double>(t) >= 6.0 * tau) break;  // Sokal window
  }
  return std::max(tau, 0.5);
}

BinnedSeries bin_series(std::span<const double> series, std::size_t num_bins) {
  if (series.empty()) throw std::invalid_argument("bin_series: empty series");
  if (num_bins == 0) throw std::invalid_argument("bin_series: num_bins == 0");
  num_bins = std::min(num_bins, series.size());
  BinnedSeries out;
  out.bin_size = series.size() / num_bins;
  out.bin_means.resize(num_bins);
  for (std::size_t b = 0; b < num_bins; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.bin_size; ++i) {
      s += series[b * out.bin_size + i];
    }
    out.bin_means[b] = s / static_cast<double>(out.bin_size);
  }
  out.tau_int = integrated_autocorr_time(series);
  out.bin_size_ok = static_cast<double>(out.bin_size) >= 2.0 * out.tau_int;
  return out;
}

std::pair<double, double> jackknife(
    const std::vector<std::vector<double>>& ingredient_bins,
    const std::function<double(std::span<const double>)>& statistic) {
  if (ingredient_bins.empty()) {
    throw std::invalid_argument("jackknife: no ingredients");
  }
  const std::size_t nb = ingredient_bins.front().size();
  if (nb < 10) {
    throw std::invalid_argument("jackknife: need at least 10 bins, got " +
                                std::to_string(nb));
  }
  for (const auto& bins : ingredient_bins) {
    if (bins.size() != nb) {
      throw std::invalid_argument("jackknife: ingredient bin counts differ");
    }
  }
  const std::size_t ni = ingredient_bins.size();
  std::vector<double> totals(ni, 0.0), means(ni);
  for (std::size_t i = 0; i < ni; ++i) {
    for (double v : ingredient_bins[i]) totals[i] += v;
    means[i] = totals[i] / static_cast<double>(nb);
  }
  const double full = statistic(means);

  std::vector<double> loo(ni);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < ni; ++i) {
      loo[i] = (totals[i] - ingredient_bins[i][b]) / static_cast<double>(nb - 1);
    }
    const double v = statistic(loo);
    sum += v;
    sum_sq += v * v;
  }
  const double mean_loo = sum / static_cast<double>(nb);
  double var = (sum_sq / static_cast<double>(nb)) - mean_loo * mean_loo;
  var = std::max(var, 0.0);
  const double err =
      std::sqrt(var * static_cast<double>(nb - 1));
  return {full, err};
}

std::pair<double, double> binned_jackknife(
    const std::vector<std::vector<double>>& ingredient_series,
    const std::function<double(std::span<const double>)>& statistic) {
  if (ingredient_series.empty() || ingredient_series.front().empty()) {
    throw std::invalid_argument("binned_jackknife: empty input");
  }
  const std::size_t n = ingredient_series.front().size();
  const std::size_t nb = std::min<std::size_t>(50, std::max<std::size_t>(10, n / 10));
  std::vector<std::vector<double>> bins;
  bins.reserve(ingredient_series.size());
  for (const auto& s : ingredient_series) {
    bins.push_back(bin_series(s, nb).bin_means);
  }
  return jackknife(bins, statistic);
}

std::pair<double, double> mean_error(std::span<const double> series) {
  std::vector<double> copy(series.begin(), series.end());
  return binned_jackknife({copy},
                          [](std::span<const double> m) { return m[0]; });
}

MonotoneCubic::MonotoneCubic(std::span<const double> x,
                             std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw std::invalid_argument("MonotoneCubic: need >= 2 matching points");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw std::invalid_argument("MonotoneCubic: x must be increasing");
    }
  }
  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  }
  slope_.resize(n);
  slope_[0] = d[0];
  slope_[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    slope_[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
  }
  // Fritsch-Carlson limiter keeps the interpolant monotone per interval
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      slope_[i] = slope_[i + 1] = 0.0;
      continue;
    }
    const double a = slope_[i] / d[i];
    const double b = slope_[i + 1] / d[i];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double t = 3.0 / std::sqrt(r);
      slope_[i] = t * a * d[i];
      slope_[i + 1] = t * b * d[i];
    }
  }
}

double MonotoneCubic::operator()(double x) const {
  if (x < x_.front() || x > x_.back()) {
    throw std::domain_error("MonotoneCubic: x = " + std::to_string(x) +
                            " outside [" + std::to_string(x_.front()) + ", " +
                            std::to_string(x_.back()) + "]");
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i =
      std::min(x_.size() - 2,
               static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                   0, it - x_.begin() - 1)));
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] +
         h11 * h * slope_[i + 1];
}

namespace {

double solve_crossing(const MonotoneCubic& rho, double slope, double lo,
                      double hi) {
  auto g = [&](double t) { return rho(t) - slope * t; };
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (glo * ghi > 0.0) {
    throw std::invalid_argument("kt_crossing: no bracketing interval");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0 || hi - lo < 1e-13) return mid;
    if (gm * glo > 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CrossingEstimate kt_crossing(const StiffnessTable& table, double line_slope) {
  const std::size_t n = table.temperature.size();
  if (n < 2 || table.rho.size() != n) {
    throw std::invalid_argument("kt_crossing: malformed table");
  }
  const MonotoneCubic rho(table.temperature, table.rho);
  const double lo = table.temperature.front();
  const double hi = table.temperature.back();
  if (!((rho(lo) - line_slope * lo) > 0.0 && (rho(hi) - line_slope * hi) < 0.0)) {
    throw std::invalid_argument(
        "kt_crossing: table does not bracket the crossing");
  }
  CrossingEstimate est;
  est.t_star = solve_crossing(rho, line_slope, lo, hi);
  est.err_minus = est.err_plus = 0.0;
  if (table.rho_err.size() == n) {
    std::vector<double> up(n), down(n);
    for (std::size_t i = 0; i < n; ++i) {
      up[i] = table.rho[i] + table.rho_err[i];
      down[i] = table.rho[i] - table.rho_err[i];
    }
    const MonotoneCubic rho_up(table.temperature, up);
    const MonotoneCubic rho_down(table.temperature, down);
    auto try_solve = [&](const MonotoneCubic& f) {
      auto g = [&](double t) { return f(t) - line_slope * t; };
      if (g(lo) > 0.0 && g(hi) < 0.0) return solve_crossing(f, line_slope, lo, hi);
      return g(lo) <= 0.0 ? lo : hi;  // band exits through an endpoint
    };
    const double t_up = try_solve(rho_up);
    const double t_down = try_solve(rho_down);
    est.err_plus = std::max(0.0, t_up - est.t_star);
    est.err_minus = std::max(0.0, est.t_star - t_down);
  }
  return est;
}

}  // namespace rotorxy::analysis
