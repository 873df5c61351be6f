#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace rotorxy::analysis {

struct BinnedSeries {
  std::vector<double> bin_means;
  std::size_t bin_size = 1;
  double tau_int = 0.5;     // integrated autocorrelation time estimate
  bool bin_size_ok = true;  // bin_size >= 2 * tau_int
};

// Windowed integrated autocorrelation time (window W grows until W >= 6 tau).
double integrated_autocorr_time(std::span<const double> series);

// Partition into num_bins equal bins (default 50, trailing remainder dropped)
// and flag bins shorter than twice the autocorrelation time.
BinnedSeries bin_series(std::span<const double> series,
                        std::size_t num_bins = 50);

// Leave-one-bin-out jackknife for a statistic of several ingredient means.
// ingredient_bins[i] holds the bin means of ingredient i (equal lengths,
// >= 10 bins). Returns (statistic at the full means, jackknife stderr).
std::pair<double, double> jackknife(
    const std::vector<std::vector<double>>& ingredient_bins,
    const std::function<double(std::span<const double>)>& statistic);

// Convenience: bin each raw ingredient series with a common bin count chosen
// from the series length, then jackknife.
std::pair<double, double> binned_jackknife(
    const std::vector<std::vector<double>>& ingredient_series,
    const std::function<double(std::span<const double>)>& statistic);

// Mean with binning + jackknife error.
std::pair<double, double> mean_error(std::span<const double> series);

// Fritsch-Carlson monotone piecewise-cubic interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic(std::span<const double> x, std::span<const double> y);
  double operator()(double x) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, slope_;
};

struct StiffnessTable {
  std::vector<double> temperature;
  std::vector<double> rho;
  std::vector<double> rho_err;
};

struct CrossingEstimate {
  double t_star;
  double err_minus, err_plus;  // from the rho +- err bands
};

// T* where the monotone-interpolated rho_s(T) crosses line_slope * T
// (the universal-jump proxy uses slope 2/pi). Throws when the table does not
// bracket the crossing.
CrossingEstimate kt_crossing(const StiffnessTable& table,
                             double line_slope = 0.6366197723675814);

}  // namespace rotorxy::analysis
