#pragma once

#include <vector>

namespace rotorxy {

// Modified Bessel functions of the first kind, integer order. The workhorse
// is the exponentially scaled table e^{-x} I_k(x) for k = 0..kmax, computed
// by Miller's downward recurrence with the normalization
//   1 = e^{-x} [I_0(x) + 2 sum_{k>=1} I_k(x)],
// which stays finite for any x >= 0.
std::vector<double> bessel_i_scaled(int kmax, double x);

// d/dx of the scaled table: e^{-x}(I_k'(x) - I_k(x)) with
// I_k' = (I_{k-1} + I_{k+1})/2. The I_{kmax+1} term is unavailable and is
// dropped, so build the input table two orders past the orders you use.
std::vector<double> bessel_i_scaled_deriv(const std::vector<double>& scaled);

double bessel_i(int k, double x);      // I_k(x); overflows near x ~ 700
double log_bessel_i(int k, double x);  // ln I_k(x); safe for large x

}  // namespace rotorxy
