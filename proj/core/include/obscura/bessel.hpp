#pragma once

namespace obscura {

/// Bessel function of the first kind, order one.
double bessel_j1(double x);

/// First positive zero of J1.
inline constexpr double kBesselJ1FirstZero = 3.8317059702075125;

}  // namespace obscura
