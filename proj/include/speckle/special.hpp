#pragma once

namespace speckle {

/// Natural log of the modified Bessel function of the second (third) kind,
/// log K_nu(x), for any real order and x > 0.
///
/// Temme's series for x < 2 and Steed's continued fraction otherwise give
/// K_mu and K_{mu+1} for |mu| <= 1/2; forward recurrence in the order
/// carries them to nu with periodic rescaling, so the log is finite even
/// where K_nu itself over- or underflows.
double log_bessel_k(double nu, double x);

/// K_nu(x). Throws OverflowError when the value is not a normal double.
double bessel_k(double nu, double x);

}  // namespace speckle
