#pragma once

namespace dirkde {

//! log I_nu(z) for nu >= -1/2, z >= 0. Finite for z up to at least 1e6.
double log_bessel_i(double nu, double z);

//! log(I_nu(z) e^{-z}), computed without forming log I_nu(z).
double log_bessel_i_scaled(double nu, double z);

//! log C_q(kappa), the von Mises normalizing constant on the q-sphere.
double log_cq(int q, double kappa);

//! Surface area of the q-sphere and its logarithm.
double sphere_area(int q);
double log_sphere_area(int q);

struct KernelConstants
{
  double lambda;
  double b;
  double d;
};

//! lambda_q, b_q, d_q for the von Mises kernel L(r) = exp(-r).
KernelConstants vm_kernel_constants(int q);

//! A_{q+1}(kappa) = I_{(q+1)/2}(kappa) / I_{(q-1)/2}(kappa).
double mean_resultant_ratio(int q, double kappa);

//! Maximum likelihood concentration: solves A_{q+1}(kappa) = rbar.
double solve_concentration(int q, double rbar);

//! Standard normal cdf and its logarithm.
double normal_cdf(double x);
double log_normal_cdf(double x);

} // namespace dirkde
