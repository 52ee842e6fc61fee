#pragma once

namespace entropic {

double normal_cdf(double x);
double normal_pdf(double x);
double inverse_normal_cdf(double p);

/// Density of the standard bivariate normal with correlation rho.
double bivariate_normal_pdf(double x, double y, double rho);

} // namespace entropic
