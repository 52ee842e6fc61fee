#include <entropic/normal.hpp>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/constants/constants.hpp>

#include <cmath>

namespace entropic {

namespace {
const boost::math::normal standard_normal;
}

double normal_cdf(double x) {
    return boost::math::cdf(standard_normal, x);
}

double normal_pdf(double x) {
    return boost::math::pdf(standard_normal, x);
}

double inverse_normal_cdf(double p) {
    return boost::math::quantile(standard_normal, p);
}

double bivariate_normal_pdf(double x, double y, double rho) {
    const double one_minus = 1.0 - rho * rho;
    const double q = (x * x - 2.0 * rho * x * y + y * y) / one_minus;
    return std::exp(-0.5 * q) / (boost::math::constants::two_pi<double>() * std::sqrt(one_minus));
}

} // namespace entropic
