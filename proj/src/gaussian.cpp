#include "improvkit/gaussian.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <sstream>

#include "improvkit/error.hpp"

namespace improvkit {

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 20, 1e-12, &err);
  if (!std::isfinite(value) || err > abs_tol) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b << "]: estimate " << value
       << ", error " << err;
    throw NumericalError(os.str());
  }
  return value;
}

}  // namespace improvkit
