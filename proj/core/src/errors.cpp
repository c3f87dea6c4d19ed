#include "hjhom/errors.hpp"

#include <sstream>

namespace hjhom {

namespace {
std::string fmt_empty(double x, double level, double min_level) {
  std::ostringstream os;
  os.precision(17);
  os << "empty sublevel set at x=" << x << ": level " << level << " below min_p H = " << min_level;
  return os.str();
}

std::string fmt_obstructed(double e, double lambda, double lambda_hat) {
  std::ostringstream os;
  os.precision(17);
  os << "endpoint " << e << " obstructed: lambda=" << lambda << " below min_p H = " << lambda_hat;
  return os.str();
}
}  // namespace

EmptySublevelError::EmptySublevelError(double x, double level, double min_level)
    : Error(fmt_empty(x, level, min_level)), x(x), level(level), min_level(min_level) {}

EndpointObstructedError::EndpointObstructedError(double endpoint, double lambda, double lambda_hat)
    : Error(fmt_obstructed(endpoint, lambda, lambda_hat)),
      endpoint(endpoint),
      lambda(lambda),
      lambda_hat(lambda_hat) {}

}  // namespace hjhom
