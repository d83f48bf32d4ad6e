#include "iterfunc/price.hpp"

#include <stdexcept>

namespace iterfunc {

double poly_price(const std::vector<double>& theta, double q) {
  // Horner on q * (theta_0 + theta_1 q + ...)
  double acc = 0.0;
  for (auto it = theta.rbegin(); it != theta.rend(); ++it) acc = acc * q + *it;
  return q * acc;
}

double poly_slope(const std::vector<double>& theta, double q) {
  double acc = 0.0;
  for (std::size_t m = theta.size(); m-- > 0;)
    acc = acc * q + static_cast<double>(m + 1) * theta[m];
  return acc;
}

double poly_curvature(const std::vector<double>& theta, double q) {
  double acc = 0.0;
  for (std::size_t m = theta.size(); m-- > 1;)
    acc = acc * q + static_cast<double>((m + 1) * m) * theta[m];
  return acc;
}

PriceSchedule PriceSchedule::closed_form(std::function<double(double)> p,
                                         std::function<double(double)> dp,
                                         std::function<double(double)> d2p) {
  PriceSchedule s;
  s.price = std::move(p);
  s.slope = std::move(dp);
  s.curvature = std::move(d2p);
  return s;
}

PriceSchedule PriceSchedule::polynomial(std::vector<double> theta) {
  if (theta.empty())
    throw std::invalid_argument("PriceSchedule: empty coefficient list");
  PriceSchedule s;
  s.theta = std::move(theta);
  const auto th = s.theta;
  s.price = [th](double q) { return poly_price(th, q); };
  s.slope = [th](double q) { return poly_slope(th, q); };
  s.curvature = [th](double q) { return poly_curvature(th, q); };
  return s;
}

}  // namespace iterfunc
