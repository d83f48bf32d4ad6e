#pragma once

#include <functional>
#include <vector>

namespace iterfunc {

//! Total-price schedule with its first two derivatives.  Either closed
//! form, or the polynomial family
//!   Psi_theta(q) = theta_0 q + theta_1 q^2 + ... + theta_{d-1} q^d
//! (zero constant, so a zero purchase costs nothing).
struct PriceSchedule {
  std::function<double(double)> price;      // P(q)
  std::function<double(double)> slope;      // P'(q)
  std::function<double(double)> curvature;  // P''(q)
  std::vector<double> theta;                // nonempty for the polynomial form
  double tau = 1.0;                         // money-utility scaling

  bool is_polynomial() const { return !theta.empty(); }

  static PriceSchedule closed_form(std::function<double(double)> p,
                                   std::function<double(double)> dp,
                                   std::function<double(double)> d2p);
  static PriceSchedule polynomial(std::vector<double> theta);
};

double poly_price(const std::vector<double>& theta, double q);
double poly_slope(const std::vector<double>& theta, double q);
double poly_curvature(const std::vector<double>& theta, double q);

}  // namespace iterfunc
