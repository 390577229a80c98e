#include "mgap/special.hpp"

#include <cmath>
#include <string>

#include "mgap/errors.hpp"

namespace mgap {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Continued fraction for the incomplete beta function (modified Lentz).
// Converges quickly for x < (a + 1) / (a + b + 2).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kFpMin = 1e-300;

  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  fail(Errc::convergence_failure, "incomplete beta continued fraction did not converge");
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Natural log of I_x(a, b) for the rapidly-converging branch
// x < (a + 1) / (a + b + 2); exact even when I_x underflows a double.
double log_ibeta_lower_branch(double a, double b, double x) {
  return a * std::log(x) + b * std::log1p(-x) - std::log(a) - log_beta(a, b) +
         std::log(betacf(a, b, x));
}

void check_cap_args(std::size_t dim, double half_angle) {
  require(dim >= 2, Errc::dim_too_small, "cap geometry needs dim >= 2");
  require(std::isfinite(half_angle) && half_angle >= 0.0 && half_angle <= kPi / 2.0 + 1e-12,
          Errc::angle_out_of_range, "half angle must lie in [0, pi/2]");
}

}  // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ibeta_reg(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, Errc::invalid_config, "ibeta_reg needs a, b > 0");
  require(x >= 0.0 && x <= 1.0, Errc::angle_out_of_range, "ibeta_reg needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_ibeta_lower_branch(a, b, x));
  return 1.0 - std::exp(log_ibeta_lower_branch(b, a, 1.0 - x));
}

double cap_fraction(std::size_t dim, double half_angle) {
  check_cap_args(dim, half_angle);
  double s = std::sin(half_angle);
  double x = std::min(s * s, 1.0);
  double a = (static_cast<double>(dim) - 1.0) / 2.0;
  return 0.5 * ibeta_reg(a, 0.5, x);
}

double log2_cap_fraction(std::size_t dim, double half_angle) {
  check_cap_args(dim, half_angle);
  if (half_angle == 0.0) return -HUGE_VAL;
  double s = std::sin(half_angle);
  double x = std::min(s * s, 1.0);
  double a = (static_cast<double>(dim) - 1.0) / 2.0;
  double b = 0.5;
  constexpr double kLn2 = 0.6931471805599453;
  if (x > 0.0 && x < (a + 1.0) / (a + b + 2.0))
    return (log_ibeta_lower_branch(a, b, x) - kLn2) / kLn2;
  return std::log2(0.5 * ibeta_reg(a, b, x));
}

double cap_fraction_for_cos(std::size_t dim, double cos_floor) {
  require(cos_floor > -1.0 && cos_floor <= 1.0, Errc::angle_out_of_range,
          "cosine floor must lie in (-1, 1]");
  return cap_fraction(dim, std::acos(cos_floor) / 2.0);
}

double log2_cap_fraction_for_cos(std::size_t dim, double cos_floor) {
  require(cos_floor > -1.0 && cos_floor <= 1.0, Errc::angle_out_of_range,
          "cosine floor must lie in (-1, 1]");
  return log2_cap_fraction(dim, std::acos(cos_floor) / 2.0);
}

}  // namespace mgap
