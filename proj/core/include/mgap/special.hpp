#pragma once

#include <cstddef>

namespace mgap {

double norm_pdf(double x);
double norm_cdf(double x);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double ibeta_reg(double a, double b, double x);

// Fraction of the unit sphere in R^dim within angular radius half_angle
// of a fixed pole: (1/2) I_{sin^2(half_angle)}((dim-1)/2, 1/2).
// half_angle must lie in [0, pi/2]; dim >= 2.
double cap_fraction(std::size_t dim, double half_angle);

// log2 of cap_fraction, computed in log space so fractions far below
// double underflow (e.g. 2^-600) still come out finite.
double log2_cap_fraction(std::size_t dim, double half_angle);

// Cap that can hold a point set whose pairwise cosine floor is cos_floor:
// half_angle = arccos(cos_floor) / 2. cos_floor in (-1, 1].
double cap_fraction_for_cos(std::size_t dim, double cos_floor);
double log2_cap_fraction_for_cos(std::size_t dim, double cos_floor);

}  // namespace mgap
