#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace vocmcts {

struct NormalDist {
    double mean = 0.0;
    double variance = 0.0;

    double sd() const { return std::sqrt(variance); }
};

inline double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// f(z) = z Phi(z) + phi(z) = E[(Z + z)^+] for standard normal Z.
inline double expected_positive_part(double z) { return z * std_normal_cdf(z) + std_normal_pdf(z); }

/// Probabilists' Gauss-Hermite rule: sum_k w_k g(x_k) ~ E[g(Z)], Z ~ N(0,1).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached rule of the given order (computed once per order).
const QuadratureRule& gauss_hermite(int order = 32);

}  // namespace vocmcts
