#include "vocmcts/normal.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace vocmcts {

namespace {

// Physicists' Hermite nodes by Newton iteration on the orthonormal
// recurrence, then rescaled to the standard normal weight.
QuadratureRule build_rule(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be positive");
    const int n = order;
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    std::vector<double> x(n), w(n);
    double z = 0.0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = x[n - 1 - i] * std::numbers::sqrt2;
        rule.weights[i] = w[n - 1 - i] / std::sqrt(std::numbers::pi);
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_hermite(int order) {
    static std::mutex guard;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(guard);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
    return it->second;
}

}  // namespace vocmcts
