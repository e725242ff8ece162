#include "ponder/quadrature.hpp"

#include <numbers>
#include <stdexcept>

namespace ponder {

GaussLegendreRule::GaussLegendreRule(int order) : nodes(order), weights(order) {
    if (order < 1) {
        throw std::invalid_argument("Gauss-Legendre order must be >= 1");
    }
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi's estimate of the i-th root, then Newton on P_n.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = z;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (z * p1 - p0) / (z * z - 1.0);
            const double step = p1 / dp;
            z -= step;
            if (std::abs(step) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[order - 1 - i] = z;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) {
        nodes[half - 1] = 0.0;
    }
}

const GaussLegendreRule& gauss_legendre_16() {
    static const GaussLegendreRule rule(16);
    return rule;
}

} // namespace ponder
