#pragma once

#include <cmath>
#include <vector>

namespace ponder {

/// Gauss-Legendre abscissas and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendreRule(int order);
    int order() const { return static_cast<int>(nodes.size()); }
};

/// Shared 16-point rule.
const GaussLegendreRule& gauss_legendre_16();

/// Composite rule: [a, b] split into ceil((b - a) / panel_width) equal panels.
template <class Func>
double integrate_panels(const Func& f, double a, double b, double panel_width,
                        const GaussLegendreRule& rule = gauss_legendre_16()) {
    if (!(b > a)) {
        return 0.0;
    }
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel_width - 1e-12)));
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double mid = a + (k + 0.5) * h;
        double panel = 0.0;
        for (int i = 0; i < rule.order(); ++i) {
            panel += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
        }
        sum += 0.5 * h * panel;
    }
    return sum;
}

} // namespace ponder
