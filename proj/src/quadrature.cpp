#include "sqlab/quadrature.hpp"

#include <numbers>

#include "sqlab/errors.hpp"

namespace sqlab {

void QuadratureSpec::validate() const {
    if (nodes < 2) throw BadParameter("quadrature needs at least 2 nodes per axis");
    if (!(tolerance > 0.0 && tolerance <= 1e-2)) throw BadParameter("quadrature tolerance must lie in (0, 1e-2]");
    if (max_levels < 1 || max_levels > 12) throw BadParameter("quadrature max_levels must lie in [1, 12]");
    if (!(absolute_floor >= 0.0)) throw BadParameter("quadrature absolute_floor must be >= 0");
    if (max_bands < 1 || max_bands > 60) throw BadParameter("quadrature max_bands must lie in [1, 60]");
}

GaussRule gauss_legendre(int n) {
    if (n < 1) throw BadParameter("Gauss-Legendre rule needs n >= 1");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton on P_n from the Chebyshev-like initial guess; roots are
    // symmetric so only half are computed.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace sqlab
