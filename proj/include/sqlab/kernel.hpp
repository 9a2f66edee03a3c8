#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sqlab/funcspace.hpp"
#include "sqlab/quadrature.hpp"

namespace sqlab {

/// Polynomial sum_i coeffs[i] w^i on [lo, hi].
struct KernelPiece {
    double lo;
    double hi;
    std::vector<double> coeffs;
};

/// Piecewise-polynomial weight supported in [-2, 2]; zero off its pieces.
class PiecewiseKernel {
public:
    PiecewiseKernel(std::string name, std::vector<KernelPiece> pieces, bool verified = true);

    double operator()(double w) const;
    const std::string& name() const { return name_; }
    const std::vector<KernelPiece>& pieces() const { return pieces_; }
    /// False for catalog entries whose averaging identity has not been
    /// checked against the mean divided difference.
    bool verified() const { return verified_; }

    std::string to_json() const;
    static PiecewiseKernel from_json(std::string_view text);

private:
    std::string name_;
    std::vector<KernelPiece> pieces_;
    bool verified_;
};

namespace kernels {

/// K = 1 on [-2, 2]
PiecewiseKernel unit();
/// K = 1 on [-1, 1], 0 elsewhere
PiecewiseKernel box();
/// K = 1 on [-1, 1] and -1/3 + 4/3 w^2 on 1 < |w| <= 2, as printed with the
/// averaging identity. Flagged unverified: for f = x^2 its average is
/// (34/9) x, not 2 x ln 2.
PiecewiseKernel printed();

}  // namespace kernels

PiecewiseKernel kernel_by_name(std::string_view name);

/// (1/4h) int_{x-2h}^{x+2h} Delta(f)(s, 2h) K((s - x)/h) ds
double kernel_mean_dd(const FunctionSource& f, double x, double h, const PiecewiseKernel& K,
                      const QuadratureSpec& q = {});

}  // namespace sqlab
