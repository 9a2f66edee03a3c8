#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "sqlab/funcspace.hpp"

namespace testing {

class LambdaKernel : public sqlab::detail::Kernel {
public:
    explicit LambdaKernel(std::function<double(double)> fn) : fn_(std::move(fn)) {}
    double value(double x) const override { return fn_(x); }

private:
    std::function<double(double)> fn_;
};

/// An ad-hoc function on the real line, for combinations the catalog lacks.
inline sqlab::FunctionSource lambda_source(std::function<double(double)> fn, std::string id = "lambda") {
    return sqlab::FunctionSource(std::make_shared<LambdaKernel>(std::move(fn)), sqlab::OpenDomain::real_line(),
                                 sqlab::SourceInfo{std::move(id), {}, {}, {}, {}});
}

inline double rel_diff(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace testing
