#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "sqlab/funcspace.hpp"

namespace sqlab {

/// rho-dyadic grid D_k(rho), translated by -shift, restricted to the
/// generation-0 interval I0 = [j rho - shift, (j + 1) rho - shift).
/// Intervals are half-open: a point on a boundary belongs to the interval
/// on its right.
class DyadicGrid {
public:
    static constexpr int kMaxDepth = 22;

    explicit DyadicGrid(double rho = 1.0, double shift = 0.0, long long base_index = 0);

    /// The grid whose I0 contains x.
    static DyadicGrid containing(double rho, double shift, double x);

    double rho() const { return rho_; }
    double shift() const { return shift_; }
    long long base_index() const { return base_index_; }
    double left() const { return static_cast<double>(base_index_) * rho_ - shift_; }
    double right() const { return left() + rho_; }
    /// Length of a generation-k interval, 2^{-k} rho.
    double length(int k) const;

    bool contains(double x) const;
    /// Index i of the generation-k interval [a, b) containing x.
    std::size_t index_of(int k, double x) const;
    Interval interval(int k, std::size_t i) const;

private:
    double rho_;
    double shift_;
    long long base_index_;
};

/// Values of S_0, ..., S_n on every interval of generations 0..n, stored
/// densely (generation k at offset 2^k - 1).
class MartingaleTrace {
public:
    MartingaleTrace(DyadicGrid grid, int depth, std::vector<double> values);

    const DyadicGrid& grid() const { return grid_; }
    int depth() const { return depth_; }
    std::span<const double> generation(int k) const;
    double value(int k, std::size_t i) const { return generation(k)[i]; }
    double value_at(int k, double x) const { return value(k, grid_.index_of(k, x)); }

    /// max over parents of |parent - mean(children)|.
    double martingale_defect() const;
    bool starts_at_zero() const { return values_[0] == 0.0; }
    /// S - S_0, again a martingale.
    MartingaleTrace centered() const;

    /// "generation,index,value" rows with a schema header.
    void write_csv(std::ostream& out) const;

private:
    DyadicGrid grid_;
    int depth_;
    std::vector<double> values_;
};

/// A function constant on each generation-k interval of a grid.
class StepFunction {
public:
    StepFunction(DyadicGrid grid, int generation, std::vector<double> values);

    const DyadicGrid& grid() const { return grid_; }
    int generation() const { return generation_; }
    std::span<const double> values() const { return values_; }
    double value_at(double x) const { return values_[grid_.index_of(generation_, x)]; }
    /// Exact finite sum of value * length (compensated).
    double integral() const;
    /// Measure of the union of intervals whose value satisfies pred.
    double measure_where(const std::function<bool(double)>& pred) const;

private:
    DyadicGrid grid_;
    int generation_;
    std::vector<double> values_;
};

/// S_k(x) = (f(b) - f(a)) / (b - a) on [a, b) in D_k.
MartingaleTrace build_from_function(const FunctionSource& f, const DyadicGrid& grid, int depth);

/// S_0(x), ..., S_n(x) along the single path through x, same formula.
std::vector<double> path_values(const FunctionSource& f, const DyadicGrid& grid, double x, int depth);

/// <S>_n^2 = sum_{k=1}^{n} (S_k - S_{k-1})^2
StepFunction quadratic_variation(const MartingaleTrace& s, int n);
/// M_n = sup_{k <= n} |S_k|
StepFunction maximal(const MartingaleTrace& s, int n);
/// N_n = (sup_{k <= n} (S_k - <S>_k^2 / 2))^+
StepFunction drift_maximal(const MartingaleTrace& s, int n);

enum class IncrementKind { PlusMinus, Uniform };

/// Offsets +-c, or +-d with d uniform on [-c, c].
struct IncrementLaw {
    IncrementKind kind = IncrementKind::PlusMinus;
    double c = 1.0;

    /// "pm:c" or "uniform:c".
    static IncrementLaw parse(std::string_view text);
    std::string describe() const;
};

/// Per-trial seed derived from a master seed (splitmix64 of master + index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// S_0 = 0; each parent draws one offset d and its children get parent +- d.
MartingaleTrace random_martingale(std::uint64_t seed, int depth, IncrementLaw law,
                                  const DyadicGrid& grid = DyadicGrid());

/// What a stopping rule sees at an interval.
struct NodeState {
    int generation;
    std::size_t index;
    double value;
    /// <S>_k^2 on this interval
    double qv;
};

using StoppingRule = std::function<bool(const NodeState&)>;

/// Freezes the martingale on an interval (and all its descendants) at the
/// first generation where the rule fires.
MartingaleTrace stop(const MartingaleTrace& s, const StoppingRule& rule);

/// int_{I0} exp(S_n - <S>_n^2 / 2) dx
double lemma21_integral(const MartingaleTrace& s, int n);
/// |{x in I0 : sup_{k<=n} (S_k - <S>_k^2 / 2) > lambda}|
double lemma22_tail_measure(const MartingaleTrace& s, int n, double lambda);
/// int_{I0} exp(alpha N_n) dx
double lemma23_exp_moment(const MartingaleTrace& s, int n, double alpha);

struct StoppedVariation {
    /// |E| where E = {x : sup_{k <= depth} |S_k(x)| <= bound}
    double set_measure = 0.0;
    /// int_E <S>_n^2 for n = 0..depth; nondecreasing in n.
    std::vector<double> by_depth;
    double value() const { return by_depth.back(); }
};

/// int_E <S>^2 with E taken at the full depth of the trace.
StoppedVariation lemma24_stopped_qv(const MartingaleTrace& s, double bound = 1.0);

/// Rounding slack, relative to |I0|, allowed when checking the lemma
/// inequalities on floating-point sums.
inline constexpr double kContractSlack = 1e-12;

}  // namespace sqlab
