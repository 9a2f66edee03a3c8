#include "sqlab/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "sqlab/errors.hpp"
#include "sqlab/format.hpp"

namespace sqlab {

namespace {

std::size_t offset_of(int k) { return (std::size_t{1} << k) - 1; }

void check_depth(int depth) {
    if (depth < 0 || depth > DyadicGrid::kMaxDepth)
        throw BadParameter("depth must lie in [0, " + std::to_string(DyadicGrid::kMaxDepth) + "]");
}

void check_generation(const MartingaleTrace& s, int n) {
    if (n < 0 || n > s.depth()) throw BadParameter("generation " + std::to_string(n) + " exceeds trace depth");
}

void require_zero_start(const MartingaleTrace& s) {
    if (!s.starts_at_zero()) throw PreconditionFailed("validator needs S_0 = 0 on I0");
}

// Neumaier compensated sum.
class Accumulator {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Running values along each root-to-interval path, generation by generation.
template <class Step>
std::vector<double> propagate(const MartingaleTrace& s, int n, double init, Step step) {
    std::vector<double> cur{step(init, 0, 0, s.value(0, 0), 0.0)};
    for (int k = 1; k <= n; ++k) {
        const auto parent = s.generation(k - 1);
        const auto gen = s.generation(k);
        std::vector<double> next(gen.size());
        for (std::size_t i = 0; i < gen.size(); ++i) next[i] = step(cur[i / 2], k, i, gen[i], parent[i / 2]);
        cur = std::move(next);
    }
    return cur;
}

// qv_k on every interval of generation n, and along the way anything that
// needs qv at intermediate generations.
std::vector<std::vector<double>> qv_by_generation(const MartingaleTrace& s, int n) {
    std::vector<std::vector<double>> qv(n + 1);
    qv[0] = {0.0};
    for (int k = 1; k <= n; ++k) {
        const auto parent = s.generation(k - 1);
        const auto gen = s.generation(k);
        qv[k].resize(gen.size());
        for (std::size_t i = 0; i < gen.size(); ++i) {
            const double d = gen[i] - parent[i / 2];
            qv[k][i] = qv[k - 1][i / 2] + d * d;
        }
    }
    return qv;
}

std::vector<double> drift_sup(const MartingaleTrace& s, int n) {
    const auto qv = qv_by_generation(s, n);
    std::vector<double> cur{s.value(0, 0)};
    for (int k = 1; k <= n; ++k) {
        const auto gen = s.generation(k);
        std::vector<double> next(gen.size());
        for (std::size_t i = 0; i < gen.size(); ++i) next[i] = std::max(cur[i / 2], gen[i] - 0.5 * qv[k][i]);
        cur = std::move(next);
    }
    return cur;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

// ------------------------------------------------------------ DyadicGrid

DyadicGrid::DyadicGrid(double rho, double shift, long long base_index)
    : rho_(rho), shift_(shift), base_index_(base_index) {
    if (!(rho >= 1.0 && rho < 4.0)) throw BadParameter("rho must lie in [1, 4)");
    if (!(shift >= 0.0) || !std::isfinite(shift)) throw BadParameter("shift must be finite and >= 0");
}

DyadicGrid DyadicGrid::containing(double rho, double shift, double x) {
    if (!std::isfinite(x)) throw BadParameter("x must be finite");
    DyadicGrid g(rho, shift, 0);
    g.base_index_ = static_cast<long long>(std::floor((x + shift) / rho));
    // Correct a rounding slip of one interval either way.
    if (x < g.left()) --g.base_index_;
    if (x >= g.right()) ++g.base_index_;
    return g;
}

double DyadicGrid::length(int k) const { return std::ldexp(rho_, -k); }

bool DyadicGrid::contains(double x) const { return left() <= x && x < right(); }

std::size_t DyadicGrid::index_of(int k, double x) const {
    if (k < 0 || k > kMaxDepth) throw BadParameter("generation out of range");
    if (!contains(x)) throw OutOfDomain("x = " + fmt_num(x) + " outside the base interval");
    const double a = left();
    const std::size_t count = std::size_t{1} << k;
    const double len = length(k);
    auto i = static_cast<std::size_t>(std::floor((x - a) / len));
    if (i >= count) i = count - 1;
    // Half-open lookup against the same endpoints interval() reports.
    while (i > 0 && x < a + static_cast<double>(i) * len) --i;
    while (i + 1 < count && x >= a + static_cast<double>(i + 1) * len) ++i;
    return i;
}

Interval DyadicGrid::interval(int k, std::size_t i) const {
    const double len = length(k);
    const double a = left();
    return {a + static_cast<double>(i) * len, a + static_cast<double>(i + 1) * len};
}

// ------------------------------------------------------- MartingaleTrace

MartingaleTrace::MartingaleTrace(DyadicGrid grid, int depth, std::vector<double> values)
    : grid_(grid), depth_(depth), values_(std::move(values)) {
    check_depth(depth);
    if (values_.size() != offset_of(depth + 1))
        throw BadParameter("trace of depth " + std::to_string(depth) + " needs " +
                           std::to_string(offset_of(depth + 1)) + " values");
}

std::span<const double> MartingaleTrace::generation(int k) const {
    if (k < 0 || k > depth_) throw BadParameter("generation " + std::to_string(k) + " not stored");
    return std::span<const double>(values_).subspan(offset_of(k), std::size_t{1} << k);
}

double MartingaleTrace::martingale_defect() const {
    double worst = 0.0;
    for (int k = 0; k < depth_; ++k) {
        const auto parent = generation(k);
        const auto child = generation(k + 1);
        for (std::size_t i = 0; i < parent.size(); ++i)
            worst = std::max(worst, std::abs(parent[i] - 0.5 * (child[2 * i] + child[2 * i + 1])));
    }
    return worst;
}

MartingaleTrace MartingaleTrace::centered() const {
    std::vector<double> v = values_;
    const double s0 = values_[0];
    for (double& x : v) x -= s0;
    return MartingaleTrace(grid_, depth_, std::move(v));
}

void MartingaleTrace::write_csv(std::ostream& out) const {
    out << "# schema_version: 1\n";
    out << "# rho=" << fmt_num(grid_.rho()) << " shift=" << fmt_num(grid_.shift())
        << " base_index=" << grid_.base_index() << " depth=" << depth_ << "\n";
    out << "generation,index,value\n";
    for (int k = 0; k <= depth_; ++k) {
        const auto gen = generation(k);
        for (std::size_t i = 0; i < gen.size(); ++i) out << k << ',' << i << ',' << fmt_num(gen[i]) << '\n';
    }
}

// ---------------------------------------------------------- StepFunction

StepFunction::StepFunction(DyadicGrid grid, int generation, std::vector<double> values)
    : grid_(grid), generation_(generation), values_(std::move(values)) {
    check_depth(generation);
    if (values_.size() != (std::size_t{1} << generation)) throw BadParameter("step function size mismatch");
}

double StepFunction::integral() const {
    Accumulator acc;
    for (double v : values_) acc.add(v);
    return acc.value() * grid_.length(generation_);
}

double StepFunction::measure_where(const std::function<bool(double)>& pred) const {
    std::size_t count = 0;
    for (double v : values_)
        if (pred(v)) ++count;
    return static_cast<double>(count) * grid_.length(generation_);
}

// ------------------------------------------------------------ builders

MartingaleTrace build_from_function(const FunctionSource& f, const DyadicGrid& grid, int depth) {
    check_depth(depth);
    if (!f.domain().contains_closed(grid.left(), grid.right()))
        throw OutOfDomain("base interval [" + fmt_num(grid.left()) + ", " + fmt_num(grid.right()) +
                          "] not inside the domain of f");
    if (f.is_grid() && grid.length(depth) < 2.0 * f.spacing())
        throw ScaleTooFine("finest generation is below the grid resolution");
    const std::size_t leaves = std::size_t{1} << depth;
    std::vector<double> ends(leaves + 1);
    for (std::size_t i = 0; i <= leaves; ++i) {
        const double a = i < leaves ? grid.interval(depth, i).lo : grid.interval(depth, leaves - 1).hi;
        ends[i] = f.raw(a);
    }
    std::vector<double> values(offset_of(depth + 1));
    for (int k = 0; k <= depth; ++k) {
        const std::size_t count = std::size_t{1} << k;
        const std::size_t stride = leaves / count;
        const double len = grid.length(k);
        for (std::size_t i = 0; i < count; ++i)
            values[offset_of(k) + i] = (ends[(i + 1) * stride] - ends[i * stride]) / len;
    }
    return MartingaleTrace(grid, depth, std::move(values));
}

std::vector<double> path_values(const FunctionSource& f, const DyadicGrid& grid, double x, int depth) {
    check_depth(depth);
    if (!f.domain().contains_closed(grid.left(), grid.right()))
        throw OutOfDomain("base interval not inside the domain of f");
    std::vector<double> out;
    out.reserve(depth + 1);
    for (int k = 0; k <= depth; ++k) {
        const Interval iv = grid.interval(k, grid.index_of(k, x));
        out.push_back((f.raw(iv.hi) - f.raw(iv.lo)) / grid.length(k));
    }
    return out;
}

StepFunction quadratic_variation(const MartingaleTrace& s, int n) {
    check_generation(s, n);
    auto qv = qv_by_generation(s, n);
    return StepFunction(s.grid(), n, std::move(qv[n]));
}

StepFunction maximal(const MartingaleTrace& s, int n) {
    check_generation(s, n);
    auto v = propagate(s, n, 0.0, [](double prev, int, std::size_t, double value, double) {
        return std::max(prev, std::abs(value));
    });
    return StepFunction(s.grid(), n, std::move(v));
}

StepFunction drift_maximal(const MartingaleTrace& s, int n) {
    check_generation(s, n);
    auto v = drift_sup(s, n);
    for (double& x : v) x = std::max(x, 0.0);
    return StepFunction(s.grid(), n, std::move(v));
}

// ---------------------------------------------------------- random traces

IncrementLaw IncrementLaw::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw BadParameter("increment law must look like pm:c or uniform:c");
    const auto name = text.substr(0, colon);
    const auto nums = parse_number_list(text.substr(colon + 1));
    if (nums.size() != 1) throw BadParameter("increment law takes one parameter c");
    IncrementLaw law;
    if (name == "pm")
        law.kind = IncrementKind::PlusMinus;
    else if (name == "uniform")
        law.kind = IncrementKind::Uniform;
    else
        throw BadParameter("unknown increment law '" + std::string(name) + "'");
    law.c = nums[0];
    if (!(law.c > 0.0) || !std::isfinite(law.c)) throw BadParameter("increment scale c must be > 0");
    return law;
}

std::string IncrementLaw::describe() const {
    return std::string(kind == IncrementKind::PlusMinus ? "pm:" : "uniform:") + fmt_num(c);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) { return splitmix64(master + index); }

MartingaleTrace random_martingale(std::uint64_t seed, int depth, IncrementLaw law, const DyadicGrid& grid) {
    check_depth(depth);
    if (!(law.c > 0.0) || !std::isfinite(law.c)) throw BadParameter("increment scale c must be > 0");
    std::mt19937_64 rng(seed);
    std::vector<double> values(offset_of(depth + 1), 0.0);
    for (int k = 0; k < depth; ++k) {
        const std::size_t count = std::size_t{1} << k;
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint64_t bits = rng();
            double d;
            if (law.kind == IncrementKind::PlusMinus) {
                d = (bits & 1U) ? law.c : -law.c;
            } else {
                const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
                d = (2.0 * u - 1.0) * law.c;
            }
            const double p = values[offset_of(k) + i];
            values[offset_of(k + 1) + 2 * i] = p + d;
            values[offset_of(k + 1) + 2 * i + 1] = p - d;
        }
    }
    return MartingaleTrace(grid, depth, std::move(values));
}

MartingaleTrace stop(const MartingaleTrace& s, const StoppingRule& rule) {
    const int depth = s.depth();
    std::vector<double> values(offset_of(depth + 1));
    std::vector<char> stopped{0};
    std::vector<double> qv{0.0};
    values[0] = s.value(0, 0);
    if (rule(NodeState{0, 0, values[0], 0.0})) stopped[0] = 1;
    for (int k = 1; k <= depth; ++k) {
        const std::size_t count = std::size_t{1} << k;
        std::vector<char> st(count);
        std::vector<double> q(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double parent = values[offset_of(k - 1) + i / 2];
            if (stopped[i / 2]) {
                values[offset_of(k) + i] = parent;
                q[i] = qv[i / 2];
                st[i] = 1;
                continue;
            }
            const double v = s.value(k, i);
            const double d = v - parent;
            values[offset_of(k) + i] = v;
            q[i] = qv[i / 2] + d * d;
            st[i] = rule(NodeState{k, i, v, q[i]}) ? 1 : 0;
        }
        stopped = std::move(st);
        qv = std::move(q);
    }
    return MartingaleTrace(s.grid(), depth, std::move(values));
}

// ------------------------------------------------------------ validators

double lemma21_integral(const MartingaleTrace& s, int n) {
    require_zero_start(s);
    check_generation(s, n);
    const auto qv = quadratic_variation(s, n);
    const auto gen = s.generation(n);
    Accumulator acc;
    for (std::size_t i = 0; i < gen.size(); ++i) acc.add(std::exp(gen[i] - 0.5 * qv.values()[i]));
    return acc.value() * s.grid().length(n);
}

double lemma22_tail_measure(const MartingaleTrace& s, int n, double lambda) {
    require_zero_start(s);
    check_generation(s, n);
    if (!(lambda > 0.0)) throw BadParameter("lambda must be > 0");
    const StepFunction sup(s.grid(), n, drift_sup(s, n));
    return sup.measure_where([lambda](double v) { return v > lambda; });
}

double lemma23_exp_moment(const MartingaleTrace& s, int n, double alpha) {
    require_zero_start(s);
    check_generation(s, n);
    if (!(alpha > 0.0 && alpha < 1.0)) throw BadParameter("alpha must lie in (0, 1)");
    const auto N = drift_maximal(s, n);
    Accumulator acc;
    for (double v : N.values()) acc.add(std::exp(alpha * v));
    return acc.value() * s.grid().length(n);
}

StoppedVariation lemma24_stopped_qv(const MartingaleTrace& s, double bound) {
    require_zero_start(s);
    if (!(bound > 0.0)) throw PreconditionFailed("bound must be > 0");
    const int D = s.depth();
    const auto M = maximal(s, D);
    const auto qv = qv_by_generation(s, D);
    StoppedVariation out;
    out.set_measure = M.measure_where([bound](double v) { return v <= bound; });
    out.by_depth.reserve(D + 1);
    const double len = s.grid().length(D);
    for (int n = 0; n <= D; ++n) {
        Accumulator acc;
        for (std::size_t i = 0; i < M.values().size(); ++i)
            if (M.values()[i] <= bound) acc.add(qv[n][i >> (D - n)]);
        out.by_depth.push_back(acc.value() * len);
    }
    return out;
}

}  // namespace sqlab
