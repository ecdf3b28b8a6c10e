#pragma once

#include "pairrank/params.hpp"
#include "pairrank/tree.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <list>
#include <span>
#include <vector>

namespace pairrank {

/// Least-recently-used cache of kernel rows over a fixed set of points.
/// Rows are stored in single precision.
class KernelCache {
public:
    using RowFn = std::function<void(std::size_t row, std::span<float> out)>;
    using DiagFn = std::function<double(std::size_t)>;

    /// Without `diag`, diagonal entries are read from full rows.
    KernelCache(std::size_t points, RowFn compute, DiagFn diag = {},
                std::size_t budget_bytes = std::size_t{1536} << 20);

    std::span<const float> row(std::size_t i);
    /// Row i if it is cached, without computing it or touching recency.
    const float* peek(std::size_t i) const;
    double diagonal(std::size_t i);
    std::size_t points() const noexcept { return points_; }

private:
    std::size_t points_;
    RowFn compute_;
    DiagFn diag_;
    std::size_t capacity_;
    std::vector<std::vector<float>> slots_;
    std::vector<std::size_t> slot_owner_;
    std::vector<long> slot_of_row_;
    std::list<std::size_t> recency_;
    std::vector<std::list<std::size_t>::iterator> recency_pos_;
};

/// Dual problem solved by sequential minimal optimisation:
///
///   minimise 1/2 a'Qa + p'a   s.t.  sum_t sign_t a_t = 0,  0 <= a_t <= C
///
/// with Q_st = sign_s sign_t K(base_s, base_t). Classification uses one
/// variable per point; epsilon regression uses two per point.
struct DualProblem {
    std::vector<double> linear;
    std::vector<int> sign;
    std::vector<std::size_t> base;
    double C = 1.0;
};

struct SmoOptions {
    double tolerance = 1e-3;
    std::size_t max_iterations = 100000;
};

struct SmoResult {
    std::vector<double> alpha;
    std::vector<double> gradient;
    double rho = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Working pair: the maximal KKT violator, partnered by second-order gain.
/// Stops once the violation gap m(a) - M(a) falls below the tolerance.
SmoResult solve_smo(const DualProblem& problem, KernelCache& kernel, const SmoOptions& options = {});

/// Epsilon of the insensitive loss used in regressor mode.
inline constexpr double kSvrEpsilon = 0.1;

/// RBF support vector machine on standardised inputs:
///   K(a, b) = exp(-gamma * |a' - b'|^2 / d)
/// where a' is a with each column centred and divided by its training
/// standard deviation and d is the feature count.
class SvmModel {
public:
    static SvmModel fit(const FeatureMatrix& x, std::span<const double> targets, ModelMode mode, double C, double gamma,
                        SmoResult* detail = nullptr);

    /// sum_k coef_k K(sv_k, x) - rho
    double decision_value(std::span<const double> x) const;

    ModelMode mode() const noexcept { return mode_; }
    double gamma() const noexcept { return gamma_; }
    double C() const noexcept { return C_; }
    double rho() const noexcept { return rho_; }
    const std::vector<double>& means() const noexcept { return means_; }
    const std::vector<double>& scales() const noexcept { return scales_; }
    std::size_t support_count() const noexcept { return coef_.size(); }
    bool converged() const noexcept { return converged_; }

    void save(std::ostream& out) const;
    static SvmModel load(std::istream& in);

    bool operator==(const SvmModel&) const = default;

private:
    ModelMode mode_ = ModelMode::Classifier;
    double C_ = 1.0;
    double gamma_ = 1.0;
    double rho_ = 0.0;
    bool converged_ = false;
    std::size_t dims_ = 0;
    std::vector<double> means_;
    std::vector<double> scales_;
    /// Support vectors, standardised, row-major.
    std::vector<double> support_;
    std::vector<double> coef_;
};

} // namespace pairrank
