#include "pairrank/svm.hpp"

#include "pairrank/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pairrank {

KernelCache::KernelCache(std::size_t points, RowFn compute, DiagFn diag, std::size_t budget_bytes)
    : points_(points), compute_(std::move(compute)), diag_(std::move(diag)), slot_of_row_(points, -1),
      recency_pos_(points)
{
    const auto row_bytes = std::max<std::size_t>(points * sizeof(float), 1);
    capacity_ = std::clamp<std::size_t>(budget_bytes / row_bytes, 2, std::max<std::size_t>(points, 2));
}

std::span<const float> KernelCache::row(std::size_t i)
{
    if (auto slot = slot_of_row_[i]; slot >= 0) {
        recency_.splice(recency_.begin(), recency_, recency_pos_[i]);
        return slots_[static_cast<std::size_t>(slot)];
    }
    std::size_t slot;
    if (slots_.size() < capacity_) {
        slot = slots_.size();
        slots_.emplace_back(points_);
        slot_owner_.push_back(i);
    } else {
        const auto victim = recency_.back();
        recency_.pop_back();
        slot = static_cast<std::size_t>(slot_of_row_[victim]);
        slot_of_row_[victim] = -1;
        slot_owner_[slot] = i;
    }
    compute_(i, slots_[slot]);
    slot_of_row_[i] = static_cast<long>(slot);
    recency_.push_front(i);
    recency_pos_[i] = recency_.begin();
    return slots_[slot];
}

const float* KernelCache::peek(std::size_t i) const
{
    const auto slot = slot_of_row_[i];
    return slot >= 0 ? slots_[static_cast<std::size_t>(slot)].data() : nullptr;
}

double KernelCache::diagonal(std::size_t i)
{
    return diag_ ? diag_(i) : row(i)[i];
}

namespace {

constexpr double kTau = 1e-12;

class SmoSolver {
public:
    SmoSolver(const DualProblem& p, KernelCache& k, const SmoOptions& o)
        : prob_(p), kernel_(k), opt_(o), n_(p.linear.size()), alpha_(n_, 0.0), grad_(p.linear)
    {
        diag_.resize(n_);
        for (std::size_t t = 0; t < n_; ++t) {
            diag_[t] = kernel_.diagonal(prob_.base[t]);
        }
    }

    SmoResult run()
    {
        SmoResult result;
        std::size_t iter = 0;
        bool converged = false;
        while (iter < opt_.max_iterations) {
            std::size_t i = 0;
            std::size_t j = 0;
            if (!select_working_set(i, j)) {
                converged = true;
                break;
            }
            ++iter;
            update_pair(i, j);
        }
        result.rho = compute_rho();
        result.alpha = std::move(alpha_);
        result.gradient = std::move(grad_);
        result.iterations = iter;
        result.converged = converged;
        return result;
    }

private:
    double q(std::span<const float> row_of_i, std::size_t i, std::size_t t) const
    {
        return static_cast<double>(prob_.sign[i] * prob_.sign[t]) * row_of_i[prob_.base[t]];
    }
    bool at_upper(std::size_t t) const { return alpha_[t] >= prob_.C; }
    bool at_lower(std::size_t t) const { return alpha_[t] <= 0.0; }

    bool select_working_set(std::size_t& out_i, std::size_t& out_j)
    {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        long gmax_idx = -1;
        long gmin_idx = -1;
        double obj_diff_min = std::numeric_limits<double>::infinity();

        for (std::size_t t = 0; t < n_; ++t) {
            if (prob_.sign[t] == 1) {
                if (!at_upper(t) && -grad_[t] >= gmax) {
                    gmax = -grad_[t];
                    gmax_idx = static_cast<long>(t);
                }
            } else if (!at_lower(t) && grad_[t] >= gmax) {
                gmax = grad_[t];
                gmax_idx = static_cast<long>(t);
            }
        }
        if (gmax_idx < 0) {
            return false;
        }
        const auto i = static_cast<std::size_t>(gmax_idx);
        const auto qi = kernel_.row(prob_.base[i]);

        for (std::size_t t = 0; t < n_; ++t) {
            if (prob_.sign[t] == 1) {
                if (at_lower(t)) {
                    continue;
                }
                const double grad_diff = gmax + grad_[t];
                gmax2 = std::max(gmax2, grad_[t]);
                if (grad_diff > 0.0) {
                    double quad = diag_[i] + diag_[t] - 2.0 * prob_.sign[i] * q(qi, i, t);
                    const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
                    if (obj <= obj_diff_min) {
                        gmin_idx = static_cast<long>(t);
                        obj_diff_min = obj;
                    }
                }
            } else {
                if (at_upper(t)) {
                    continue;
                }
                const double grad_diff = gmax - grad_[t];
                gmax2 = std::max(gmax2, -grad_[t]);
                if (grad_diff > 0.0) {
                    double quad = diag_[i] + diag_[t] + 2.0 * prob_.sign[i] * q(qi, i, t);
                    const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
                    if (obj <= obj_diff_min) {
                        gmin_idx = static_cast<long>(t);
                        obj_diff_min = obj;
                    }
                }
            }
        }
        if (gmax + gmax2 < opt_.tolerance || gmin_idx < 0) {
            return false;
        }
        out_i = i;
        out_j = static_cast<std::size_t>(gmin_idx);
        return true;
    }

    void update_pair(std::size_t i, std::size_t j)
    {
        // Copy row i: fetching row j may evict it when the cache is tiny.
        const auto qi_view = kernel_.row(prob_.base[i]);
        row_i_.assign(qi_view.begin(), qi_view.end());
        const auto qj = kernel_.row(prob_.base[j]);
        const std::span<const float> qi(row_i_);
        const double C = prob_.C;
        const double old_i = alpha_[i];
        const double old_j = alpha_[j];
        double& ai = alpha_[i];
        double& aj = alpha_[j];
        const double qij = q(qi, i, j);

        if (prob_.sign[i] != prob_.sign[j]) {
            double quad = diag_[i] + diag_[j] + 2.0 * qij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > C) {
                    ai = C;
                    aj = C - diff;
                }
            } else if (aj > C) {
                aj = C;
                ai = C + diff;
            }
        } else {
            double quad = diag_[i] + diag_[j] - 2.0 * qij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C) {
                if (ai > C) {
                    ai = C;
                    aj = sum - C;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > C) {
                if (aj > C) {
                    aj = C;
                    ai = sum - C;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }

        const double di = ai - old_i;
        const double dj = aj - old_j;
        const double si = prob_.sign[i];
        const double sj = prob_.sign[j];
        for (std::size_t t = 0; t < n_; ++t) {
            const double st = prob_.sign[t];
            const auto b = prob_.base[t];
            grad_[t] += st * (si * qi[b] * di + sj * qj[b] * dj);
        }
    }

    double compute_rho() const
    {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        double sum_free = 0.0;
        std::size_t free = 0;
        for (std::size_t t = 0; t < n_; ++t) {
            const double yg = prob_.sign[t] * grad_[t];
            if (at_upper(t)) {
                if (prob_.sign[t] == -1) {
                    ub = std::min(ub, yg);
                } else {
                    lb = std::max(lb, yg);
                }
            } else if (at_lower(t)) {
                if (prob_.sign[t] == 1) {
                    ub = std::min(ub, yg);
                } else {
                    lb = std::max(lb, yg);
                }
            } else {
                ++free;
                sum_free += yg;
            }
        }
        if (free > 0) {
            return sum_free / static_cast<double>(free);
        }
        return 0.5 * (ub + lb);
    }

    const DualProblem& prob_;
    KernelCache& kernel_;
    SmoOptions opt_;
    std::size_t n_;
    std::vector<double> alpha_;
    std::vector<double> grad_;
    std::vector<double> diag_;
    std::vector<float> row_i_;
};

std::string read_token(std::istream& in)
{
    std::string t;
    if (!(in >> t)) {
        throw std::runtime_error("truncated svm block in model file");
    }
    return t;
}

double read_real(std::istream& in)
{
    const auto t = read_token(in);
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) {
        throw std::runtime_error("malformed number '" + t + "' in model file");
    }
    return v;
}

} // namespace

SmoResult solve_smo(const DualProblem& problem, KernelCache& kernel, const SmoOptions& options)
{
    const auto n = problem.linear.size();
    if (problem.sign.size() != n || problem.base.size() != n) {
        throw std::invalid_argument("dual problem arrays differ in length");
    }
    if (!(problem.C > 0.0)) {
        throw std::invalid_argument("SVM regularisation C must be positive");
    }
    for (auto b : problem.base) {
        if (b >= kernel.points()) {
            throw std::invalid_argument("dual variable refers to a missing kernel point");
        }
    }
    SmoSolver solver(problem, kernel, options);
    return solver.run();
}

SvmModel SvmModel::fit(const FeatureMatrix& x, std::span<const double> targets, ModelMode mode, double C, double gamma,
                       SmoResult* detail)
{
    const auto n = x.rows();
    const auto d = x.cols();
    if (n < 2 || targets.size() != n) {
        throw std::invalid_argument("SVM needs at least two rows with one target each");
    }
    if (!(C > 0.0) || !std::isfinite(C) || !(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("SVM needs positive finite C and gamma");
    }
    SvmModel model;
    model.mode_ = mode;
    model.C_ = C;
    model.gamma_ = gamma;
    model.dims_ = d;
    model.means_.assign(d, 0.0);
    model.scales_.assign(d, 1.0);
    for (std::size_t c = 0; c < d; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            mean += x(r, c);
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dv = x(r, c) - mean;
            var += dv * dv;
        }
        var /= static_cast<double>(n);
        model.means_[c] = mean;
        model.scales_[c] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    std::vector<double> z(n * d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            z[r * d + c] = (x(r, c) - model.means_[c]) / model.scales_[c];
        }
    }
    const double factor = gamma / static_cast<double>(d);
    std::vector<double> norms(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            norms[r] += z[r * d + c] * z[r * d + c];
        }
    }
    // Pair data arrives as (v, -v) neighbours, and standardising keeps the
    // negation exact. A mirrored neighbour's kernel entry reuses the same dot
    // product with its sign flipped, and an odd row is its partner's row with
    // neighbours swapped. Both shortcuts give bit-identical entries.
    std::vector<char> mirrored(n, 0);
    bool all_mirrored = n % 2 == 0;
    std::vector<std::size_t> lead;
    for (std::size_t r = 0; r < n; ++r) {
        bool pair = r + 1 < n && r % 2 == 0;
        for (std::size_t c = 0; pair && c < d; ++c) {
            pair = z[(r + 1) * d + c] == -z[r * d + c];
        }
        lead.push_back(r);
        if (pair) {
            mirrored[r] = 1;
            ++r;
        } else {
            all_mirrored = false;
        }
    }
    const auto m = lead.size();
    std::vector<double> zt(d * m);
    for (std::size_t u = 0; u < m; ++u) {
        for (std::size_t c = 0; c < d; ++c) {
            zt[c * m + u] = z[lead[u] * d + c];
        }
    }
    KernelCache* self = nullptr;
    std::vector<double> dots(m);
    KernelCache cache(n, [&](std::size_t i, std::span<float> out) {
        if (all_mirrored && i % 2 == 1) {
            if (const float* partner = self->peek(i - 1)) {
                for (std::size_t j = 0; j < n; ++j) {
                    out[j] = partner[j ^ 1];
                }
                return;
            }
        }
        const double* zi = z.data() + i * d;
        std::fill(dots.begin(), dots.end(), 0.0);
        for (std::size_t c = 0; c < d; ++c) {
            const double w = zi[c];
            const double* col = zt.data() + c * m;
            for (std::size_t u = 0; u < m; ++u) {
                dots[u] += w * col[u];
            }
        }
        for (std::size_t u = 0; u < m; ++u) {
            const auto j = lead[u];
            out[j] = std::exp(static_cast<float>(-factor * std::max(norms[i] + norms[j] - 2.0 * dots[u], 0.0)));
            if (mirrored[j]) {
                out[j + 1] =
                    std::exp(static_cast<float>(-factor * std::max(norms[i] + norms[j + 1] + 2.0 * dots[u], 0.0)));
            }
        }
    }, [](std::size_t) { return 1.0; });
    self = &cache;

    DualProblem problem;
    problem.C = C;
    if (mode == ModelMode::Classifier) {
        bool seen[2] = {false, false};
        problem.linear.assign(n, -1.0);
        problem.sign.resize(n);
        problem.base.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            if (targets[r] != 0.0 && targets[r] != 1.0) {
                throw std::invalid_argument("classifier targets must be 0 or 1");
            }
            const int label = targets[r] == 1.0 ? 1 : 0;
            seen[label] = true;
            problem.sign[r] = label == 1 ? 1 : -1;
            problem.base[r] = r;
        }
        if (!seen[0] || !seen[1]) {
            throw std::invalid_argument("classifier training data contains a single class");
        }
    } else {
        problem.linear.resize(2 * n);
        problem.sign.resize(2 * n);
        problem.base.resize(2 * n);
        for (std::size_t r = 0; r < n; ++r) {
            problem.linear[r] = kSvrEpsilon - targets[r];
            problem.linear[r + n] = kSvrEpsilon + targets[r];
            problem.sign[r] = 1;
            problem.sign[r + n] = -1;
            problem.base[r] = r;
            problem.base[r + n] = r;
        }
    }
    auto result = solve_smo(problem, cache);

    std::vector<double> coef(n, 0.0);
    if (mode == ModelMode::Classifier) {
        for (std::size_t r = 0; r < n; ++r) {
            coef[r] = problem.sign[r] * result.alpha[r];
        }
    } else {
        for (std::size_t r = 0; r < n; ++r) {
            coef[r] = result.alpha[r] - result.alpha[r + n];
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (coef[r] != 0.0) {
            model.coef_.push_back(coef[r]);
            model.support_.insert(model.support_.end(), z.begin() + static_cast<std::ptrdiff_t>(r * d),
                                  z.begin() + static_cast<std::ptrdiff_t>((r + 1) * d));
        }
    }
    model.rho_ = result.rho;
    model.converged_ = result.converged;
    if (detail) {
        *detail = std::move(result);
    }
    return model;
}

double SvmModel::decision_value(std::span<const double> x) const
{
    thread_local std::vector<double> z;
    z.resize(dims_);
    for (std::size_t c = 0; c < dims_; ++c) {
        z[c] = (x[c] - means_[c]) / scales_[c];
    }
    const double factor = gamma_ / static_cast<double>(dims_);
    double sum = 0.0;
    for (std::size_t k = 0; k < coef_.size(); ++k) {
        const double* s = support_.data() + k * dims_;
        double dist = 0.0;
        for (std::size_t c = 0; c < dims_; ++c) {
            const double diff = s[c] - z[c];
            dist += diff * diff;
        }
        sum += coef_[k] * std::exp(-factor * dist);
    }
    return sum - rho_;
}

void SvmModel::save(std::ostream& out) const
{
    out << "svm " << to_string(mode_) << ' ' << format_real(C_) << ' ' << format_real(gamma_) << ' '
        << format_real(rho_) << ' ' << (converged_ ? 1 : 0) << ' ' << dims_ << ' ' << coef_.size() << '\n';
    for (std::size_t c = 0; c < dims_; ++c) {
        out << format_real(means_[c]) << (c + 1 < dims_ ? ' ' : '\n');
    }
    for (std::size_t c = 0; c < dims_; ++c) {
        out << format_real(scales_[c]) << (c + 1 < dims_ ? ' ' : '\n');
    }
    for (std::size_t k = 0; k < coef_.size(); ++k) {
        out << format_real(coef_[k]);
        for (std::size_t c = 0; c < dims_; ++c) {
            out << ' ' << format_real(support_[k * dims_ + c]);
        }
        out << '\n';
    }
}

SvmModel SvmModel::load(std::istream& in)
{
    if (read_token(in) != "svm") {
        throw std::runtime_error("expected 'svm' block in model file");
    }
    SvmModel m;
    m.mode_ = parse_model_mode(read_token(in));
    m.C_ = read_real(in);
    m.gamma_ = read_real(in);
    m.rho_ = read_real(in);
    m.converged_ = read_token(in) == "1";
    m.dims_ = static_cast<std::size_t>(std::stoull(read_token(in)));
    const auto count = static_cast<std::size_t>(std::stoull(read_token(in)));
    m.means_.resize(m.dims_);
    m.scales_.resize(m.dims_);
    for (auto& v : m.means_) {
        v = read_real(in);
    }
    for (auto& v : m.scales_) {
        v = read_real(in);
    }
    m.coef_.resize(count);
    m.support_.resize(count * m.dims_);
    for (std::size_t k = 0; k < count; ++k) {
        m.coef_[k] = read_real(in);
        for (std::size_t c = 0; c < m.dims_; ++c) {
            m.support_[k * m.dims_ + c] = read_real(in);
        }
    }
    return m;
}

} // namespace pairrank
