#include "pairrank/tree.hpp"

#include "pairrank/text.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pairrank {

FeatureMatrix FeatureMatrix::from_vectors(std::span<const FeatureVector> vectors)
{
    if (vectors.empty()) {
        return {};
    }
    FeatureMatrix m(vectors.size(), vectors.front().size());
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        if (vectors[r].size() != m.cols()) {
            throw std::invalid_argument("feature vectors differ in length");
        }
        auto dst = m.row(r);
        std::copy(vectors[r].begin(), vectors[r].end(), dst.begin());
    }
    return m;
}

BinnedMatrix::BinnedMatrix(const FeatureMatrix& x) : rows_(x.rows()), codes_(x.rows() * x.cols()), edges_(x.cols())
{
    std::vector<double> column(rows_);
    for (std::size_t c = 0; c < x.cols(); ++c) {
        for (std::size_t r = 0; r < rows_; ++r) {
            column[r] = x(r, c);
        }
        auto& edges = edges_[c];
        edges = column;
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        auto* codes = codes_.data() + c * rows_;
        for (std::size_t r = 0; r < rows_; ++r) {
            codes[r] = static_cast<std::uint32_t>(std::lower_bound(edges.begin(), edges.end(), column[r]) - edges.begin());
        }
    }
}

std::string_view to_string(Criterion c)
{
    switch (c) {
    case Criterion::Gini:
        return "gini";
    case Criterion::InfoGain:
        return "info_gain";
    case Criterion::Mse:
        return "mse";
    case Criterion::Mae:
        return "mae";
    }
    return "?";
}

Criterion parse_criterion(std::string_view name)
{
    for (auto c : {Criterion::Gini, Criterion::InfoGain, Criterion::Mse, Criterion::Mae}) {
        if (name == to_string(c)) {
            return c;
        }
    }
    throw std::invalid_argument("unknown criterion '" + std::string(name) + "'");
}

std::string_view to_string(MaxFeatures m)
{
    switch (m) {
    case MaxFeatures::Sqrt:
        return "sqrt";
    case MaxFeatures::Log2:
        return "log2";
    case MaxFeatures::All:
        return "all";
    }
    return "?";
}

MaxFeatures parse_max_features(std::string_view name)
{
    for (auto m : {MaxFeatures::Sqrt, MaxFeatures::Log2, MaxFeatures::All}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown max_features '" + std::string(name) + "'");
}

std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features)
{
    const auto d = static_cast<double>(n_features);
    std::size_t k = n_features;
    switch (m) {
    case MaxFeatures::Sqrt:
        k = static_cast<std::size_t>(std::sqrt(d));
        break;
    case MaxFeatures::Log2:
        k = static_cast<std::size_t>(std::log2(d));
        break;
    case MaxFeatures::All:
        break;
    }
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_features, 1));
}

double class_impurity(Criterion c, double n0, double n1)
{
    const double n = n0 + n1;
    if (n <= 0.0) {
        return 0.0;
    }
    const double p0 = n0 / n;
    const double p1 = n1 / n;
    if (c == Criterion::Gini) {
        return 1.0 - p0 * p0 - p1 * p1;
    }
    double h = 0.0;
    if (p0 > 0.0) {
        h -= p0 * std::log2(p0);
    }
    if (p1 > 0.0) {
        h -= p1 * std::log2(p1);
    }
    return h;
}

namespace {

constexpr double kPureTolerance = 1e-12;

bool is_classification(Criterion c) { return c == Criterion::Gini || c == Criterion::InfoGain; }

struct SplitChoice {
    int feature = -1;
    std::uint32_t last_left_bin = 0;
    double threshold = 0.0;
    double cost = std::numeric_limits<double>::infinity();
};

/// Fenwick tree over ranks 0..m-1 holding counts and sums.
class RankFenwick {
public:
    void reset(std::size_t m)
    {
        m_ = m;
        cnt_.assign(m + 1, 0);
        sum_.assign(m + 1, 0.0);
        top_ = m == 0 ? 0 : std::bit_floor(m);
    }

    void insert(std::size_t rank, double value)
    {
        for (auto i = rank + 1; i <= m_; i += i & (~i + 1)) {
            cnt_[i] += 1;
            sum_[i] += value;
        }
    }

    /// Count and sum of inserted ranks <= rank.
    std::pair<std::size_t, double> prefix(std::size_t rank) const
    {
        std::size_t c = 0;
        double s = 0.0;
        for (auto i = rank + 1; i > 0; i -= i & (~i + 1)) {
            c += cnt_[i];
            s += sum_[i];
        }
        return {c, s};
    }

    /// Rank of the k-th smallest (1-based k) inserted element.
    std::size_t kth_inserted(std::size_t k) const
    {
        std::size_t pos = 0;
        for (auto step = top_; step > 0; step >>= 1) {
            if (pos + step <= m_ && cnt_[pos + step] < k) {
                pos += step;
                k -= cnt_[pos];
            }
        }
        return pos;
    }

    /// Rank of the k-th smallest element NOT inserted; every rank in
    /// 0..m-1 is assumed present in the full set exactly once.
    std::size_t kth_missing(std::size_t k) const
    {
        std::size_t pos = 0;
        for (auto step = top_; step > 0; step >>= 1) {
            if (pos + step <= m_ && step - cnt_[pos + step] < k) {
                pos += step;
                k -= step - cnt_[pos];
            }
        }
        return pos;
    }

private:
    std::size_t m_ = 0;
    std::size_t top_ = 0;
    std::vector<std::size_t> cnt_;
    std::vector<double> sum_;
};

class TreeBuilder {
public:
    TreeBuilder(const BinnedMatrix& x, std::span<const double> targets, const TreeOptions& options, Rng& rng)
        : x_(x), y_(targets), opt_(options), rng_(rng), features_(x.cols())
    {
        std::iota(features_.begin(), features_.end(), 0);
        max_features_ = resolve_max_features(options.max_features, x.cols());
    }

    std::vector<TreeNode> build(std::span<const std::size_t> rows, std::vector<int>* leaf_of_row)
    {
        work_.assign(rows.begin(), rows.end());
        if (leaf_of_row) {
            leaf_of_row->assign(x_.rows(), -1);
        }
        struct Pending {
            int node;
            std::size_t begin;
            std::size_t end;
        };
        std::vector<TreeNode> nodes(1);
        nodes[0].depth = 0;
        std::vector<Pending> stack{{0, 0, work_.size()}};
        while (!stack.empty()) {
            auto [id, begin, end] = stack.back();
            stack.pop_back();
            summarize(nodes[id], begin, end);
            const auto& node = nodes[id];
            SplitChoice split;
            const bool may_split = node.depth < opt_.max_depth
                && node.samples >= static_cast<std::size_t>(std::max(opt_.min_samples_split, 2))
                && node.samples >= 2 * static_cast<std::size_t>(opt_.min_samples_leaf) && node.impurity > kPureTolerance;
            if (may_split) {
                split = find_split(begin, end);
            }
            if (split.feature < 0) {
                if (leaf_of_row) {
                    for (auto p = begin; p < end; ++p) {
                        (*leaf_of_row)[work_[p]] = id;
                    }
                }
                continue;
            }
            const auto codes = x_.column(static_cast<std::size_t>(split.feature));
            auto mid = std::partition(work_.begin() + static_cast<std::ptrdiff_t>(begin),
                                      work_.begin() + static_cast<std::ptrdiff_t>(end),
                                      [&](std::size_t r) { return codes[r] <= split.last_left_bin; });
            const auto mid_pos = static_cast<std::size_t>(mid - work_.begin());
            const int depth = nodes[id].depth + 1;
            const int left = static_cast<int>(nodes.size());
            const int right = left + 1;
            nodes[id].feature = split.feature;
            nodes[id].threshold = split.threshold;
            nodes[id].left = left;
            nodes[id].right = right;
            nodes.emplace_back().depth = depth;
            nodes.emplace_back().depth = depth;
            stack.push_back({right, mid_pos, end});
            stack.push_back({left, begin, mid_pos});
        }
        return nodes;
    }

private:
    void summarize(TreeNode& node, std::size_t begin, std::size_t end)
    {
        const auto n = end - begin;
        node.samples = n;
        if (n == 0) {
            return;
        }
        double sum = 0.0;
        double sumsq = 0.0;
        for (auto p = begin; p < end; ++p) {
            const double t = y_[work_[p]];
            sum += t;
            sumsq += t * t;
        }
        const double dn = static_cast<double>(n);
        switch (opt_.criterion) {
        case Criterion::Gini:
        case Criterion::InfoGain:
            node.value = sum / dn;
            node.impurity = class_impurity(opt_.criterion, dn - sum, sum);
            break;
        case Criterion::Mse: {
            const double mean = sum / dn;
            node.value = mean;
            node.impurity = std::max(0.0, sumsq / dn - mean * mean);
            break;
        }
        case Criterion::Mae: {
            sorted_.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                sorted_[k] = y_[work_[begin + k]];
            }
            std::sort(sorted_.begin(), sorted_.end());
            const double median = n % 2 == 1 ? sorted_[n / 2] : 0.5 * (sorted_[n / 2 - 1] + sorted_[n / 2]);
            double dev = 0.0;
            for (double t : sorted_) {
                dev += std::abs(t - median);
            }
            node.value = median;
            node.impurity = dev / dn;
            break;
        }
        }
    }

    SplitChoice find_split(std::size_t begin, std::size_t end)
    {
        SplitChoice best;
        if (opt_.criterion == Criterion::Mae) {
            prepare_ranks(begin, end);
        }
        std::size_t evaluated = 0;
        const auto d = features_.size();
        for (std::size_t t = 0; t < d; ++t) {
            std::uniform_int_distribution<std::size_t> pick(t, d - 1);
            std::swap(features_[t], features_[pick(rng_)]);
            const auto f = features_[t];
            bool constant = true;
            switch (opt_.criterion) {
            case Criterion::Gini:
            case Criterion::InfoGain:
                constant = scan_classification(f, begin, end, best);
                break;
            case Criterion::Mse:
                constant = scan_squared(f, begin, end, best);
                break;
            case Criterion::Mae:
                constant = scan_absolute(f, begin, end, best);
                break;
            }
            if (!constant) {
                ++evaluated;
            }
            if (evaluated >= max_features_ && best.feature >= 0) {
                break;
            }
        }
        return best;
    }

    /// Fills per-bin statistics for feature f over the node; returns the
    /// touched bin range [lo, hi].
    std::pair<std::uint32_t, std::uint32_t> fill_bins(std::size_t f, std::size_t begin, std::size_t end)
    {
        const auto codes = x_.column(f);
        const auto bins = x_.values(f).size();
        if (bin_count_.size() < bins) {
            bin_count_.resize(bins, 0.0);
            bin_sum_.resize(bins, 0.0);
        }
        std::uint32_t lo = std::numeric_limits<std::uint32_t>::max();
        std::uint32_t hi = 0;
        for (auto p = begin; p < end; ++p) {
            const auto r = work_[p];
            const auto b = codes[r];
            bin_count_[b] += 1.0;
            bin_sum_[b] += y_[r];
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
        return {lo, hi};
    }

    void clear_bins(std::uint32_t lo, std::uint32_t hi)
    {
        std::fill(bin_count_.begin() + lo, bin_count_.begin() + hi + 1, 0.0);
        std::fill(bin_sum_.begin() + lo, bin_sum_.begin() + hi + 1, 0.0);
    }

    template <typename Cost>
    bool sweep(std::size_t f, std::size_t begin, std::size_t end, SplitChoice& best, Cost cost)
    {
        auto [lo, hi] = fill_bins(f, begin, end);
        if (lo == hi) {
            clear_bins(lo, hi);
            return true;
        }
        const double n = static_cast<double>(end - begin);
        double total_sum = 0.0;
        for (auto b = lo; b <= hi; ++b) {
            total_sum += bin_sum_[b];
        }
        const double min_leaf = static_cast<double>(opt_.min_samples_leaf);
        const auto& values = x_.values(f);
        double left_n = 0.0;
        double left_sum = 0.0;
        for (auto b = lo; b < hi; ++b) {
            if (bin_count_[b] == 0.0) {
                continue;
            }
            left_n += bin_count_[b];
            left_sum += bin_sum_[b];
            auto next = b + 1;
            while (bin_count_[next] == 0.0) {
                ++next;
            }
            const double right_n = n - left_n;
            if (left_n < min_leaf || right_n < min_leaf) {
                continue;
            }
            const double c = cost(left_n, left_sum, right_n, total_sum - left_sum);
            if (c < best.cost) {
                best.cost = c;
                best.feature = static_cast<int>(f);
                best.last_left_bin = b;
                best.threshold = 0.5 * (values[b] + values[next]);
            }
        }
        clear_bins(lo, hi);
        return false;
    }

    bool scan_classification(std::size_t f, std::size_t begin, std::size_t end, SplitChoice& best)
    {
        const auto crit = opt_.criterion;
        return sweep(f, begin, end, best, [crit](double nl, double sl, double nr, double sr) {
            return nl * class_impurity(crit, nl - sl, sl) + nr * class_impurity(crit, nr - sr, sr);
        });
    }

    bool scan_squared(std::size_t f, std::size_t begin, std::size_t end, SplitChoice& best)
    {
        // Minimising the children's summed squared error is the same as
        // maximising sum_l^2/n_l + sum_r^2/n_r.
        return sweep(f, begin, end, best,
                     [](double nl, double sl, double nr, double sr) { return -(sl * sl / nl + sr * sr / nr); });
    }

    void prepare_ranks(std::size_t begin, std::size_t end)
    {
        const auto m = end - begin;
        order_.resize(m);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return y_[work_[begin + a]] < y_[work_[begin + b]]; });
        rank_.resize(m);
        sorted_.resize(m);
        prefix_.assign(m + 1, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            rank_[order_[r]] = r;
            sorted_[r] = y_[work_[begin + order_[r]]];
            prefix_[r + 1] = prefix_[r] + sorted_[r];
        }
    }

    /// Sum of absolute deviations from the lower median, given the median
    /// rank and the count/sum of elements at or below it.
    static double abs_deviation(double median, double n, double total, double below_n, double below_sum)
    {
        return median * below_n - below_sum + (total - below_sum) - median * (n - below_n);
    }

    bool scan_absolute(std::size_t f, std::size_t begin, std::size_t end, SplitChoice& best)
    {
        const auto codes = x_.column(f);
        const auto m = end - begin;
        const auto& values = x_.values(f);
        std::uint32_t lo = std::numeric_limits<std::uint32_t>::max();
        std::uint32_t hi = 0;
        for (auto p = begin; p < end; ++p) {
            const auto b = codes[work_[p]];
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
        if (lo == hi) {
            return true;
        }
        // Counting sort of node positions by bin.
        bucket_start_.assign(hi - lo + 2, 0);
        for (auto p = begin; p < end; ++p) {
            ++bucket_start_[codes[work_[p]] - lo + 1];
        }
        for (std::size_t b = 1; b < bucket_start_.size(); ++b) {
            bucket_start_[b] += bucket_start_[b - 1];
        }
        by_bin_.resize(m);
        {
            auto fill = bucket_start_;
            for (std::size_t k = 0; k < m; ++k) {
                by_bin_[fill[codes[work_[begin + k]] - lo]++] = k;
            }
        }
        fenwick_.reset(m);
        const double total = prefix_[m];
        const auto min_leaf = static_cast<std::size_t>(opt_.min_samples_leaf);
        std::size_t left_n = 0;
        double left_sum = 0.0;
        for (std::uint32_t b = lo; b < hi; ++b) {
            const auto first = bucket_start_[b - lo];
            const auto last = bucket_start_[b - lo + 1];
            if (first == last) {
                continue;
            }
            for (auto q = first; q < last; ++q) {
                const auto k = by_bin_[q];
                fenwick_.insert(rank_[k], sorted_[rank_[k]]);
                left_sum += sorted_[rank_[k]];
            }
            left_n += last - first;
            auto next = b + 1;
            while (bucket_start_[next - lo] == bucket_start_[next - lo + 1]) {
                ++next;
            }
            const auto right_n = m - left_n;
            if (left_n < min_leaf || right_n < min_leaf) {
                continue;
            }
            const auto lr = fenwick_.kth_inserted((left_n + 1) / 2);
            const auto [lc, ls] = fenwick_.prefix(lr);
            const double left_dev = abs_deviation(sorted_[lr], static_cast<double>(left_n), left_sum,
                                                  static_cast<double>(lc), ls);
            const auto rr = fenwick_.kth_missing((right_n + 1) / 2);
            const auto [rc_in_left, rs_in_left] = fenwick_.prefix(rr);
            const double below_n = static_cast<double>(rr + 1 - rc_in_left);
            const double below_sum = prefix_[rr + 1] - rs_in_left;
            const double right_dev = abs_deviation(sorted_[rr], static_cast<double>(right_n), total - left_sum,
                                                   below_n, below_sum);
            const double c = left_dev + right_dev;
            if (c < best.cost) {
                best.cost = c;
                best.feature = static_cast<int>(f);
                best.last_left_bin = b;
                best.threshold = 0.5 * (values[b] + values[next]);
            }
        }
        return false;
    }

    const BinnedMatrix& x_;
    std::span<const double> y_;
    TreeOptions opt_;
    Rng& rng_;
    std::vector<std::size_t> features_;
    std::size_t max_features_ = 1;
    std::vector<std::size_t> work_;
    std::vector<double> bin_count_;
    std::vector<double> bin_sum_;
    // Absolute-error scratch.
    std::vector<std::size_t> order_;
    std::vector<std::size_t> rank_;
    std::vector<double> sorted_;
    std::vector<double> prefix_;
    std::vector<std::size_t> bucket_start_;
    std::vector<std::size_t> by_bin_;
    RankFenwick fenwick_;
};

double parse_real(const std::string& token)
{
    double v = 0.0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size()) {
        throw std::runtime_error("malformed number '" + token + "' in model file");
    }
    return v;
}

} // namespace

DecisionTree DecisionTree::fit(const BinnedMatrix& x, std::span<const double> targets, std::span<const std::size_t> rows,
                               const TreeOptions& options, Rng& rng, std::vector<int>* leaf_of_row)
{
    if (rows.empty()) {
        throw std::invalid_argument("cannot grow a tree on zero rows");
    }
    if (targets.size() != x.rows()) {
        throw std::invalid_argument("target count does not match row count");
    }
    if (options.max_depth < 1 || options.min_samples_leaf < 1 || options.min_samples_split < 2) {
        throw std::invalid_argument("invalid tree limits");
    }
    if (is_classification(options.criterion)) {
        for (auto r : rows) {
            if (targets[r] != 0.0 && targets[r] != 1.0) {
                throw std::invalid_argument("classification targets must be 0 or 1");
            }
        }
    }
    TreeBuilder builder(x, targets, options, rng);
    DecisionTree tree;
    tree.nodes_ = builder.build(rows, leaf_of_row);
    return tree;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const
{
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        const auto& n = nodes_[id];
        id = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[id];
}

int DecisionTree::depth() const
{
    int d = 0;
    for (const auto& n : nodes_) {
        d = std::max(d, n.depth);
    }
    return d;
}

void DecisionTree::save(std::ostream& out) const
{
    out << "tree " << nodes_.size() << '\n';
    for (const auto& n : nodes_) {
        out << n.feature << ' ' << format_real(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
            << format_real(n.value) << ' ' << format_real(n.impurity) << ' ' << n.samples << ' ' << n.depth << '\n';
    }
}

DecisionTree DecisionTree::load(std::istream& in)
{
    std::string tag;
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != "tree") {
        throw std::runtime_error("expected 'tree' block in model file");
    }
    DecisionTree tree;
    tree.nodes_.resize(count);
    for (auto& n : tree.nodes_) {
        std::string threshold, value, impurity;
        if (!(in >> n.feature >> threshold >> n.left >> n.right >> value >> impurity >> n.samples >> n.depth)) {
            throw std::runtime_error("truncated tree block in model file");
        }
        n.threshold = parse_real(threshold);
        n.value = parse_real(value);
        n.impurity = parse_real(impurity);
        const auto limit = static_cast<int>(count);
        if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= limit || n.right >= limit)) {
            throw std::runtime_error("tree node references a missing child");
        }
    }
    if (tree.nodes_.empty()) {
        throw std::runtime_error("empty tree in model file");
    }
    return tree;
}

} // namespace pairrank
