#pragma once

#include "pairrank/dataset.hpp"
#include "pairrank/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace pairrank {

/// Dense row-major matrix of feature values.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static FeatureMatrix from_vectors(std::span<const FeatureVector> vectors);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Column-major bin codes: every distinct value of a column gets its own
/// bin, so split search over bins is exact.
class BinnedMatrix {
public:
    explicit BinnedMatrix(const FeatureMatrix& x);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return edges_.size(); }
    std::span<const std::uint32_t> column(std::size_t c) const { return {codes_.data() + c * rows_, rows_}; }
    /// Sorted distinct values of column c.
    const std::vector<double>& values(std::size_t c) const { return edges_[c]; }

private:
    std::size_t rows_ = 0;
    std::vector<std::uint32_t> codes_;
    std::vector<std::vector<double>> edges_;
};

enum class Criterion { Gini, InfoGain, Mse, Mae };
enum class MaxFeatures { Sqrt, Log2, All };

std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view name);
std::string_view to_string(MaxFeatures m);
MaxFeatures parse_max_features(std::string_view name);

/// Number of candidate features per split for `n_features` columns.
std::size_t resolve_max_features(MaxFeatures m, std::size_t n_features);

/// Impurity of a node under a classification criterion given class counts.
double class_impurity(Criterion c, double n0, double n1);

struct TreeOptions {
    Criterion criterion = Criterion::Gini;
    int max_depth = 200;
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    MaxFeatures max_features = MaxFeatures::Sqrt;
};

struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    /// Class-1 frequency (Gini/InfoGain), mean (Mse) or median (Mae).
    double value = 0.0;
    double impurity = 0.0;
    std::size_t samples = 0;
    int depth = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

/// CART tree. Samples at x[feature] <= threshold go left.
class DecisionTree {
public:
    /// Grows a tree on the listed rows (repeats allowed, as in bootstrap
    /// resamples). Classification criteria expect targets in {0, 1}.
    /// When `leaf_of_row` is given it is resized to x.rows() and holds the
    /// leaf index of every listed row (-1 for rows not listed).
    static DecisionTree fit(const BinnedMatrix& x, std::span<const double> targets, std::span<const std::size_t> rows,
                            const TreeOptions& options, Rng& rng, std::vector<int>* leaf_of_row = nullptr);

    const TreeNode& leaf_for(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return leaf_for(x).value; }

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    void set_leaf_value(std::size_t node, double value) { nodes_.at(node).value = value; }
    int depth() const;

    void save(std::ostream& out) const;
    static DecisionTree load(std::istream& in);

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

} // namespace pairrank
