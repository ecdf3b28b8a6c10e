#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace pairrank {

enum class ModelKind { Svm, Gbdt, DecisionTree, RandomForest };
enum class ModelMode { Classifier, Regressor };

std::string_view to_string(ModelKind kind);
std::string_view to_string(ModelMode mode);
ModelKind parse_model_kind(std::string_view name);
ModelMode parse_model_mode(std::string_view name);

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::Svm, ModelKind::Gbdt, ModelKind::DecisionTree,
                                               ModelKind::RandomForest};

using ParamValue = std::variant<std::int64_t, double, std::string>;

/// Named hyperparameters for one model. Keys are the usual names
/// (min_samples_split, max_depth, learning_rate, C, gamma, ...).
///
/// Text form is `key=value` pairs separated by single spaces, keys sorted.
/// Reals always carry a radix point or exponent so the type survives a
/// round trip.
class ParamConfig {
public:
    ParamConfig() = default;

    ParamConfig& set(const std::string& key, ParamValue value);
    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    std::size_t size() const noexcept { return values_.size(); }

    std::int64_t integer(const std::string& key) const;
    double real(const std::string& key) const;
    const std::string& choice(const std::string& key) const;

    const std::map<std::string, ParamValue>& values() const noexcept { return values_; }

    std::string to_text() const;
    static ParamConfig parse(std::string_view text);

    bool operator==(const ParamConfig&) const = default;

private:
    const ParamValue& at(const std::string& key) const;

    std::map<std::string, ParamValue> values_;
};

std::string to_text(const ParamValue& value);

} // namespace pairrank
