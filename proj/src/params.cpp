#include "pairrank/params.hpp"

#include "pairrank/text.hpp"

#include <charconv>
#include <stdexcept>

namespace pairrank {

std::string_view to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::Svm:
        return "svm";
    case ModelKind::Gbdt:
        return "gbdt";
    case ModelKind::DecisionTree:
        return "dtree";
    case ModelKind::RandomForest:
        return "rforest";
    }
    return "?";
}

std::string_view to_string(ModelMode mode)
{
    return mode == ModelMode::Classifier ? "classifier" : "regressor";
}

ModelKind parse_model_kind(std::string_view name)
{
    for (auto kind : kAllModelKinds) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected svm, gbdt, dtree or rforest)");
}

ModelMode parse_model_mode(std::string_view name)
{
    if (name == "classifier") {
        return ModelMode::Classifier;
    }
    if (name == "regressor") {
        return ModelMode::Regressor;
    }
    throw std::invalid_argument("unknown model mode '" + std::string(name) + "'");
}

std::string to_text(const ParamValue& value)
{
    if (const auto* i = std::get_if<std::int64_t>(&value)) {
        return std::to_string(*i);
    }
    if (const auto* d = std::get_if<double>(&value)) {
        auto text = format_real(*d);
        if (text.find_first_of(".eEn") == std::string::npos) {
            text += ".0";
        }
        return text;
    }
    return std::get<std::string>(value);
}

ParamConfig& ParamConfig::set(const std::string& key, ParamValue value)
{
    if (key.empty() || key.find_first_of("= \t\n") != std::string::npos) {
        throw std::invalid_argument("invalid parameter name '" + key + "'");
    }
    if (const auto* s = std::get_if<std::string>(&value)) {
        if (s->empty() || s->find_first_of("= \t\n") != std::string::npos) {
            throw std::invalid_argument("invalid value for parameter '" + key + "'");
        }
    }
    values_[key] = std::move(value);
    return *this;
}

const ParamValue& ParamConfig::at(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw std::invalid_argument("missing parameter '" + key + "'");
    }
    return it->second;
}

std::int64_t ParamConfig::integer(const std::string& key) const
{
    const auto& v = at(key);
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return *i;
    }
    throw std::invalid_argument("parameter '" + key + "' is not an integer");
}

double ParamConfig::real(const std::string& key) const
{
    const auto& v = at(key);
    if (const auto* d = std::get_if<double>(&v)) {
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return static_cast<double>(*i);
    }
    throw std::invalid_argument("parameter '" + key + "' is not a number");
}

const std::string& ParamConfig::choice(const std::string& key) const
{
    const auto& v = at(key);
    if (const auto* s = std::get_if<std::string>(&v)) {
        return *s;
    }
    throw std::invalid_argument("parameter '" + key + "' is not a categorical value");
}

std::string ParamConfig::to_text() const
{
    std::string out;
    for (const auto& [key, value] : values_) {
        if (!out.empty()) {
            out += ' ';
        }
        out += key;
        out += '=';
        out += pairrank::to_text(value);
    }
    return out;
}

ParamConfig ParamConfig::parse(std::string_view text)
{
    ParamConfig config;
    for (auto token : split_on(text, ' ')) {
        if (token.empty()) {
            continue;
        }
        auto eq = token.find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == token.size()) {
            throw std::invalid_argument("malformed parameter '" + std::string(token) + "'");
        }
        const std::string key(token.substr(0, eq));
        auto value = token.substr(eq + 1);
        const char* first = value.data();
        const char* last = value.data() + value.size();

        std::int64_t as_int = 0;
        if (auto [p, ec] = std::from_chars(first, last, as_int); ec == std::errc() && p == last) {
            config.set(key, as_int);
            continue;
        }
        double as_real = 0.0;
        if (auto [p, ec] = std::from_chars(first, last, as_real); ec == std::errc() && p == last) {
            config.set(key, as_real);
            continue;
        }
        config.set(key, std::string(value));
    }
    return config;
}

} // namespace pairrank
