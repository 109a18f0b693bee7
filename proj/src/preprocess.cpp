#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "confmix/datasets.hpp"
#include "confmix/error.hpp"

namespace confmix {

namespace {

std::vector<double> column(const FeatureMatrix& x, std::size_t j) {
    std::vector<double> col(x.n_samples());
    for (std::size_t i = 0; i < x.n_samples(); ++i) col[i] = x(i, j);
    return col;
}

/// Linear-interpolated quantile of sorted data (numpy's default rule).
double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> variances(const FeatureMatrix& x) {
    std::vector<double> out(x.n_features());
    for (std::size_t j = 0; j < x.n_features(); ++j) {
        const auto col = column(x, j);
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        out[j] = ss / static_cast<double>(col.size());
    }
    return out;
}

FeatureMatrix select_columns(const FeatureMatrix& x, const std::vector<std::size_t>& kept) {
    if (kept.empty()) throw DataError("feature selection kept no features");
    if (kept.back() >= x.n_features()) {
        throw DataError(fmt::format("selector keeps column {} but the data has {} features", kept.back() + 1,
                                    x.n_features()));
    }
    std::vector<double> values;
    values.reserve(x.n_samples() * kept.size());
    for (std::size_t i = 0; i < x.n_samples(); ++i) {
        for (std::size_t j : kept) values.push_back(x(i, j));
    }
    return FeatureMatrix(x.n_samples(), kept.size(), std::move(values));
}

} // namespace

RobustScaler RobustScaler::fit(const FeatureMatrix& x) {
    RobustScaler s;
    for (std::size_t j = 0; j < x.n_features(); ++j) {
        auto col = column(x, j);
        std::sort(col.begin(), col.end());
        const double iqr = quantile(col, 0.75) - quantile(col, 0.25);
        s.median.push_back(quantile(col, 0.5));
        s.scale.push_back(iqr > 0.0 ? iqr : 1.0);
    }
    return s;
}

FeatureMatrix RobustScaler::transform(const FeatureMatrix& x) const {
    if (x.n_features() != median.size()) {
        throw DataError(fmt::format("scaler fitted on {} features applied to {}", median.size(), x.n_features()));
    }
    std::vector<double> values(x.values());
    for (std::size_t i = 0; i < x.n_samples(); ++i) {
        for (std::size_t j = 0; j < x.n_features(); ++j) {
            double& v = values[i * x.n_features() + j];
            v = (v - median[j]) / scale[j];
        }
    }
    return FeatureMatrix(x.n_samples(), x.n_features(), std::move(values));
}

nlohmann::json RobustScaler::to_json() const { return {{"median", median}, {"scale", scale}}; }

RobustScaler RobustScaler::from_json(const nlohmann::json& j) {
    RobustScaler s;
    s.median = j.at("median").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    if (s.median.size() != s.scale.size()) throw FormatError("robust scaler: median and scale lengths differ");
    return s;
}

VarianceThreshold VarianceThreshold::fit(const FeatureMatrix& x, double threshold) {
    VarianceThreshold t;
    t.threshold = threshold;
    const auto var = variances(x);
    for (std::size_t j = 0; j < var.size(); ++j) {
        if (var[j] > threshold) t.kept.push_back(j);
    }
    if (t.kept.empty()) throw DataError(fmt::format("no feature has variance above {}", threshold));
    return t;
}

FeatureMatrix VarianceThreshold::transform(const FeatureMatrix& x) const {
    return select_columns(x, kept);
}

nlohmann::json VarianceThreshold::to_json() const { return {{"threshold", threshold}, {"kept", kept}}; }

VarianceThreshold VarianceThreshold::from_json(const nlohmann::json& j) {
    VarianceThreshold t;
    t.threshold = j.at("threshold").get<double>();
    t.kept = j.at("kept").get<std::vector<std::size_t>>();
    return t;
}

TopVarianceSelector TopVarianceSelector::fit(const FeatureMatrix& x, std::size_t count) {
    if (count == 0) throw UsageError("top-variance selection needs a positive count");
    const auto var = variances(x);
    std::vector<std::size_t> order(var.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
    order.resize(std::min(count, order.size()));
    std::sort(order.begin(), order.end());
    return {std::move(order)};
}

FeatureMatrix TopVarianceSelector::transform(const FeatureMatrix& x) const {
    return select_columns(x, kept);
}

nlohmann::json TopVarianceSelector::to_json() const { return {{"kept", kept}}; }

TopVarianceSelector TopVarianceSelector::from_json(const nlohmann::json& j) {
    return {j.at("kept").get<std::vector<std::size_t>>()};
}

} // namespace confmix
