#pragma once

#include "aafusion/bernoulli_filter.hpp"
#include "aafusion/models.hpp"
#include "aafusion/phd_filter.hpp"

#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace aafusion {

enum class FilterType { Phd, Mb, Lmb };

std::string_view to_string(FilterType type);
FilterType parse_filter_type(std::string_view text);

struct FilterModels {
    MotionModel motion;
    MeasurementModel measurement;
    BirthModel birth;
    PhdParams phd;
    BernoulliParams bernoulli;
};

/// A sensor's local multi-target filter of any supported type.
class LocalFilter {
public:
    using State = std::variant<PhdFilterState, MbFilterState, LmbFilterState>;

    LocalFilter(FilterType type, Eigen::Index state_dim);

    [[nodiscard]] FilterType type() const { return type_; }
    [[nodiscard]] const State& state() const { return state_; }

    void predict(const FilterModels& models, int step);
    /// Measurement update followed by the type's reduction.
    void update(const FilterModels& models, std::span<const Vector> measurements);

    [[nodiscard]] PhdExport export_phd() const;
    /// Imports a fitted PHD, then reduces: PHD states prune and merge
    /// components, MB/LMB states merge duplicate tracks and reduce.
    void import_phd(const GaussianMixture& fitted, std::span<const GcIndex> mapping, ImportMode mode,
                    const FilterModels& models);

    [[nodiscard]] std::vector<Estimate> extract() const;

    /// Expected target count (total PHD mass).
    [[nodiscard]] double cardinality() const;
    [[nodiscard]] std::size_t component_count() const;

    /// False if any weight, existence, mean or covariance entry is non-finite.
    [[nodiscard]] bool finite() const;

private:
    FilterType type_;
    State state_;
    int step_ = 0;
};

} // namespace aafusion
