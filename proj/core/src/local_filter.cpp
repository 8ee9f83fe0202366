#include "aafusion/local_filter.hpp"

#include "aafusion/errors.hpp"

#include <cmath>
#include <string>

namespace aafusion {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite_mixture(const GaussianMixture& gm) {
    for (const auto& c : gm) {
        if (!std::isfinite(c.weight) || !c.mean.allFinite() || !c.cov.allFinite()) {
            return false;
        }
    }
    return true;
}

} // namespace

std::string_view to_string(FilterType type) {
    switch (type) {
    case FilterType::Phd:
        return "PHD";
    case FilterType::Mb:
        return "MB";
    case FilterType::Lmb:
        return "LMB";
    }
    return "?";
}

FilterType parse_filter_type(std::string_view text) {
    if (text == "PHD" || text == "phd") {
        return FilterType::Phd;
    }
    if (text == "MB" || text == "mb") {
        return FilterType::Mb;
    }
    if (text == "LMB" || text == "lmb") {
        return FilterType::Lmb;
    }
    throw ConfigError("unknown filter type '" + std::string(text) + "'");
}

LocalFilter::LocalFilter(FilterType type, Eigen::Index state_dim) : type_(type) {
    switch (type) {
    case FilterType::Phd:
        state_ = PhdFilterState{GaussianMixture(state_dim)};
        break;
    case FilterType::Mb:
        state_ = MbFilterState{};
        break;
    case FilterType::Lmb:
        state_ = LmbFilterState{};
        break;
    }
}

void LocalFilter::predict(const FilterModels& models, int step) {
    step_ = step;
    state_ = std::visit(Overloaded{
                            [&](const PhdFilterState& s) -> State { return phd_predict(s, models.motion, models.birth); },
                            [&](const MbFilterState& s) -> State { return mb_predict(s, models.motion, models.birth); },
                            [&](const LmbFilterState& s) -> State {
                                return lmb_predict(s, models.motion, models.birth, step);
                            },
                        },
                        state_);
}

void LocalFilter::update(const FilterModels& models, std::span<const Vector> measurements) {
    state_ = std::visit(Overloaded{
                            [&](const PhdFilterState& s) -> State {
                                return phd_reduce(phd_update(s, models.measurement, measurements), models.phd);
                            },
                            [&](const MbFilterState& s) -> State {
                                return mb_update(s, models.measurement, measurements, models.bernoulli);
                            },
                            [&](const LmbFilterState& s) -> State {
                                return lmb_update(s, models.measurement, measurements, models.bernoulli);
                            },
                        },
                        state_);
}

PhdExport LocalFilter::export_phd() const {
    return std::visit([](const auto& s) { return aafusion::export_phd(s); }, state_);
}

void LocalFilter::import_phd(const GaussianMixture& fitted, std::span<const GcIndex> mapping, ImportMode mode,
                             const FilterModels& models) {
    const auto& bp = models.bernoulli;
    state_ = std::visit(Overloaded{
                            [&](const PhdFilterState& s) -> State {
                                if (s.intensity.empty() && mapping.empty()) {
                                    return phd_reduce(PhdFilterState{fitted}, models.phd);
                                }
                                return phd_reduce(aafusion::import_phd(s, fitted, mapping, mode), models.phd);
                            },
                            [&](const MbFilterState& s) -> State {
                                auto tracks = aafusion::import_phd(s, fitted, mapping, mode).bernoullis;
                                return MbFilterState{reduce_tracks(merge_tracks(std::move(tracks), bp), bp)};
                            },
                            [&](const LmbFilterState& s) -> State {
                                auto tracks = aafusion::import_phd(s, fitted, mapping, mode, step_).bernoullis;
                                return LmbFilterState{reduce_tracks(merge_tracks(std::move(tracks), bp), bp)};
                            },
                        },
                        state_);
}

std::vector<Estimate> LocalFilter::extract() const {
    return std::visit([](const auto& s) { return extract_estimates(s); }, state_);
}

double LocalFilter::cardinality() const { return total_mass(export_phd().mixture); }

std::size_t LocalFilter::component_count() const { return export_phd().mixture.size(); }

bool LocalFilter::finite() const {
    return std::visit(Overloaded{
                          [](const PhdFilterState& s) { return finite_mixture(s.intensity); },
                          [](const auto& s) {
                              for (const auto& t : s.bernoullis) {
                                  if (!std::isfinite(t.existence) || !finite_mixture(t.density)) {
                                      return false;
                                  }
                              }
                              return true;
                          },
                      },
                      state_);
}

} // namespace aafusion
