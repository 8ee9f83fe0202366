#include "aafusion/bernoulli_filter.hpp"
#include "aafusion/errors.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace aafusion;
using namespace aafusion::testing;

namespace {

BirthModel reference_birth() {
    BirthModel b;
    for (const auto& m : {vec({0, 0, 0, 0}), vec({400, 0, -600, 0}), vec({-800, 0, -200, 0}), vec({-200, 0, 800, 0})}) {
        b.components.push_back(BirthComponent{0.03, m, diag({100, 100, 100, 100})});
    }
    return b;
}

MeasurementModel reference_measurement() {
    MeasurementModel m;
    m.observation = position_observation();
    m.noise = diag({100, 100});
    return m;
}

BernoulliComponent track(double r, std::initializer_list<GaussianComponent> parts, std::optional<Label> label = {}) {
    return BernoulliComponent{r, mix1(parts), label};
}

MbFilterState random_mb(std::mt19937_64& rng, std::size_t tracks) {
    MbFilterState s;
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (std::size_t i = 0; i < tracks; ++i) {
        s.bernoullis.push_back(BernoulliComponent{u(rng), random_mixture(rng, 2, 1 + i % 3), std::nullopt});
    }
    return s;
}

std::vector<Vector> scan(std::initializer_list<std::pair<double, double>> points) {
    std::vector<Vector> z;
    for (const auto& [x, y] : points) {
        z.push_back(vec({x, y}));
    }
    return z;
}

} // namespace

TEST(MbPredict, EmptyStateGivesBirthTracks) {
    const auto s = mb_predict(MbFilterState{}, constant_velocity_model(1, 25, 0.95), reference_birth());
    ASSERT_EQ(s.bernoullis.size(), 4u);
    for (const auto& t : s.bernoullis) {
        EXPECT_EQ(t.existence, 0.03);
        EXPECT_NEAR(total_mass(t.density), 1.0, 1e-12);
    }
}

TEST(MbPredict, SurvivalScalesExistence) {
    MbFilterState s{{track(0.8, {g1(1, 0, 1)})}};
    MotionModel m{Matrix::Identity(1, 1), Matrix::Zero(1, 1), 0.95};
    const auto out = mb_predict(s, m, BirthModel{});
    ASSERT_EQ(out.bernoullis.size(), 1u);
    EXPECT_NEAR(out.bernoullis[0].existence, 0.76, 1e-15);
}

TEST(MbUpdate, MissedDetectionMatchesBernoulliClosedForm) {
    for (const double r : {0.1, 0.5, 0.8, 0.99}) {
        MbFilterState s{{BernoulliComponent{r, GaussianMixture(4, {make_component(1.0, vec({0, 1, 0, 1}), diag({10, 1, 10, 1}))}), {}}}};
        const auto out = mb_update(s, reference_measurement(), {}, BernoulliParams{});
        ASSERT_EQ(out.bernoullis.size(), 1u);
        EXPECT_NEAR(out.bernoullis[0].existence, r * 0.1 / (1 - r * 0.9), 1e-12);
    }
}

TEST(MbUpdate, DetectionRaisesExistenceAndMovesMean) {
    MbFilterState s{{BernoulliComponent{0.5, GaussianMixture(4, {make_component(1.0, vec({0, 0, 0, 0}), diag({100, 10, 100, 10}))}), {}}}};
    const auto out = mb_update(s, reference_measurement(), scan({{5, 5}}), BernoulliParams{});
    ASSERT_GE(out.bernoullis.size(), 1u);
    EXPECT_GT(out.bernoullis[0].existence, 0.99);
    const auto est = extract_estimates(out);
    ASSERT_EQ(est.size(), 1u);
    EXPECT_GT(est[0].state(0), 1.0);
}

TEST(MbUpdate, SingleTrackMarginalsMatchEnumeratedHypotheses) {
    // One track, two gated measurements: hypotheses {absent, missed, z1, z2}
    // are enumerable by hand.
    const double r = 0.6;
    const auto meas = reference_measurement();
    const auto g = make_component(1.0, vec({0, 0, 0, 0}), diag({50, 5, 50, 5}));
    MbFilterState s{{BernoulliComponent{r, GaussianMixture(4, {g}), {}}}};
    const auto z = scan({{3, -2}, {-6, 4}});
    const auto out = mb_update(s, meas, z, BernoulliParams{});

    const Matrix sc = meas.observation * g.cov * meas.observation.transpose() + meas.noise;
    const double kappa = meas.clutter_density();
    double w_det = 0.0;
    for (const auto& zj : z) {
        const auto pz = make_component(1.0, meas.observation * g.mean, sc);
        w_det += r * meas.detect_prob * density(pz, zj) / kappa;
    }
    const double w_absent = 1 - r;
    const double w_missed = r * (1 - meas.detect_prob);
    const double expected = (w_det + w_missed) / (w_det + w_missed + w_absent);
    ASSERT_EQ(out.bernoullis.size(), 1u);
    EXPECT_NEAR(out.bernoullis[0].existence, expected, 1e-9);
}

TEST(LmbPredict, KeepsLabelsAndAddsDistinctBirthLabels) {
    LmbFilterState s{{track(0.9, {g1(1, 0, 1)}, Label{1, 0}), track(0.5, {g1(1, 3, 1)}, Label{2, 1})}};
    MotionModel m{Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0.95};
    BirthModel birth;
    birth.components.push_back(BirthComponent{0.03, vec({0}), Matrix::Identity(1, 1)});
    birth.components.push_back(BirthComponent{0.03, vec({5}), Matrix::Identity(1, 1)});
    const auto out = lmb_predict(s, m, birth, 3);
    ASSERT_EQ(out.bernoullis.size(), 4u);
    EXPECT_EQ(out.bernoullis[0].label, (Label{1, 0}));
    EXPECT_EQ(out.bernoullis[1].label, (Label{2, 1}));
    std::set<Label> labels;
    for (const auto& t : out.bernoullis) {
        ASSERT_TRUE(t.label);
        labels.insert(*t.label);
    }
    EXPECT_EQ(labels.size(), 4u);
}

TEST(LmbFilter, LabelsStayDistinctThroughRecursion) {
    const auto motion = constant_velocity_model(1, 25, 0.95);
    const auto meas = reference_measurement();
    const auto birth = reference_birth();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1000, 1000);
    LmbFilterState s;
    for (int k = 1; k <= 15; ++k) {
        s = lmb_predict(s, motion, birth, k);
        std::vector<Vector> z = scan({{6.0 * k, -4.0 * k}});
        for (int i = 0; i < 5; ++i) {
            z.push_back(vec({u(rng), u(rng)}));
        }
        s = lmb_update(s, meas, z, BernoulliParams{});
        std::set<Label> labels;
        for (const auto& t : s.bernoullis) {
            ASSERT_TRUE(t.label);
            labels.insert(*t.label);
            EXPECT_NEAR(total_mass(t.density), 1.0, 1e-6);
        }
        EXPECT_EQ(labels.size(), s.bernoullis.size()) << "step " << k;
    }
    const auto est = extract_estimates(s);
    ASSERT_FALSE(est.empty());
    EXPECT_TRUE(est[0].label.has_value());
}

TEST(MbExtract, ExistenceThreshold) {
    MbFilterState s{{track(0.8, {g1(1, 0, 1)}), track(0.2, {g1(1, 5, 1)})}};
    EXPECT_EQ(extract_estimates(s).size(), 1u);
    EXPECT_TRUE(extract_estimates(MbFilterState{}).empty());
}

TEST(MbExtract, UsesHeaviestComponent) {
    MbFilterState s{{track(0.9, {g1(0.3, -4, 1), g1(0.7, 2, 1)})}};
    const auto est = extract_estimates(s);
    ASSERT_EQ(est.size(), 1u);
    EXPECT_EQ(est[0].state(0), 2.0);
    EXPECT_FALSE(est[0].label);
}

TEST(MbExport, FlattensExistenceTimesWeights) {
    MbFilterState s{{track(0.8, {g1(0.6, 0, 1), g1(0.4, 3, 1)})}};
    const auto e = export_phd(s);
    ASSERT_EQ(e.mixture.size(), 2u);
    EXPECT_NEAR(e.mixture[0].weight, 0.48, 1e-15);
    EXPECT_NEAR(e.mixture[1].weight, 0.32, 1e-15);
    EXPECT_NEAR(total_mass(e.mixture), 0.8, 1e-15);
    EXPECT_EQ(e.mapping[1], (GcIndex{0, 1}));
}

TEST(LmbExport, MassIsSumOfExistences) {
    LmbFilterState s{{track(0.9, {g1(1, 0, 1)}, Label{1, 0}), track(0.5, {g1(1, 4, 1)}, Label{1, 1})}};
    EXPECT_NEAR(total_mass(export_phd(s).mixture), 1.4, 1e-15);
}

TEST(MbImport, FlatWeightsBecomeExistenceAndDensity) {
    MbFilterState s{{track(0.8, {g1(0.6, 0, 1), g1(0.4, 3, 1)})}};
    const auto e = export_phd(s);
    auto fitted = e.mixture;
    fitted.set_weights(std::vector<double>{0.3, 0.3});
    const auto out = import_phd(s, fitted, e.mapping, ImportMode::WeightsOnly);
    EXPECT_NEAR(out.bernoullis[0].existence, 0.6, 1e-15);
    EXPECT_NEAR(out.bernoullis[0].density[0].weight, 0.5, 1e-15);
    EXPECT_NEAR(out.bernoullis[0].density[1].weight, 0.5, 1e-15);
}

TEST(MbImport, ExistenceClamped) {
    MbFilterState s{{track(0.8, {g1(0.6, 0, 1), g1(0.4, 3, 1)})}};
    const auto e = export_phd(s);
    auto fitted = e.mixture;
    fitted.set_weights(std::vector<double>{0.7, 0.5});
    const auto out = import_phd(s, fitted, e.mapping, ImportMode::WeightsOnly);
    EXPECT_EQ(out.bernoullis[0].existence, kMaxImportedExistence);
}

TEST(MbImport, RoundTripIsIdentityOnRandomStates) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = random_mb(rng, 1 + static_cast<std::size_t>(trial % 6));
        const auto e = export_phd(s);
        double r_sum = 0.0;
        for (const auto& t : s.bernoullis) {
            r_sum += t.existence;
        }
        EXPECT_NEAR(total_mass(e.mixture), r_sum, 1e-9);
        const auto back = import_phd(s, e.mixture, e.mapping, ImportMode::Full);
        ASSERT_EQ(back.bernoullis.size(), s.bernoullis.size());
        for (std::size_t l = 0; l < s.bernoullis.size(); ++l) {
            EXPECT_NEAR(back.bernoullis[l].existence, s.bernoullis[l].existence, 1e-12);
            for (std::size_t c = 0; c < s.bernoullis[l].density.size(); ++c) {
                EXPECT_NEAR(back.bernoullis[l].density[c].weight, s.bernoullis[l].density[c].weight, 1e-12);
                EXPECT_LE((back.bernoullis[l].density[c].mean - s.bernoullis[l].density[c].mean).norm(), 1e-12);
            }
        }
    }
}

TEST(MbImport, MismatchedMappingThrows) {
    MbFilterState s{{track(0.8, {g1(0.6, 0, 1), g1(0.4, 3, 1)})}};
    const auto e = export_phd(s);
    EXPECT_THROW(import_phd(s, mix1({g1(1, 0, 1)}), e.mapping, ImportMode::Full), MappingError);
}

TEST(LmbImport, KeepsLabelsAndColdStartLabelsAreDistinct) {
    LmbFilterState s{{track(0.9, {g1(1, 0, 1)}, Label{1, 0}), track(0.5, {g1(1, 4, 1)}, Label{1, 1})}};
    const auto e = export_phd(s);
    const auto back = import_phd(s, e.mixture, e.mapping, ImportMode::Full, 5);
    EXPECT_EQ(back.bernoullis[1].label, (Label{1, 1}));

    const auto cold = import_phd(LmbFilterState{}, mix1({g1(0.7, 0, 1), g1(0.4, 9, 1)}), {}, ImportMode::Full, 5);
    ASSERT_EQ(cold.bernoullis.size(), 2u);
    EXPECT_NE(cold.bernoullis[0].label, cold.bernoullis[1].label);
    EXPECT_NEAR(cold.bernoullis[0].existence, 0.7, 1e-15);
}

TEST(MergeTracks, CoincidentTracksMergeIntoHeavierOne) {
    std::vector<BernoulliComponent> tracks{track(0.4, {g1(1, 0, 1)}, Label{1, 0}), track(0.5, {g1(1, 0.5, 1)}, Label{2, 0}),
                                           track(0.7, {g1(1, 50, 1)}, Label{3, 0})};
    const auto out = merge_tracks(tracks, BernoulliParams{});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].label, (Label{2, 0}));
    EXPECT_NEAR(out[0].existence, 0.9, 1e-15);
    EXPECT_NEAR(total_mass(out[0].density), 1.0, 1e-15);
    EXPECT_EQ(out[1].label, (Label{3, 0}));
}

TEST(MergeTracks, ExistenceClampedAndDisabledByZeroThreshold) {
    std::vector<BernoulliComponent> tracks{track(0.8, {g1(1, 0, 1)}), track(0.7, {g1(1, 0, 1)})};
    EXPECT_EQ(merge_tracks(tracks, BernoulliParams{})[0].existence, kMaxImportedExistence);
    BernoulliParams off;
    off.track_merge_threshold = 0.0;
    EXPECT_EQ(merge_tracks(tracks, off).size(), 2u);
}
