#pragma once

#include "aafusion/fusion.hpp"
#include "aafusion/gaussian.hpp"

namespace aafusion {

/// Alternative approximations of KL(D_AA || D_s) between two Gaussian
/// mixtures. They are evaluators only; no fit optimizes them.
///
/// D1, D4 and D5 treat both mixtures as densities and normalize them to unit
/// mass first. D2 and D3 use the weights as given. All throw
/// std::invalid_argument on an empty mixture.

/// KL between the single moment-matched Gaussians of the two mixtures.
double bound_d1(const PhdAA& aa, const GaussianMixture& local);

/// Smallest pairwise component KL.
double bound_d2(const PhdAA& aa, const GaussianMixture& local);

/// sum_{a,b} pi_a w_b KL(N_a || N_b).
double bound_d3(const PhdAA& aa, const GaussianMixture& local);

/// Product-integral lower bound:
/// sum_a pi_a log(sum_a' pi_a' z_aa' / sum_b w_b z_ab), z_ab = N(mu_a; mu_b, Sigma_a + Sigma_b).
double bound_d4(const PhdAA& aa, const GaussianMixture& local);

/// Variational approximation:
/// sum_a pi_a log(sum_a' pi_a' exp(-KL(a||a')) / sum_b w_b exp(-KL(a||b))).
double bound_d5(const PhdAA& aa, const GaussianMixture& local);

} // namespace aafusion
