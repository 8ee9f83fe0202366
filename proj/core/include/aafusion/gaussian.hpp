#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace aafusion {

/// Largest state/measurement dimension supported. Vectors and matrices live on
/// the stack up to this size, which keeps the KL-matrix hot loops allocation free.
inline constexpr int kMaxDim = 8;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Weighted Gaussian. As a density term the weight is ignored; as a PHD term it
/// is the expected number of targets the component carries.
struct GaussianComponent {
    double weight = 0.0;
    Vector mean;
    Matrix cov;

    [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
};

/// Builds a component, symmetrizing the covariance.
GaussianComponent make_component(double weight, Vector mean, Matrix cov);

/// Ordered list of same-dimension Gaussian components. Index order is
/// meaningful: export/import mappings refer to components by position.
class GaussianMixture {
public:
    GaussianMixture() = default;
    explicit GaussianMixture(Eigen::Index dim) : dim_(dim) {}
    GaussianMixture(Eigen::Index dim, std::vector<GaussianComponent> components);

    [[nodiscard]] Eigen::Index dim() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return components_.size(); }
    [[nodiscard]] bool empty() const { return components_.empty(); }

    [[nodiscard]] const std::vector<GaussianComponent>& components() const { return components_; }
    [[nodiscard]] const GaussianComponent& operator[](std::size_t i) const { return components_[i]; }
    [[nodiscard]] GaussianComponent& operator[](std::size_t i) { return components_[i]; }

    [[nodiscard]] auto begin() const { return components_.begin(); }
    [[nodiscard]] auto end() const { return components_.end(); }
    [[nodiscard]] auto begin() { return components_.begin(); }
    [[nodiscard]] auto end() { return components_.end(); }

    /// Appends a component. The first push fixes the dimension of a
    /// default-constructed mixture; later pushes must match it.
    void push_back(GaussianComponent component);
    void reserve(std::size_t n) { components_.reserve(n); }

    [[nodiscard]] std::vector<double> weights() const;
    void set_weights(std::span<const double> weights);
    void scale_weights(double factor);

private:
    Eigen::Index dim_ = 0;
    std::vector<GaussianComponent> components_;
};

/// Lower Cholesky factor of a covariance and its log-determinant.
struct CovarianceFactor {
    Matrix lower;
    double log_det = 0.0;
};

/// Factorizes a covariance after symmetrization. Adds 1e-9*I and retries once
/// on failure; throws SingularCovarianceError if that also fails.
CovarianceFactor factorize(const Matrix& cov);

/// Gaussian with its factorization cached, for repeated KL/density evaluation.
struct PreparedGaussian {
    Vector mean;
    Matrix cov;
    CovarianceFactor factor;
};

PreparedGaussian prepare(const GaussianComponent& g);
std::vector<PreparedGaussian> prepare(const GaussianMixture& gm);

/// KL(a || b) between the Gaussian densities of a and b (weights ignored).
/// Negative round-off is clamped to zero; identical inputs give exactly zero.
double kl_gaussian(const GaussianComponent& a, const GaussianComponent& b);
double kl_gaussian(const PreparedGaussian& a, const PreparedGaussian& b);

/// Dense matrix of KL(from_a || to_b), rows indexed by `from`, columns by `to`.
Eigen::MatrixXd kl_matrix(std::span<const PreparedGaussian> from, std::span<const PreparedGaussian> to);
Eigen::MatrixXd kl_matrix(const GaussianMixture& from, const GaussianMixture& to);

double log_density(const PreparedGaussian& g, const Vector& x);
double density(const GaussianComponent& g, const Vector& x);

/// Moment-matched merge. Each part's weight is its mass; the result carries the
/// total mass and the first two moments of the weighted part-set.
GaussianComponent moment_match_merge(std::span<const GaussianComponent> parts);

/// Sum_j w_j N(x; mu_j, Sigma_j).
double mixture_eval(const GaussianMixture& gm, const Vector& x);

/// Sum of weights; for a PHD this is the expected target count.
double total_mass(const GaussianMixture& gm);

/// Prune / merge / cap reduction.
///
/// Components with weight below `prune_threshold` are dropped. Remaining ones
/// are merged greedily around the heaviest unmerged component, taking every
/// component whose squared Mahalanobis distance to the leader (under the
/// leader's covariance) is below `merge_threshold`. If more than `cap`
/// components remain, the `cap` heaviest are kept and every surplus component
/// is moment-matched into its nearest kept one, so the mass is preserved.
/// Output is sorted by descending weight.
GaussianMixture reduce(const GaussianMixture& gm, double prune_threshold, double merge_threshold, std::size_t cap);

} // namespace aafusion
