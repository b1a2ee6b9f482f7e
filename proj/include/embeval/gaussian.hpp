#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

namespace embeval {

enum class RegKind { Diagonal, Tikhonov, AutoEpsilon };

struct RegularizationMode {
    RegKind kind = RegKind::Diagonal;
    double lambda = 0.0;  // Tikhonov only

    static RegularizationMode diagonal() { return {RegKind::Diagonal, 0.0}; }
    static RegularizationMode tikhonov(double lambda);
    static RegularizationMode auto_eps() { return {RegKind::AutoEpsilon, 0.0}; }

    // "diag" | "tikhonov:<lambda>" | "auto"
    static RegularizationMode parse(const std::string& text);
    std::string describe() const;
};

struct RegApplied {
    RegKind kind = RegKind::Diagonal;
    double epsilon = 0.0;  // value actually added to the diagonal
};

// One Gaussian of a cluster model. The covariance is stored after
// regularization together with its Cholesky factor, so density evaluation
// never re-factorizes.
struct GaussianComponent {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    double log_weight = 0.0;
    RegApplied reg_applied;

    Eigen::MatrixXd chol_lower;
    double log_norm_const = 0.0;  // -d/2 log(2pi) - sum log L_ii
    bool diagonal = false;        // fast path: L is diagonal
};

// Arithmetic mean and biased covariance (divisor n). A single point yields
// the zero matrix.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> fit_mle(const Eigen::MatrixXd& points);

// Eigenvalue-cutoff diagonal loading: with eigenvalues sorted decreasingly
// and k the smallest index whose cumulative mass exceeds 99.99%, returns
// max(lambda_k * lambda_0 / (10 d), 1e-8).
double auto_epsilon(const Eigen::MatrixXd& covariance);

std::pair<Eigen::MatrixXd, RegApplied> regularize(const Eigen::MatrixXd& covariance,
                                                  RegularizationMode mode);

// Regularizes, factorizes, and caches the Cholesky data. A failed
// factorization is retried once with the loading doubled, then reported as
// an internal error.
GaussianComponent make_component(Eigen::VectorXd mean, const Eigen::MatrixXd& raw_covariance,
                                 double log_weight, RegularizationMode mode);

double log_density(const GaussianComponent& comp, const Eigen::VectorXd& x);

// Columns of x_cols are points (d x n); returns one log density per column.
Eigen::VectorXd log_density_batch(const GaussianComponent& comp,
                                  const Eigen::MatrixXd& x_cols);

bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

}  // namespace embeval
