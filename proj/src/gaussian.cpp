#include "embeval/gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "embeval/csv.hpp"
#include "embeval/error.hpp"

namespace embeval {

namespace {

constexpr double kEpsilonFloor = 1e-8;
constexpr double kMassCutoff = 0.9999;
constexpr double kLog2Pi = 1.8378770664093453;

void require_symmetric(const Eigen::MatrixXd& m, const char* who) {
    if (!is_symmetric(m)) throw InputError(std::string(who) + ": matrix is not symmetric");
}

}  // namespace

bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

RegularizationMode RegularizationMode::tikhonov(double lambda) {
    if (!(lambda > 0.0)) throw InputError("tikhonov lambda must be > 0");
    return {RegKind::Tikhonov, lambda};
}

RegularizationMode RegularizationMode::parse(const std::string& text) {
    if (text == "diag") return diagonal();
    if (text == "auto") return auto_eps();
    const std::string prefix = "tikhonov:";
    if (text.rfind(prefix, 0) == 0) {
        double lambda = 0.0;
        if (!csv::parse_double(text.substr(prefix.size()), lambda))
            throw InputError("bad regularization '" + text + "'");
        return tikhonov(lambda);
    }
    throw InputError("bad regularization '" + text + "' (expected diag|tikhonov:<lambda>|auto)");
}

std::string RegularizationMode::describe() const {
    switch (kind) {
        case RegKind::Diagonal:
            return "diag";
        case RegKind::Tikhonov:
            return "tikhonov:" + csv::format_double(lambda);
        case RegKind::AutoEpsilon:
            return "auto";
    }
    return "?";
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> fit_mle(const Eigen::MatrixXd& points) {
    const auto n = points.rows();
    const auto d = points.cols();
    if (n < 1) throw InputError("fit_mle: no points");
    Eigen::VectorXd mean = points.colwise().mean().transpose();
    if (n == 1) return {std::move(mean), Eigen::MatrixXd::Zero(d, d)};
    const Eigen::MatrixXd centered = points.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
    cov = ((cov + cov.transpose()) * 0.5).eval();
    return {std::move(mean), std::move(cov)};
}

double auto_epsilon(const Eigen::MatrixXd& covariance) {
    require_symmetric(covariance, "auto_epsilon");
    const auto d = covariance.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw InternalError("auto_epsilon: eigendecomposition failed");
    // Ascending from Eigen; scan from the top with round-off negatives clamped.
    const Eigen::VectorXd eigenvalues = solver.eigenvalues().cwiseMax(0.0);
    const double total = eigenvalues.sum();
    if (total <= 0.0) return kEpsilonFloor;

    const double largest = eigenvalues(d - 1);
    double cumulative = 0.0;
    double at_cutoff = 0.0;
    for (auto i = d - 1; i >= 0; --i) {
        cumulative += eigenvalues(i);
        if (cumulative / total > kMassCutoff) {
            at_cutoff = eigenvalues(i);
            break;
        }
    }
    const double epsilon = at_cutoff * largest / (10.0 * static_cast<double>(d));
    return std::max(epsilon, kEpsilonFloor);
}

std::pair<Eigen::MatrixXd, RegApplied> regularize(const Eigen::MatrixXd& covariance,
                                                  RegularizationMode mode) {
    require_symmetric(covariance, "regularize");
    const auto d = covariance.rows();
    switch (mode.kind) {
        case RegKind::Diagonal: {
            Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
            for (long long i = 0; i < d; ++i) {
                const double v = covariance(i, i);
                out(i, i) = v > 0.0 ? v : kEpsilonFloor;
            }
            return {std::move(out), RegApplied{RegKind::Diagonal, 0.0}};
        }
        case RegKind::Tikhonov: {
            Eigen::MatrixXd out = covariance;
            out.diagonal().array() += mode.lambda;
            return {std::move(out), RegApplied{RegKind::Tikhonov, mode.lambda}};
        }
        case RegKind::AutoEpsilon: {
            const double epsilon = auto_epsilon(covariance);
            Eigen::MatrixXd out = covariance;
            out.diagonal().array() += epsilon;
            return {std::move(out), RegApplied{RegKind::AutoEpsilon, epsilon}};
        }
    }
    throw InternalError("regularize: unknown mode");
}

GaussianComponent make_component(Eigen::VectorXd mean, const Eigen::MatrixXd& raw_covariance,
                                 double log_weight, RegularizationMode mode) {
    GaussianComponent comp;
    comp.mean = std::move(mean);
    comp.log_weight = log_weight;
    auto [cov, applied] = regularize(raw_covariance, mode);

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        // one retry with the loading doubled
        const double bump = applied.epsilon > 0.0 ? applied.epsilon : kEpsilonFloor;
        cov.diagonal().array() += bump;
        applied.epsilon += bump;
        llt.compute(cov);
        if (llt.info() != Eigen::Success)
            throw InternalError("covariance not positive definite after regularization");
    }

    comp.covariance = std::move(cov);
    comp.reg_applied = applied;
    comp.chol_lower = llt.matrixL();
    const auto d = comp.covariance.rows();
    comp.log_norm_const = -0.5 * static_cast<double>(d) * kLog2Pi -
                          comp.chol_lower.diagonal().array().log().sum();
    comp.diagonal = mode.kind == RegKind::Diagonal;
    return comp;
}

double log_density(const GaussianComponent& comp, const Eigen::VectorXd& x) {
    if (x.size() != comp.mean.size())
        throw InputError("log_density: dimension mismatch");
    if (comp.diagonal) {
        const Eigen::ArrayXd z = (x - comp.mean).array() / comp.chol_lower.diagonal().array();
        return comp.log_norm_const - 0.5 * z.square().sum();
    }
    const Eigen::VectorXd z =
        comp.chol_lower.triangularView<Eigen::Lower>().solve(x - comp.mean);
    return comp.log_norm_const - 0.5 * z.squaredNorm();
}

Eigen::VectorXd log_density_batch(const GaussianComponent& comp,
                                  const Eigen::MatrixXd& x_cols) {
    if (x_cols.rows() != comp.mean.size())
        throw InputError("log_density_batch: dimension mismatch");
    Eigen::MatrixXd centered = x_cols.colwise() - comp.mean;
    if (comp.diagonal) {
        centered.array().colwise() /= comp.chol_lower.diagonal().array();
    } else {
        comp.chol_lower.triangularView<Eigen::Lower>().solveInPlace(centered);
    }
    const Eigen::RowVectorXd sq = centered.colwise().squaredNorm();
    return (comp.log_norm_const - 0.5 * sq.transpose().array()).matrix();
}

}  // namespace embeval
