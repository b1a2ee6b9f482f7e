#pragma once

// Brute-force reference implementations used only by tests. These stay
// deliberately naive - explicit formulas, raw densities, no log-sum-exp,
// closed-form inverses for d <= 3 - so they cannot share a bug with the
// library's Cholesky/log-space paths.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double det_small(const Eigen::MatrixXd& m) {
    switch (m.rows()) {
        case 1:
            return m(0, 0);
        case 2:
            return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        case 3:
            return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                   m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                   m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        default:
            throw std::runtime_error("det_small: d must be <= 3");
    }
}

inline Eigen::MatrixXd inverse_small(const Eigen::MatrixXd& m) {
    const double det = det_small(m);
    Eigen::MatrixXd inv(m.rows(), m.cols());
    switch (m.rows()) {
        case 1:
            inv(0, 0) = 1.0 / det;
            return inv;
        case 2:
            inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
            return inv / det;
        case 3:
            inv(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
            inv(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
            inv(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
            inv(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
            inv(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
            inv(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
            inv(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
            inv(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
            inv(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
            return inv / det;
        default:
            throw std::runtime_error("inverse_small: d must be <= 3");
    }
}

// Raw multivariate normal density via the textbook formula.
inline double mvn_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                          const Eigen::MatrixXd& cov) {
    const auto d = static_cast<double>(x.size());
    const Eigen::VectorXd diff = x - mean;
    const double quad = diff.dot(inverse_small(cov) * diff);
    const double norm = std::pow(2.0 * M_PI, -0.5 * d) / std::sqrt(det_small(cov));
    return norm * std::exp(-0.5 * quad);
}

struct Component {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double weight = 0.0;
};

// Posterior over components with explicit normalization of raw densities.
inline std::vector<double> posterior(const std::vector<Component>& comps,
                                     const Eigen::VectorXd& x) {
    std::vector<double> numer(comps.size());
    double denom = 0.0;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        numer[k] = comps[k].weight * mvn_density(x, comps[k].mean, comps[k].cov);
        denom += numer[k];
    }
    for (auto& v : numer) v /= denom;
    return numer;
}

struct AlpResult {
    double alp = 0.0;
    double accuracy = 0.0;
};

inline AlpResult alp(const std::vector<Component>& comps, const Eigen::MatrixXd& points,
                     const std::vector<int>& assignment) {
    double sum = 0.0;
    long long correct = 0;
    for (long long i = 0; i < points.rows(); ++i) {
        const auto p = posterior(comps, points.row(i).transpose());
        const int k = assignment[static_cast<std::size_t>(i)];
        sum += std::log(p[static_cast<std::size_t>(k)]);
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < p.size(); ++j)
            if (p[j] > p[argmax]) argmax = j;
        if (static_cast<int>(argmax) == k) ++correct;
    }
    AlpResult out;
    out.alp = sum / static_cast<double>(points.rows());
    out.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(points.rows());
    return out;
}

// Covariance by the O(n d^2) double loop, divisor n.
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& points) {
    const auto n = points.rows();
    const auto d = points.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (long long i = 0; i < n; ++i) mean += points.row(i).transpose();
    mean /= static_cast<double>(n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (long long i = 0; i < n; ++i) {
        const Eigen::VectorXd diff = points.row(i).transpose() - mean;
        cov += diff * diff.transpose();
    }
    return cov / static_cast<double>(n);
}

// Type-7 quantile (linear interpolation) of already sorted values.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = lo + 1 < sorted.size() ? lo + 1 : sorted.size() - 1;
    return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

// Hard-assignment two-component log joint likelihood for a binary split:
// sum over each side of log w_side + log N(x; fitted side Gaussian), with
// the side Gaussians fit by explicit mean/covariance and a diagonal or
// ridge regularization applied manually.
inline double split_log_joint(const Eigen::MatrixXd& points,
                              const std::vector<unsigned char>& bits, bool diagonal_reg,
                              double ridge, double log_prior) {
    const auto n = points.rows();
    const auto d = points.cols();
    Eigen::MatrixXd sides[2];
    {
        long long counts[2] = {0, 0};
        for (const auto b : bits) ++counts[b];
        sides[0].resize(counts[0], d);
        sides[1].resize(counts[1], d);
        long long idx[2] = {0, 0};
        for (long long i = 0; i < n; ++i) {
            const auto b = bits[static_cast<std::size_t>(i)];
            sides[b].row(idx[b]++) = points.row(i);
        }
    }
    double total = log_prior;
    for (int side = 0; side < 2; ++side) {
        const auto& pts = sides[side];
        Eigen::MatrixXd cov = covariance(pts);
        if (diagonal_reg) {
            const Eigen::VectorXd diag = cov.diagonal();
            cov = Eigen::MatrixXd::Zero(d, d);
            for (long long j = 0; j < d; ++j) cov(j, j) = diag(j) > 0.0 ? diag(j) : 1e-8;
        } else {
            cov.diagonal().array() += ridge;
        }
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        for (long long i = 0; i < pts.rows(); ++i) mean += pts.row(i).transpose();
        mean /= static_cast<double>(pts.rows());
        const double log_w =
            std::log(static_cast<double>(pts.rows()) / static_cast<double>(n));
        for (long long i = 0; i < pts.rows(); ++i)
            total += log_w + std::log(mvn_density(pts.row(i).transpose(), mean, cov));
    }
    return total;
}

}  // namespace oracle
