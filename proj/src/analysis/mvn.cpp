#include "pvn/analysis.hpp"

#include "pvn/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pvn {
namespace {

constexpr int kShifts = 8;
constexpr double kProbClamp = 1e-300;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    p = std::clamp(p, kProbClamp, 1.0 - 1e-16);
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

std::vector<double> lattice_generator(Eigen::Index dim) {
    std::vector<double> gen;
    for (int candidate = 2; static_cast<Eigen::Index>(gen.size()) < dim; ++candidate) {
        bool prime = true;
        for (int d = 2; d * d <= candidate && prime; ++d) {
            prime = candidate % d != 0;
        }
        if (prime) {
            gen.push_back(std::sqrt(static_cast<double>(candidate)));
        }
    }
    return gen;
}

Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& cov) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    if (eig.eigenvalues().minCoeff() < -1e-8 * top || !(top > 0.0)) {
        throw EstimationError("covariance is not positive semidefinite");
    }
    double jitter = 1e-12 * top;
    for (int attempt = 0; attempt < 8; ++attempt, jitter *= 100.0) {
        const Eigen::LLT<Eigen::MatrixXd> llt(cov + jitter * Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
        if (llt.info() == Eigen::Success) {
            return llt.matrixL();
        }
    }
    throw EstimationError("covariance factorization failed");
}

}  // namespace

double mvn_orthant(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const MvnOptions& options) {
    const Eigen::Index dim = mean.size();
    if (cov.rows() != dim || cov.cols() != dim || dim == 0) {
        throw ConfigError("mean and covariance sizes differ");
    }
    // Most constraining variables first.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd sd = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return mean[a] / std::max(sd[a], 1e-300) < mean[b] / std::max(sd[b], 1e-300);
    });
    Eigen::VectorXd lower(dim);
    Eigen::MatrixXd sorted(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        lower[i] = -mean[order[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < dim; ++j) {
            sorted(i, j) = cov(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
    }
    const Eigen::MatrixXd chol = robust_cholesky(sorted);
    const std::vector<double> gen = lattice_generator(dim);

    Rng rng = make_rng(options.seed);
    const int per_shift = std::max(1, options.points / kShifts);
    Eigen::VectorXd y(dim);
    double total = 0.0;
    for (int shift = 0; shift < kShifts; ++shift) {
        std::vector<double> offset(static_cast<std::size_t>(dim));
        for (double& o : offset) {
            o = uniform(rng, {0.0, 1.0});
        }
        for (int k = 1; k <= per_shift; ++k) {
            double f = 1.0;
            for (Eigen::Index i = 0; i < dim && f > 0.0; ++i) {
                const double t = chol.row(i).head(i).dot(y.head(i));
                const double d = normal_cdf((lower[i] - t) / chol(i, i));
                f *= 1.0 - d;
                if (i + 1 < dim) {
                    const double frac = std::fmod(k * gen[static_cast<std::size_t>(i)] + offset[static_cast<std::size_t>(i)], 1.0);
                    const double w = std::abs(2.0 * frac - 1.0);
                    y[i] = normal_quantile(d + w * (1.0 - d));
                }
            }
            total += f;
        }
    }
    return total / (static_cast<double>(per_shift) * kShifts);
}

}  // namespace pvn
