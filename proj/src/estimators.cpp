#include <algorithm>
#include <cmath>

#include "searchlab/error.h"
#include "searchlab/stats.h"

namespace searchlab {

namespace {

double two_sided_p(double z) { return std::erfc(std::abs(z) * 0.7071067811865475244); }

// A single column perfectly separates the classes when its values for y=1 and
// y=0 occupy disjoint half-lines; the probit likelihood is then unbounded.
void check_separation(const std::vector<std::string>& names, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (X.col(j).minCoeff() == X.col(j).maxCoeff()) continue;  // constants cannot separate
    double min1 = INFINITY, max1 = -INFINITY, min0 = INFINITY, max0 = -INFINITY;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double v = X(i, j);
      if (y(i) > 0.5) {
        min1 = std::min(min1, v);
        max1 = std::max(max1, v);
      } else {
        min0 = std::min(min0, v);
        max0 = std::max(max0, v);
      }
    }
    if (min1 > max0 || max1 < min0) {
      throw StateError("column '" + names[static_cast<std::size_t>(j)] +
                       "' perfectly separates the outcome classes; the likelihood is unbounded");
    }
  }
}

double probit_loglik(const Eigen::VectorXd& mu, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    ll += y(i) > 0.5 ? log_norm_cdf(mu(i)) : log_norm_cdf(-mu(i));
  }
  return ll;
}

}  // namespace

ProbitFit probit_fit(const std::vector<std::string>& names, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n == 0 || p == 0) throw ParameterError("probit needs a non-empty design");
  if (static_cast<Eigen::Index>(names.size()) != p) {
    throw ParameterError("probit needs one name per column");
  }
  if (y.size() != n) throw ParameterError("probit outcome length differs from the design");

  long ones = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw ParameterError("probit outcome must be 0/1");
    if (y(i) == 1.0) ++ones;
  }
  if (ones == 0 || ones == n) throw ParameterError("probit outcome contains a single class");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (X.col(j).cwiseAbs().maxCoeff() == 0.0) {
      throw ParameterError("design column '" + names[static_cast<std::size_t>(j)] +
                           "' is constant zero");
    }
  }
  check_separation(names, X, y);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mu = X * beta;
  double ll = probit_loglik(mu, y);

  ProbitFit fit;
  fit.n = n;
  Eigen::MatrixXd info(p, p);
  constexpr int kMaxIter = 100;
  constexpr double kTol = 1e-8;

  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
    info.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = mu(i);
      double r, w;
      if (y(i) > 0.5) {
        const double lam = inverse_mills(m);
        r = lam;
        w = lam * (m + lam);
      } else {
        const double lam = inverse_mills(-m);
        r = -lam;
        w = lam * (lam - m);
      }
      grad.noalias() += r * X.row(i).transpose();
      info.noalias() += w * (X.row(i).transpose() * X.row(i));
    }
    fit.max_abs_gradient = grad.cwiseAbs().maxCoeff();
    if (fit.max_abs_gradient < kTol) {
      fit.converged = true;
      break;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw RankError("observed information is singular; remove collinear columns");
    }
    const Eigen::VectorXd step = ldlt.solve(grad);

    // Halve the step until the likelihood stops decreasing.
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      const Eigen::VectorXd cand = beta + scale * step;
      const Eigen::VectorXd cand_mu = X * cand;
      const double cand_ll = probit_loglik(cand_mu, y);
      if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12) {
        beta = cand;
        mu = cand_mu;
        ll = cand_ll;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;  // stuck; report unconverged with current state
  }
  fit.iterations = iter;
  fit.log_likelihood = ll;

  // SEs from the inverse observed information at the reported optimum.
  {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
    info.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = mu(i);
      double r, w;
      if (y(i) > 0.5) {
        const double lam = inverse_mills(m);
        r = lam;
        w = lam * (m + lam);
      } else {
        const double lam = inverse_mills(-m);
        r = -lam;
        w = lam * (lam - m);
      }
      grad.noalias() += r * X.row(i).transpose();
      info.noalias() += w * (X.row(i).transpose() * X.row(i));
    }
    fit.max_abs_gradient = grad.cwiseAbs().maxCoeff();
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw RankError("observed information is singular at the optimum");
  }
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));

  const double ybar = static_cast<double>(ones) / static_cast<double>(n);
  fit.null_log_likelihood = static_cast<double>(ones) * std::log(ybar) +
                            static_cast<double>(n - ones) * std::log(1.0 - ybar);

  for (Eigen::Index j = 0; j < p; ++j) {
    FitTerm term;
    term.name = names[static_cast<std::size_t>(j)];
    term.coef = beta(j);
    term.se = std::sqrt(std::max(cov(j, j), 0.0));
    term.z = term.se > 0.0 ? term.coef / term.se : 0.0;
    term.p = two_sided_p(term.z);
    fit.terms.push_back(std::move(term));
  }
  return fit;
}

OlsFit ols_fit(const std::vector<std::string>& names, const Eigen::MatrixXd& X,
               const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n == 0 || p == 0) throw ParameterError("ols needs a non-empty design");
  if (static_cast<Eigen::Index>(names.size()) != p) throw ParameterError("ols needs one name per column");
  if (y.size() != n) throw ParameterError("ols outcome length differs from the design");
  if (n <= p) throw ParameterError("ols needs more rows than columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    // The pivot order puts dependent columns last.
    const auto& perm = qr.colsPermutation().indices();
    std::string dependent;
    for (Eigen::Index j = qr.rank(); j < p; ++j) {
      if (!dependent.empty()) dependent += ", ";
      dependent += names[static_cast<std::size_t>(perm(j))];
    }
    throw RankError("design is rank deficient; dependent columns: " + dependent);
  }

  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double ssr = resid.squaredNorm();
  const double sigma2 = ssr / static_cast<double>(n - p);

  // (X'X)^-1 = P R^-1 R^-T P' from the pivoted QR factors.
  const Eigen::MatrixXd R =
      qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd xtx_inv =
      qr.colsPermutation() * (rinv * rinv.transpose()) * qr.colsPermutation().transpose();

  OlsFit fit;
  fit.n = n;
  fit.sigma = std::sqrt(sigma2);
  const double ybar = y.mean();
  const double sst = (y.array() - ybar).matrix().squaredNorm();
  fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : (ssr <= 1e-24 ? 1.0 : 0.0);

  for (Eigen::Index j = 0; j < p; ++j) {
    FitTerm term;
    term.name = names[static_cast<std::size_t>(j)];
    term.coef = beta(j);
    term.se = std::sqrt(std::max(sigma2 * xtx_inv(j, j), 0.0));
    term.z = term.se > 0.0 ? term.coef / term.se : 0.0;
    term.p = two_sided_p(term.z);
    fit.terms.push_back(std::move(term));
  }
  return fit;
}

}  // namespace searchlab
