#include "mortscen/regression.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "mortscen/errors.hpp"

namespace mortscen {

namespace {

constexpr double kEtaClamp = 35.0;
constexpr double kThetaFloor = 1e-8;

/// Centered design matrix: [1, t - c, (t - eps) 1{t>=eps}, 1{t>=eps}],
/// truncated to the columns the design uses. Centering keeps the normal
/// equations well conditioned; coefficients are mapped back to the raw-year
/// parameterisation afterwards (b0 = a0 - c a1, all other entries equal).
Eigen::MatrixXd build_design(const std::vector<int> &years, const DesignSpec &design, int center) {
    const int n = static_cast<int>(years.size());
    const int k = design.coefficient_count();
    Eigen::MatrixXd X(n, k);
    for (int i = 0; i < n; ++i) {
        const int t = years[i];
        X(i, 0) = 1.0;
        X(i, 1) = static_cast<double>(t - center);
        if (k >= 3)
            X(i, 2) = t >= design.epsilon ? static_cast<double>(t - design.epsilon) : 0.0;
        if (k >= 4)
            X(i, 3) = t >= design.epsilon ? 1.0 : 0.0;
    }
    return X;
}

double clamp_eta(double eta) { return std::min(std::max(eta, -kEtaClamp), kEtaClamp); }

struct NbData {
    Eigen::VectorXd y;
    Eigen::VectorXd log_exposure;
    Eigen::MatrixXd X; // centered at the breakpoint, 4 columns
    int breakpoint = 2011;

    Eigen::VectorXd mean(const Eigen::Vector4d &a) const {
        Eigen::VectorXd mu = log_exposure + X * a;
        for (int i = 0; i < mu.size(); ++i)
            mu[i] = std::exp(clamp_eta(mu[i]));
        return mu;
    }
};

double nb_loglik_mu(const Eigen::VectorXd &y, const Eigen::VectorXd &mu, double theta) {
    double ll = 0.0;
    for (int i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        const double mi = mu[i];
        ll += std::lgamma(yi + theta) - std::lgamma(theta) - std::lgamma(yi + 1.0) +
              theta * std::log(theta) - (theta + yi) * std::log(theta + mi);
        if (yi > 0.0)
            ll += yi * std::log(mi);
    }
    return ll;
}

Eigen::Vector4d beta_score_centered(const NbData &data, const Eigen::VectorXd &mu, double theta) {
    Eigen::VectorXd r(data.y.size());
    for (int i = 0; i < r.size(); ++i)
        r[i] = theta * (data.y[i] - mu[i]) / (theta + mu[i]);
    return data.X.transpose() * r;
}

double theta_score(const Eigen::VectorXd &y, const Eigen::VectorXd &mu, double theta) {
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i)
        s += boost::math::digamma(y[i] + theta) - boost::math::digamma(theta) +
             std::log(theta) + 1.0 - std::log(theta + mu[i]) -
             (theta + y[i]) / (theta + mu[i]);
    return s;
}

double theta_curvature(const Eigen::VectorXd &y, const Eigen::VectorXd &mu, double theta) {
    double h = 0.0;
    for (int i = 0; i < y.size(); ++i)
        h += boost::math::trigamma(y[i] + theta) - boost::math::trigamma(theta) + 1.0 / theta -
             1.0 / (theta + mu[i]) - (mu[i] - y[i]) / ((theta + mu[i]) * (theta + mu[i]));
    return h;
}

/// Iteratively reweighted least squares for the coefficients at fixed theta.
/// theta = +inf requests the Poisson limit (used for initialisation).
void irls(const NbData &data, double theta, Eigen::Vector4d &a, int max_iter = 100) {
    const bool poisson = std::isinf(theta);
    Eigen::VectorXd mu = data.mean(a);
    double ll = poisson ? 0.0 : nb_loglik_mu(data.y, mu, theta);
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd w(mu.size()), z(mu.size());
        const Eigen::VectorXd lp = data.X * a;
        for (int i = 0; i < mu.size(); ++i) {
            w[i] = poisson ? mu[i] : theta * mu[i] / (theta + mu[i]);
            z[i] = lp[i] + (data.y[i] - mu[i]) / mu[i];
        }
        const Eigen::Matrix4d XtWX =
            data.X.transpose() * w.asDiagonal() * data.X;
        const Eigen::Vector4d XtWz = data.X.transpose() * (w.asDiagonal() * z);
        Eigen::Vector4d a_new = XtWX.ldlt().solve(XtWz);
        if (!a_new.allFinite())
            break;

        // Step halving keeps the likelihood from drifting downward on
        // ill-scaled iterations (near separation, extreme counts).
        Eigen::Vector4d step = a_new - a;
        double scale = 1.0;
        Eigen::VectorXd mu_new;
        double ll_new = 0.0;
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            Eigen::Vector4d a_try = a + scale * step;
            mu_new = data.mean(a_try);
            ll_new = poisson ? -(mu_new.sum()) + data.y.dot((mu_new.array().log()).matrix())
                             : nb_loglik_mu(data.y, mu_new, theta);
            if (std::isfinite(ll_new) && (iter == 0 || ll_new >= ll - 1e-10 * (1.0 + std::abs(ll)))) {
                a = a_try;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted)
            break;
        mu = mu_new;
        const double change = std::abs(ll_new - ll);
        ll = ll_new;
        if (iter > 0 && change < 1e-13 * (1.0 + std::abs(ll)))
            break;
    }
}

/// Newton steps on log(theta) maximising the profile likelihood at fixed mu.
/// Returns true when theta ends clamped at the cap.
bool update_theta(const NbData &data, const Eigen::VectorXd &mu, double &theta,
                  int max_iter = 50) {
    double u = std::log(theta);
    for (int iter = 0; iter < max_iter; ++iter) {
        const double th = std::exp(u);
        const double g = th * theta_score(data.y, mu, th);
        if (std::abs(g) < 1e-13 * static_cast<double>(data.y.size()))
            break;
        const double h = g + th * th * theta_curvature(data.y, mu, th);
        double step = h < 0.0 ? -g / h : (g > 0.0 ? 1.0 : -1.0);
        step = std::min(std::max(step, -4.0), 4.0);
        u += step;
        u = std::min(std::max(u, std::log(kThetaFloor)), std::log(kThetaCap));
        if (u >= std::log(kThetaCap) && g > 0.0) {
            theta = kThetaCap;
            return true;
        }
    }
    theta = std::min(std::max(std::exp(u), kThetaFloor), kThetaCap);
    return theta >= kThetaCap && theta_score(data.y, mu, theta) > 0.0;
}

std::array<double, 5> raw_score(const NbData &data, const Eigen::Vector4d &a, double theta) {
    const Eigen::VectorXd mu = data.mean(a);
    const Eigen::Vector4d gc = beta_score_centered(data, mu, theta);
    return {gc[0], gc[1] + data.breakpoint * gc[0], gc[2], gc[3],
            theta_score(data.y, mu, theta)};
}

double scaled_score_norm(const std::array<double, 5> &score, double ll, bool include_theta) {
    double norm = 0.0;
    const int limit = include_theta ? 5 : 4;
    for (int i = 0; i < limit; ++i)
        norm = std::max(norm, std::abs(score[i]));
    return norm / (1.0 + std::abs(ll));
}

double wald_p(double beta, double se) {
    if (!(se > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    return std::erfc(std::abs(beta / se) / std::sqrt(2.0));
}

CellFit fit_series_impl(const std::vector<std::int64_t> &counts,
                        const std::vector<double> &exposures, const std::vector<int> &years,
                        int breakpoint) {
    const int n = static_cast<int>(counts.size());
    if (exposures.size() != counts.size() || years.size() != counts.size())
        throw InvalidArgument("counts, exposures and years must have equal length");
    if (n < 6)
        throw InvalidArgument("too few observations for a four-coefficient trend fit");

    NbData data;
    data.breakpoint = breakpoint;
    data.y.resize(n);
    data.log_exposure.resize(n);
    for (int i = 0; i < n; ++i) {
        if (counts[i] < 0)
            throw InvalidArgument("negative count");
        if (!(exposures[i] > 0.0))
            throw InvalidArgument("non-positive exposure");
        data.y[i] = static_cast<double>(counts[i]);
        data.log_exposure[i] = std::log(exposures[i]);
    }
    data.X = build_design(years, DesignSpec{BreakKind::discontinuous, breakpoint}, breakpoint);

    CellFit fit;
    fit.breakpoint = breakpoint;

    // Poisson start: mu = y + 0.5 seeds the working response.
    Eigen::Vector4d a;
    {
        Eigen::VectorXd mu0 = data.y.array() + 0.5;
        Eigen::VectorXd z0 = (mu0.array().log() - data.log_exposure.array()).matrix();
        const Eigen::Matrix4d XtWX = data.X.transpose() * mu0.asDiagonal() * data.X;
        const Eigen::Vector4d XtWz = data.X.transpose() * (mu0.asDiagonal() * z0);
        a = XtWX.ldlt().solve(XtWz);
        if (!a.allFinite())
            a.setZero();
        irls(data, std::numeric_limits<double>::infinity(), a);
    }

    // Moment start for the dispersion.
    double theta;
    {
        const Eigen::VectorXd mu = data.mean(a);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            num += mu[i] * mu[i];
            den += (data.y[i] - mu[i]) * (data.y[i] - mu[i]) - mu[i];
        }
        theta = den > 0.0 ? std::min(std::max(num / den, 1e-3), 1e6) : 1e6;
    }

    // Alternate coefficient IRLS with profile Newton for theta.
    bool capped = false;
    double prev_objective = std::numeric_limits<double>::infinity();
    bool deviance_settled = false;
    int outer = 0;
    constexpr int kMaxOuter = 200;
    for (; outer < kMaxOuter; ++outer) {
        irls(data, theta, a);
        capped = update_theta(data, data.mean(a), theta);
        const double objective = -2.0 * nb_loglik_mu(data.y, data.mean(a), theta);
        if (outer > 0 &&
            std::abs(objective - prev_objective) < 1e-8 * (std::abs(objective) + 1.0)) {
            deviance_settled = true;
            const double ll = -0.5 * objective;
            if (scaled_score_norm(raw_score(data, a, theta), ll, !capped) < 1e-8)
                break;
        }
        prev_objective = objective;
    }

    // Newton polish with the observed information drives the score toward
    // machine precision; the alternating scheme above only converges linearly.
    for (int polish = 0; polish < 60; ++polish) {
        const Eigen::VectorXd mu = data.mean(a);
        const double ll = nb_loglik_mu(data.y, mu, theta);
        const auto score = raw_score(data, a, theta);
        if (scaled_score_norm(score, ll, !capped) < 1e-12)
            break;

        Eigen::VectorXd w(n);
        for (int i = 0; i < n; ++i)
            w[i] = theta * mu[i] * (theta + data.y[i]) / ((theta + mu[i]) * (theta + mu[i]));
        const Eigen::Matrix4d info = data.X.transpose() * w.asDiagonal() * data.X;
        const Eigen::Vector4d gc = beta_score_centered(data, mu, theta);
        Eigen::Vector4d step = info.ldlt().solve(gc);
        if (!step.allFinite())
            break;
        double scale = 1.0;
        bool moved = false;
        for (int half = 0; half < 30; ++half) {
            const Eigen::Vector4d a_try = a + scale * step;
            const double ll_try = nb_loglik_mu(data.y, data.mean(a_try), theta);
            if (std::isfinite(ll_try) && ll_try >= ll - 1e-12 * (1.0 + std::abs(ll))) {
                moved = (a_try - a).squaredNorm() > 0.0;
                a = a_try;
                break;
            }
            scale *= 0.5;
        }
        if (!capped)
            capped = update_theta(data, data.mean(a), theta, 4);
        if (!moved && std::abs(theta_score(data.y, data.mean(a), theta)) <
                          1e-12 * (1.0 + std::abs(ll)))
            break;
    }

    const Eigen::VectorXd mu = data.mean(a);
    fit.loglik = nb_loglik_mu(data.y, mu, theta);
    fit.iterations = outer + 1;
    fit.theta = theta;
    fit.theta_capped = capped;
    fit.beta = {a[0] - static_cast<double>(breakpoint) * a[1], a[1], a[2], a[3]};

    const auto score = raw_score(data, a, theta);
    fit.score_norm = scaled_score_norm(score, fit.loglik, !capped);
    fit.converged = deviance_settled && fit.score_norm < 1e-6;

    // Coefficient covariance from the observed information, mapped to the
    // raw-year parameterisation through the (exact) centering Jacobian.
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i)
        w[i] = theta * mu[i] * (theta + data.y[i]) / ((theta + mu[i]) * (theta + mu[i]));
    const Eigen::Matrix4d info = data.X.transpose() * w.asDiagonal() * data.X;
    Eigen::Matrix4d cov_centered = info.inverse();
    Eigen::Matrix4d jac = Eigen::Matrix4d::Identity();
    jac(0, 1) = -static_cast<double>(breakpoint);
    const Eigen::Matrix4d cov = jac * cov_centered * jac.transpose();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            fit.cov[r][c] = cov(r, c);
    for (int j = 0; j < 4; ++j) {
        fit.se[j] = cov(j, j) > 0.0 ? std::sqrt(cov(j, j)) : 0.0;
        fit.p_values[j] = wald_p((*fit.beta)[j], fit.se[j]);
    }
    return fit;
}

} // namespace

std::string to_string(BreakKind kind) {
    switch (kind) {
    case BreakKind::none:
        return "none";
    case BreakKind::continuous:
        return "continuous";
    default:
        return "discontinuous";
    }
}

GaussianFit ols_fit(const std::vector<double> &y, const std::vector<int> &years,
                    const DesignSpec &design) {
    const int n = static_cast<int>(y.size());
    const int k = design.coefficient_count();
    if (years.size() != y.size())
        throw InvalidArgument("series and years must have equal length");
    if (n <= k)
        throw InvalidArgument("need more observations than coefficients");

    long sum_years = 0;
    for (int t : years)
        sum_years += t;
    const int center = static_cast<int>(sum_years / n);

    const Eigen::MatrixXd X = build_design(years, design, center);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k)
        throw RankDeficient("design matrix is rank deficient (kind " + to_string(design.kind) +
                            ", break " + std::to_string(design.epsilon) + ")");

    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    const Eigen::VectorXd a = qr.solve(yv);
    const double rss = (yv - X * a).squaredNorm();

    // Variance floor keeps the likelihood finite on exact fits so model
    // comparison degenerates to the parameter-count penalty alone.
    const double floor = 1e-18 * (1.0 + yv.squaredNorm() / n);
    const double sigma2 = std::max(rss / n, floor);

    GaussianFit fit;
    fit.design = design;
    fit.sigma2 = sigma2;
    fit.loglik = -0.5 * n * (std::log(2.0 * M_PI * sigma2)) - 0.5 * rss / sigma2;
    fit.bic = -2.0 * fit.loglik + (k + 1) * std::log(static_cast<double>(n));
    fit.beta.resize(k);
    for (int j = 0; j < k; ++j)
        fit.beta[j] = a[j];
    fit.beta[0] = a[0] - static_cast<double>(center) * a[1];
    return fit;
}

double nb_loglik(const std::array<double, 4> &beta, double theta,
                 const std::vector<std::int64_t> &counts, const std::vector<double> &exposures,
                 const std::vector<int> &years, int breakpoint) {
    const int n = static_cast<int>(counts.size());
    if (exposures.size() != counts.size() || years.size() != counts.size())
        throw InvalidArgument("counts, exposures and years must have equal length");
    if (!(theta > 0.0))
        throw InvalidArgument("theta must be positive");
    Eigen::VectorXd y(n), mu(n);
    for (int i = 0; i < n; ++i) {
        y[i] = static_cast<double>(counts[i]);
        const int t = years[i];
        double eta = beta[0] + beta[1] * t;
        if (t >= breakpoint)
            eta += beta[2] * (t - breakpoint) + beta[3];
        mu[i] = std::exp(clamp_eta(eta + std::log(exposures[i])));
    }
    return nb_loglik_mu(y, mu, theta);
}

std::array<double, 5> nb_score(const std::array<double, 4> &beta, double theta,
                               const std::vector<std::int64_t> &counts,
                               const std::vector<double> &exposures,
                               const std::vector<int> &years, int breakpoint) {
    const int n = static_cast<int>(counts.size());
    if (exposures.size() != counts.size() || years.size() != counts.size())
        throw InvalidArgument("counts, exposures and years must have equal length");
    std::array<double, 5> score{};
    Eigen::VectorXd y(n), mu(n);
    for (int i = 0; i < n; ++i) {
        y[i] = static_cast<double>(counts[i]);
        const int t = years[i];
        double eta = beta[0] + beta[1] * t;
        if (t >= breakpoint)
            eta += beta[2] * (t - breakpoint) + beta[3];
        mu[i] = std::exp(clamp_eta(eta + std::log(exposures[i])));
        const double r = theta * (y[i] - mu[i]) / (theta + mu[i]);
        score[0] += r;
        score[1] += r * t;
        if (t >= breakpoint) {
            score[2] += r * (t - breakpoint);
            score[3] += r;
        }
    }
    score[4] = theta_score(y, mu, theta);
    return score;
}

CellFit nb_glm_fit(const std::vector<std::int64_t> &counts, const std::vector<double> &exposures,
                   const std::vector<int> &years, int breakpoint) {
    if (counts.size() != 18)
        throw InvalidArgument("expected the 18-year study window, got " +
                              std::to_string(counts.size()) + " observations");

    double total = 0.0;
    for (std::int64_t c : counts) {
        if (c < 0)
            throw InvalidArgument("negative count");
        total += static_cast<double>(c);
    }
    if (total / static_cast<double>(counts.size()) < 1.0) {
        CellFit fit;
        fit.zeroed = true;
        fit.converged = true;
        fit.breakpoint = breakpoint;
        return fit;
    }
    return fit_series_impl(counts, exposures, years, breakpoint);
}

CellFit nb_fit_series(const std::vector<std::int64_t> &counts,
                      const std::vector<double> &exposures, const std::vector<int> &years,
                      int breakpoint) {
    return fit_series_impl(counts, exposures, years, breakpoint);
}

double dispersion_ratio(double mu, double theta) {
    if (!(theta > 0.0))
        throw InvalidArgument("theta must be positive");
    if (mu < 0.0)
        throw InvalidArgument("mu must be non-negative");
    return 1.0 + mu / theta;
}

} // namespace mortscen
