#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mortscen {

enum class BreakKind { none, continuous, discontinuous };

std::string to_string(BreakKind kind);

/// Mean structure for a trend regression on calendar year t:
///   none:           b0 + b1 t
///   continuous:     b0 + b1 t + b2 (t - eps) 1{t >= eps}
///   discontinuous:  b0 + b1 t + (b2 (t - eps) + b3) 1{t >= eps}
struct DesignSpec {
    BreakKind kind = BreakKind::none;
    int epsilon = 2011; ///< break year; ignored for kind none

    int coefficient_count() const {
        switch (kind) {
        case BreakKind::none:
            return 2;
        case BreakKind::continuous:
            return 3;
        default:
            return 4;
        }
    }
};

/// Ordinary least squares fit of a trend design under Gaussian errors.
struct GaussianFit {
    DesignSpec design;
    std::vector<double> beta; ///< coefficients in the raw-year parameterisation
    double sigma2 = 0.0;      ///< maximum-likelihood variance (divisor n)
    double loglik = 0.0;
    double bic = 0.0;         ///< parameter count includes the variance
};

/// Fit y ~ design over the given years. Throws RankDeficient when the design
/// matrix does not have full column rank and InvalidArgument on size
/// mismatches or n <= parameter count.
GaussianFit ols_fit(const std::vector<double> &y, const std::vector<int> &years,
                    const DesignSpec &design);

/// One fitted mortality cell (age band x cause group).
///
/// Coefficients beta = (b0, b1, b2, b3) parameterise the log death rate
///   log m_t = b0 + b1 t + (b2 (t - breakpoint) + b3) 1{t >= breakpoint},
/// counts are negative binomial with mean exposure * m_t and dispersion
/// theta (variance mu + mu^2 / theta).
struct CellFit {
    bool zeroed = false;       ///< mean annual deaths < 1; no model fitted
    bool converged = false;
    bool theta_capped = false; ///< theta hit the upper cap (Poisson regime)
    int iterations = 0;
    int breakpoint = 2011;

    std::optional<std::array<double, 4>> beta;
    std::optional<double> theta;
    std::array<double, 4> se{};
    std::array<double, 4> p_values{};
    std::array<std::array<double, 4>, 4> cov{};
    double loglik = 0.0;

    /// Largest score component at the estimate, scaled by 1 + |loglik|.
    double score_norm = 0.0;
};

/// Upper cap applied to the dispersion estimate.
inline constexpr double kThetaCap = 1e7;

/// Negative binomial log-likelihood of one cell series under (beta, theta).
double nb_loglik(const std::array<double, 4> &beta, double theta,
                 const std::vector<std::int64_t> &counts, const std::vector<double> &exposures,
                 const std::vector<int> &years, int breakpoint = 2011);

/// Analytic score (gradient in b0..b3, theta) at (beta, theta).
std::array<double, 5> nb_score(const std::array<double, 4> &beta, double theta,
                               const std::vector<std::int64_t> &counts,
                               const std::vector<double> &exposures,
                               const std::vector<int> &years, int breakpoint = 2011);

/// Fit one cell over the 18-year study window (throws InvalidArgument unless
/// exactly 18 aligned observations are supplied). Applies the zeroing rule:
/// mean annual deaths < 1 leaves the cell unfitted.
CellFit nb_glm_fit(const std::vector<std::int64_t> &counts, const std::vector<double> &exposures,
                   const std::vector<int> &years, int breakpoint = 2011);

/// The same estimator without the series-length restriction or zeroing rule;
/// used for simulation checks at amplified sample sizes.
CellFit nb_fit_series(const std::vector<std::int64_t> &counts,
                      const std::vector<double> &exposures, const std::vector<int> &years,
                      int breakpoint = 2011);

/// Variance-to-mean ratio 1 + mu / theta implied by a fitted cell mean.
double dispersion_ratio(double mu, double theta);

} // namespace mortscen
