#pragma once

#include <filesystem>

#include "mortscen/scenarios.hpp"

namespace mortscen {

/// Write the per-cell fit grid as JSON (full double precision): one record
/// per (age_group, cause) with beta, theta, se, p_values, cov, loglik and
/// the zeroed / converged / theta_capped flags.
void write_fits(const FitSurface &surface, const std::filesystem::path &path);

/// Read a fit grid back. The file must cover all age x cause cells; a
/// non-zeroed record missing any coefficient or the dispersion is rejected
/// (SchemaError), never imputed. write_fits -> read_fits round-trips exactly.
FitSurface read_fits(const std::filesystem::path &path);

} // namespace mortscen
