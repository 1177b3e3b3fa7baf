#pragma once

#include <span>
#include <vector>

#include "schrolab/generator.hpp"
#include "schrolab/grid.hpp"

namespace schrolab {

/// H(p | r) = sum_i w_i log(density_p / density_r) with 0 log 0 = 0.
/// Returns +inf when p charges a node where r vanishes. Can be negative
/// against Lebesgue.
double relative_entropy(const GridMeasure& p, const ReferenceMeasure& r);

/// Entropy functional F(mu) = H(mu | m) for the generator's reference m.
double entropy_F(const GridMeasure& mu, const Generator& gen);

/// Gradient of a scalar field restricted to `support`: central differences
/// where both axis neighbours are in the support, one-sided where only one
/// is, zero elsewhere. Values outside the support are never read.
VelocityField support_gradient(std::span<const double> values, const std::vector<bool>& support, const Grid& grid);

/// Fisher information ||grad log(dmu/dm)||^2 in L^2(mu). Throws DomainError
/// when the effective support spans fewer than 3 nodes along some axis.
double fisher_info(const GridMeasure& mu, const ReferenceMeasure& m);

/// The score grad log(dmu/dm) on mu's effective support (zero elsewhere).
VelocityField score(const GridMeasure& mu, const ReferenceMeasure& m);

/// Quantile function of the histogram measure (each node's mass spread
/// uniformly over its cell), evaluated at increasing levels in (0, 1).
std::vector<double> histogram_quantiles(const GridMeasure& mu, std::span<const double> levels);

/// Default number of quantile levels used by wasserstein_1d.
inline constexpr int kQuantileLevels = 16384;

/// W2 in 1D through the quantile coupling, midpoint rule on `levels` points.
double wasserstein_1d(const GridMeasure& mu, const GridMeasure& nu, int levels = kQuantileLevels);

double second_moment(const GridMeasure& mu);

/// Mass carried by the two outermost nodes along each axis.
double boundary_mass(const GridMeasure& mu);

/// Finite entropy, finite second moment and boundary mass below 1e-8.
bool admissible(const GridMeasure& mu, const Generator& gen);

inline constexpr double kAdmissibleBoundaryMass = 1e-8;

}  // namespace schrolab
