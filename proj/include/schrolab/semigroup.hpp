#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "schrolab/curve.hpp"
#include "schrolab/generator.hpp"
#include "schrolab/grid.hpp"

namespace schrolab {

/// Transition kernel p_t(x_i, y_j) of a generator on a grid, stored in log
/// form as a density against the reference measure m.
///
/// The 2D Laplacian kernel factorizes over the axes, so only the per-axis
/// N x N factor is stored and applications contract one axis at a time.
/// Entries are symmetric bit-for-bit.
class KernelMatrix {
public:
    KernelMatrix(const Generator& gen, double t, const Grid& grid);

    const Generator& generator() const noexcept { return generator_; }
    const Grid& grid() const noexcept { return grid_; }
    double time() const noexcept { return time_; }
    /// Set when the kernel's standard deviation is below two grid steps.
    bool under_resolved() const noexcept { return under_resolved_; }

    /// log p_t(x_i, y_j) against m.
    double log_entry(std::size_t i, std::size_t j) const noexcept;
    /// log of the per-axis kernel factor (the full kernel in 1D).
    double axis_log_entry(int i, int j) const noexcept { return log_p_axis_[static_cast<std::size_t>(i) * n_ + j]; }
    /// log m_j, the reference node weight.
    double log_reference_weight(std::size_t j) const noexcept;
    /// |1 - sum_j p_t(x_i, y_j) m_j|.
    double row_mass_defect(std::size_t i) const;

    /// log (P_t e^phi)(x_i) = log sum_j p_t(x_i, y_j) m_j exp(phi_j), by
    /// log-sum-exp with per-row max subtraction. -inf entries are allowed.
    std::vector<double> apply_log(std::span<const double> log_phi) const;
    /// (P_t phi)(x_i) = sum_j p_t(x_i, y_j) m_j phi_j for signed phi.
    std::vector<double> apply(std::span<const double> phi) const;

private:
    Generator generator_;
    Grid grid_;
    double time_;
    bool under_resolved_;
    std::size_t n_;
    std::vector<double> log_p_axis_;   // n x n, symmetric
    std::vector<double> log_m_axis_;   // n
    std::vector<double> log_pm_axis_;  // log_p_axis_(i, j) + log_m_axis_(j)
};

/// Builds the kernel; throws DomainError for t <= 0.
std::shared_ptr<const KernelMatrix> kernel_matrix(const Generator& gen, double t, const Grid& grid);

/// P_t phi for per-node scalars; t = 0 is the identity.
std::vector<double> apply_Pt(const Generator& gen, double t, const Grid& grid, std::span<const double> phi);
/// log P_t exp(log_phi); t = 0 is the identity.
std::vector<double> apply_Pt_log(const Generator& gen, double t, const Grid& grid, std::span<const double> log_phi);

/// Unnormalized weights of P_t* mu: w_j = m_j (P_t (dmu/dm))_j. Duality
/// <P_t f, mu> = <f, P_t* mu> holds for these weights exactly.
std::vector<double> adjoint_weights(const KernelMatrix& kernel, const GridMeasure& mu);

struct AdjointResult {
    GridMeasure measure;
    /// |1 - mass| before renormalization: the mass that left the grid.
    double defect;
};

/// Largest tolerated mass defect for P_t* and interpolations.
inline constexpr double kMaxMassDefect = 1e-6;

/// P_t* mu renormalized to a probability; throws NumericalError when the
/// defect exceeds kMaxMassDefect.
AdjointResult apply_Pt_star(const KernelMatrix& kernel, const GridMeasure& mu);
AdjointResult apply_Pt_star(const Generator& gen, double t, const GridMeasure& mu);

/// Heat flow t -> P_t* mu0 with gradient-flow velocity -grad log(dmu_t/dm).
MeasureCurve heat_flow_curve(const Generator& gen, const GridMeasure& mu0, const std::vector<double>& times);

/// Debug dump: header `t,N,L`, one line with those values, then the N x N
/// (1D) or per-axis factor (2D) of p_t in row-major order.
void write_kernel_csv(const std::filesystem::path& path, const KernelMatrix& kernel);

/// log(sum exp(values)) with max subtraction; -inf for an empty or all -inf
/// input.
double log_sum_exp(std::span<const double> values);

}  // namespace schrolab
