#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "schrolab/generator.hpp"
#include "schrolab/grid.hpp"
#include "schrolab/semigroup.hpp"

namespace schrolab {

struct SolverOptions {
    /// Stop when the L1 marginal residual on weights falls below this.
    double tol = 1e-10;
    int max_iter = 100000;
};

struct SolverDiagnostics {
    int iterations = 0;
    /// Final L1 residuals of the two marginal constraints.
    double residual_mu = 0.0;
    double residual_nu = 0.0;
    /// Constant c moved from log f to log g to equalize log int f dm and log int g dm.
    double gauge_shift = 0.0;
    bool kernel_under_resolved = false;
    /// Marginal residual after every full sweep.
    std::vector<double> residual_trace;
};

/// Solution (f, g) of the Schroedinger system
///     dmu/dm = f P_T g,   dnu/dm = g P_T f
/// kept in log form end to end. The plan is gamma = f (x) g R_T with
/// dR_T = p_T(x, y) dm(x) dm(y).
struct SchroedingerPotentials {
    std::vector<double> log_f;
    std::vector<double> log_g;
    Generator generator;
    double horizon;
    GridMeasure mu;
    GridMeasure nu;
    SolverDiagnostics diagnostics;
    std::shared_ptr<const KernelMatrix> kernel;

    const Grid& grid() const noexcept { return mu.grid(); }
    /// Same potentials with (log f + c, log g - c); plan and cost are unchanged.
    SchroedingerPotentials gauge_shifted(double c) const;
};

/// Log-domain iterative proportional fitting started from log g = 0.
///
/// Throws DomainError when the marginals live on different grids or are not
/// admissible, and SolverError (carrying the residual trace) when the
/// residual does not reach `opts.tol` within `opts.max_iter` sweeps or stalls.
SchroedingerPotentials solve_schroedinger_system(const GridMeasure& mu, const GridMeasure& nu, const Generator& gen,
                                                 double horizon, const SolverOptions& opts = {});

/// Same, reusing a kernel already built for (gen, horizon, grid).
SchroedingerPotentials solve_schroedinger_system(const GridMeasure& mu, const GridMeasure& nu,
                                                 std::shared_ptr<const KernelMatrix> kernel,
                                                 const SolverOptions& opts = {});

/// H(gamma | R_T) = sum_i mu_i log f_i + sum_j nu_j log g_j.
double schroedinger_cost(const SchroedingerPotentials& pot);

/// Refuses to materialize plans with more node pairs than this.
inline constexpr double kMaxPlanPairs = 1e8;

/// The entropic plan materialized as node-pair weights (row index = first
/// marginal).
class EntropicPlan {
public:
    explicit EntropicPlan(const SchroedingerPotentials& pot);

    std::size_t nodes() const noexcept { return nodes_; }
    double weight(std::size_t i, std::size_t j) const noexcept { return weights_[i * nodes_ + j]; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::vector<double> marginal0() const;
    std::vector<double> marginal1() const;
    double total_mass() const;

private:
    std::size_t nodes_;
    std::vector<double> weights_;
};

EntropicPlan plan_density(const SchroedingerPotentials& pot);

/// L1 distance between two weight vectors.
double l1_distance(std::span<const double> a, std::span<const double> b);

struct RestrictionReport {
    double radius;
    double mass_mu;  ///< mu(B(0, R))
    double mass_nu;  ///< nu(B(0, R))
    double plan_mass;  ///< gamma(B x B)
    /// L1 distance between the restricted, renormalized plan and the plan
    /// solved afresh for its marginals.
    double plan_l1;
    /// |H(gamma_R | R_T) - Sch(mu_R, nu_R)|.
    double cost_gap;
};

/// Checks that restricting the optimal plan to B(0,R)^2 and renormalizing
/// yields the optimal plan between its own marginals. Throws DomainError
/// when B(0,R) carries less than half of either marginal.
RestrictionReport restriction_check(const SchroedingerPotentials& pot, double radius, const SolverOptions& opts = {});

/// CSV `x,log_f,log_g` (`x,y,log_f,log_g` in 2D).
void write_potentials_csv(const std::filesystem::path& path, const SchroedingerPotentials& pot);
/// CSV `x,y,gamma` with plan weights; 1D only.
void write_plan_csv(const std::filesystem::path& path, const SchroedingerPotentials& pot);

}  // namespace schrolab
