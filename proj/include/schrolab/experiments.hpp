#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "schrolab/curve.hpp"
#include "schrolab/interpolation.hpp"
#include "schrolab/schroedinger.hpp"

namespace schrolab {

// ------------------------------------------------------------ truncation

struct Truncation {
    GridMeasure measure;
    /// Renormalization constant 1 / mu(B(0, R)).
    double alpha;
};

/// Keeps the nodes with |x_i| <= R and renormalizes. Throws DomainError when
/// the ball carries less than kMinTruncationMass of mu.
Truncation truncate_renormalize(const GridMeasure& mu, double radius);

inline constexpr double kMinTruncationMass = 1e-3;

// ------------------------------------------------------------ continuity

struct ContinuityRecord {
    double radius;  ///< +inf for the untruncated reference row
    bool converged;
    std::string failure;  ///< solver message when !converged
    double cost;          ///< C_T(mu_R, nu_R)
    double gap;           ///< |C(mu_R, nu_R) - C(mu, nu)|
    double fisher_mu;
    double fisher_nu;
    double entropy_mu;
    double entropy_nu;
    double w2_mu;  ///< W2(mu_R, mu) in 1D, NaN in 2D
    double w2_nu;
    double alpha_mu;
    double alpha_nu;
};

struct ContinuitySweep {
    std::vector<ContinuityRecord> records;  ///< input order
    ContinuityRecord reference;
    /// Gaps nonincreasing over the radii within the slack.
    bool monotone;
    /// Final gap below the threshold.
    bool final_gap_ok;
    /// Fisher and entropy columns within the reference values + 50%.
    bool bounded;
};

struct ContinuityOptions {
    double horizon = 1.0;
    int samples = kDefaultPathSamples;
    double monotone_slack = 1e-4;
    double final_gap = 1e-3;
    double bound_fraction = 0.5;
};

ContinuitySweep continuity_sweep(const GridMeasure& mu, const GridMeasure& nu, const Generator& gen,
                                 const std::vector<double>& radii, const ContinuityOptions& copts = {},
                                 const SolverOptions& opts = {});

// ------------------------------------------------------------ derivative

struct DerivativeRecord {
    double t;
    double h_fd;
    double sch;
    double cost;
    /// <mu', grad log f> + <nu', grad log g>
    double analytic_static;
    /// 2 (<nu', v_T> - <mu', v_0>)
    double analytic_dynamic;
    double fd_sch;
    double fd_cost;
    double rel_err_static;
    double rel_err_dynamic;
};

struct DerivativeOptions {
    double h_fd = 1e-3;
    int samples = kDefaultPathSamples;
    /// Replace each central difference D(h) by (4 D(h/2) - D(h)) / 3.
    bool richardson = false;
};

/// Compares the analytic t-derivatives of Sch and C along a pair of curves
/// with central finite differences. Solver failures are rethrown with the
/// offending time in the message.
DerivativeRecord derivative_check(const MeasureCurve& curve_mu, const MeasureCurve& curve_nu, const Generator& gen,
                                  double horizon, double t, const DerivativeOptions& dopts = {},
                                  const SolverOptions& opts = {});

/// |a - fd| / |fd|, or |a - fd| when |fd| < 1e-12.
double relative_error(double analytic, double finite_difference);

// ----------------------------------------------------------- contraction

struct ContractionRow {
    double t;
    double cost;        ///< C(P_t* mu, P_t* nu)
    double correction;  ///< int_0^t (F(P_u* mu) - F(P_u* nu))^2 du
    double bound;       ///< C(mu, nu) - correction
    bool holds;         ///< cost <= bound + slack |bound|
};

struct ContractionReport {
    double cost0;
    std::vector<ContractionRow> rows;
    bool all_hold;
};

struct ContractionOptions {
    double horizon = 1.0;
    int samples = kDefaultPathSamples;
    double relative_slack = 0.01;
    /// Trapezoid intervals for the entropy-gap integral on [0, t].
    int correction_intervals = 64;
};

/// 1D Laplacian only.
ContractionReport contraction_check(const GridMeasure& mu, const GridMeasure& nu, const std::vector<double>& times,
                                    const ContractionOptions& copts = {}, const SolverOptions& opts = {});

// ------------------------------------------------------------- Talagrand

enum class TalagrandBranch {
    PositiveCurvature,  ///< CD(rho, inf), rho > 0: OU generator
    ZeroCurvature,      ///< CD(0, n): Laplacian, T >= 1
};

std::string to_string(TalagrandBranch branch);

struct TalagrandRow {
    double horizon;
    double cost;   ///< C_T(mu, nu)
    double bound;  ///< right-hand side of the branch's inequality
    double slack;  ///< bound - cost
    bool holds;
};

struct TalagrandReport {
    TalagrandBranch branch;
    std::vector<TalagrandRow> rows;
    bool all_hold;
};

/// Points of the interior scan for the infimum over t in the positive
/// curvature bound.
inline constexpr int kTalagrandScanPoints = 200;
/// Slack tolerated below zero, for bounds that are exactly tight.
inline constexpr double kTalagrandTightness = 1e-12;

TalagrandReport talagrand_check(const GridMeasure& mu, const GridMeasure& nu, const Generator& gen,
                                TalagrandBranch branch, const std::vector<double>& horizons,
                                int samples = kDefaultPathSamples, const SolverOptions& opts = {});

// -------------------------------------------------------- Gaussian oracle

namespace oracle {

struct Entropy {
    double mean;
    double variance;
};
struct Fisher {
    double mean;
    double variance;
};
struct HeatVariance {
    double variance;
    double t;
};
struct W2 {
    double mean1;
    double variance1;
    double mean2;
    double variance2;
};

}  // namespace oracle

using GaussianQuery = std::variant<oracle::Entropy, oracle::Fisher, oracle::HeatVariance, oracle::W2>;

/// Closed forms for 1D Gaussians: entropy against Lebesgue, Fisher
/// information against Lebesgue, variance under the heat flow of the
/// Laplacian, and W2. Throws DomainError for a nonpositive variance.
double gaussian_oracle(const GaussianQuery& query);

// ---------------------------------------------------------- Monge-Ampere

struct MongeAmpereReport {
    double t;
    double s;
    double lhs;  ///< H(mu_s | Leb)
    double rhs;  ///< H(mu_t | Leb) - int log|T'| dmu_t
    double gap;
    /// mu_t-mass of the nodes left out of the Jacobian term.
    double excluded_mass;
};

/// Jacobian identity for the flow map T_{t->s} of a 1D curve against
/// Lebesgue. Nodes whose trajectories leave the grid, or whose neighbours'
/// do, are excluded and their mass reported.
MongeAmpereReport monge_ampere_check(const MeasureCurve& curve, double t, double s);

}  // namespace schrolab
