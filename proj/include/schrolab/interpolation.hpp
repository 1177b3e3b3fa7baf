#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "schrolab/curve.hpp"
#include "schrolab/schroedinger.hpp"

namespace schrolab {

struct InterpolatedMeasure {
    GridMeasure measure;
    /// |1 - mass| of exp(log P_s f + log P_{T-s} g) m before renormalization.
    double defect;
};

/// mu_s = P_s f P_{T-s} g m, renormalized. Throws NumericalError when the
/// mass defect exceeds kMaxMassDefect.
InterpolatedMeasure interpolate(const SchroedingerPotentials& pot, double s);

/// v_s = grad(log P_{T-s} g - log P_s f) on the effective support of mu_s,
/// zero elsewhere.
VelocityField velocity(const SchroedingerPotentials& pot, double s);

struct PathSample {
    double s;
    GridMeasure measure;
    VelocityField velocity;
    double entropy;
    double fisher;
    double kinetic;  ///< ||v_s||^2 in L^2(mu_s)

    double integrand() const noexcept { return kinetic + fisher; }
};

/// Samples the entropic interpolation at s_k = T k / (samples - 1). The end
/// samples use the marginals themselves.
std::vector<PathSample> sample_path(const SchroedingerPotentials& pot, int samples);

inline constexpr int kDefaultPathSamples = 65;

/// Composite Simpson rule on equally spaced values (odd count >= 3).
double simpson(std::span<const double> values, double step);

struct DynamicCost {
    double value;
    /// Integral of the kinetic term alone.
    double kinetic;
    std::vector<PathSample> path;
};

/// C_T on the optimal path: Simpson integral of ||v_s||^2 + I(mu_s). The
/// sample count must be odd and at least 33.
DynamicCost dynamic_cost(const SchroedingerPotentials& pot, int samples = kDefaultPathSamples);

struct BbsReport {
    double sch;
    double c_dynamic;
    double entropy_mu;
    double entropy_nu;
    /// |Sch - C/4 - (F(mu) + F(nu))/2|
    double residual;
    /// Set when T != 1, where the identity is used beyond its unit-horizon form.
    bool horizon_extension;
    SolverDiagnostics diagnostics;
};

BbsReport bbs_report(const SchroedingerPotentials& pot, int samples = kDefaultPathSamples);
BbsReport bbs_residual(const GridMeasure& mu, const GridMeasure& nu, const Generator& gen, double horizon,
                       int samples = kDefaultPathSamples, const SolverOptions& opts = {});

struct EntropyProfileRow {
    double s;
    double entropy;
    double fisher;
    /// Central first and second differences of the entropy (0 at the ends).
    double d1;
    double d2;
    /// d2 >= (d1^2 + fisher^2)(1 - tolerance); always true at the ends.
    bool convex;
};

/// Entropy along the interpolation with the CD(0,1) convexity flag. 1D
/// Laplacian only.
std::vector<EntropyProfileRow> entropy_profile(const SchroedingerPotentials& pot, int samples = kDefaultPathSamples,
                                               double relative_tolerance = 0.05);

/// <grad F(mu_s), v_s> in L^2(mu_s): the chain-rule value of d/ds F(mu_s).
double entropy_slope(const SchroedingerPotentials& pot, double s);

/// CSV `s,entropy,fisher,kinetic,integrand`.
void write_path_csv(const std::filesystem::path& path, const std::vector<PathSample>& samples);

// Flow maps of measure curves (1D).

/// T_{t->s}(x0): RK4 integration of the curve's velocity, linearly
/// interpolated between nodes. Throws GridExitError when the trajectory
/// leaves the grid.
double flow_map(const MeasureCurve& curve, double t, double s, double x0);
std::vector<double> flow_map(const MeasureCurve& curve, double t, double s, std::span<const double> x0);

struct TrackedFlow {
    std::vector<double> positions;
    /// Points whose trajectory left the grid; their positions are frozen at
    /// the last in-grid value.
    std::vector<bool> exited;
};

/// Batch flow map that flags escaping trajectories instead of throwing.
TrackedFlow flow_map_tracked(const MeasureCurve& curve, double t, double s, std::span<const double> x0);

inline constexpr int kPushforwardLevels = 10000;

struct PushforwardReport {
    double t;
    double s;
    /// W2 between the transported quantiles of mu_t and mu_s.
    double w2;
};

PushforwardReport flow_pushforward_check(const MeasureCurve& curve, double t, double s,
                                         int levels = kPushforwardLevels);

}  // namespace schrolab
