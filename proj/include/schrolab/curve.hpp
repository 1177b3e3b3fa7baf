#pragma once

#include <functional>
#include <string>
#include <vector>

#include "schrolab/grid.hpp"

namespace schrolab {

enum class CurveKind { HeatFlow, Translation, Dilation, Custom };

std::string to_string(CurveKind kind);

/// One time slice of a measure-valued curve and its velocity field.
struct CurvePoint {
    double time;
    GridMeasure measure;
    VelocityField velocity;
};

/// Time-indexed family of grid measures with explicit velocity fields.
///
/// A curve either carries an evaluator (the closed-form families and heat
/// flows can be evaluated at any time) or only a list of samples, in which
/// case intermediate times are interpolated linearly.
class MeasureCurve {
public:
    using Evaluator = std::function<CurvePoint(double)>;

    /// Evaluates the curve eagerly at `sample_times` (increasing).
    MeasureCurve(CurveKind kind, Evaluator evaluator, const std::vector<double>& sample_times);
    /// Sample-only curve; samples must be sorted by time.
    MeasureCurve(CurveKind kind, std::vector<CurvePoint> samples);

    CurveKind kind() const noexcept { return kind_; }
    const Grid& grid() const noexcept { return samples_.front().measure.grid(); }
    const std::vector<CurvePoint>& samples() const noexcept { return samples_; }
    bool has_evaluator() const noexcept { return static_cast<bool>(evaluator_); }
    double start_time() const noexcept;
    double end_time() const noexcept;

    CurvePoint at(double t) const;
    VelocityField velocity_at(double t) const;

private:
    CurveKind kind_;
    Evaluator evaluator_;
    std::vector<CurvePoint> samples_;
};

/// N(mean + t * speed, variance): velocity is the constant `speed`.
MeasureCurve translation_curve(const Grid& grid, const GaussianSpec& base, std::array<double, 2> speed,
                               const std::vector<double>& times);

/// N(mean, variance * exp(2 rate t)): velocity x -> rate * (x - mean).
MeasureCurve dilation_curve(const Grid& grid, const GaussianSpec& base, double rate, const std::vector<double>& times);

/// Constant curve t -> mu with zero velocity.
MeasureCurve constant_curve(const GridMeasure& mu, const std::vector<double>& times);

/// Weak-form continuity-equation defect against a test function phi:
/// |d/dt int phi dmu_t - int <grad phi, v_t> dmu_t| with the time derivative
/// by a central difference of step dt. Requires an evaluator.
double continuity_equation_residual(const MeasureCurve& curve, double t, double dt,
                                    const std::function<double(const std::array<double, 2>&)>& phi,
                                    const std::function<std::array<double, 2>(const std::array<double, 2>&)>& grad_phi);

}  // namespace schrolab
