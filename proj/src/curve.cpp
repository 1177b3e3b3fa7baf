#include "schrolab/curve.hpp"

#include <algorithm>
#include <cmath>

#include "schrolab/error.hpp"

namespace schrolab {

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::HeatFlow: return "heat_flow";
        case CurveKind::Translation: return "translation";
        case CurveKind::Dilation: return "dilation";
        case CurveKind::Custom: return "custom";
    }
    return "custom";
}

MeasureCurve::MeasureCurve(CurveKind kind, Evaluator evaluator, const std::vector<double>& sample_times)
    : kind_(kind), evaluator_(std::move(evaluator)) {
    if (sample_times.empty()) throw DomainError("a curve needs at least one sample time");
    for (std::size_t k = 1; k < sample_times.size(); ++k)
        if (!(sample_times[k] > sample_times[k - 1])) throw DomainError("curve sample times must increase");
    samples_.reserve(sample_times.size());
    for (double t : sample_times) samples_.push_back(evaluator_(t));
}

MeasureCurve::MeasureCurve(CurveKind kind, std::vector<CurvePoint> samples) : kind_(kind), samples_(std::move(samples)) {
    if (samples_.empty()) throw DomainError("a curve needs at least one sample");
    for (std::size_t k = 1; k < samples_.size(); ++k)
        if (!(samples_[k].time > samples_[k - 1].time)) throw DomainError("curve sample times must increase");
}

double MeasureCurve::start_time() const noexcept { return samples_.front().time; }
double MeasureCurve::end_time() const noexcept { return samples_.back().time; }

CurvePoint MeasureCurve::at(double t) const {
    if (evaluator_) return evaluator_(t);
    if (t < start_time() || t > end_time()) throw DomainError("time outside the sampled curve", t);
    auto upper = std::lower_bound(samples_.begin(), samples_.end(), t,
                                  [](const CurvePoint& p, double value) { return p.time < value; });
    if (upper->time == t) return *upper;
    const CurvePoint& hi = *upper;
    const CurvePoint& lo = *(upper - 1);
    const double theta = (t - lo.time) / (hi.time - lo.time);
    std::vector<double> w(grid().size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - theta) * lo.measure.weight(i) + theta * hi.measure.weight(i);
    std::vector<double> v(lo.velocity.values().size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = (1.0 - theta) * lo.velocity.values()[i] + theta * hi.velocity.values()[i];
    return {t, GridMeasure(grid(), std::move(w)), VelocityField(grid(), std::move(v))};
}

VelocityField MeasureCurve::velocity_at(double t) const { return at(t).velocity; }

MeasureCurve translation_curve(const Grid& grid, const GaussianSpec& base, std::array<double, 2> speed,
                               const std::vector<double>& times) {
    auto evaluator = [grid, base, speed](double t) -> CurvePoint {
        GaussianSpec g = base;
        for (int a = 0; a < grid.dimension(); ++a) g.mean[a] += t * speed[a];
        VelocityField v(grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (int a = 0; a < grid.dimension(); ++a) v.at(i, a) = speed[a];
        return {t, make_grid_measure(g, grid), std::move(v)};
    };
    return MeasureCurve(CurveKind::Translation, evaluator, times);
}

MeasureCurve dilation_curve(const Grid& grid, const GaussianSpec& base, double rate, const std::vector<double>& times) {
    auto evaluator = [grid, base, rate](double t) -> CurvePoint {
        GaussianSpec g = base;
        for (int a = 0; a < grid.dimension(); ++a) g.variance[a] *= std::exp(2.0 * rate * t);
        VelocityField v(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto x = grid.coords(i);
            for (int a = 0; a < grid.dimension(); ++a) v.at(i, a) = rate * (x[a] - base.mean[a]);
        }
        return {t, make_grid_measure(g, grid), std::move(v)};
    };
    return MeasureCurve(CurveKind::Dilation, evaluator, times);
}

MeasureCurve constant_curve(const GridMeasure& mu, const std::vector<double>& times) {
    auto evaluator = [mu](double t) -> CurvePoint { return {t, mu, VelocityField(mu.grid())}; };
    return MeasureCurve(CurveKind::Custom, evaluator, times);
}

double continuity_equation_residual(const MeasureCurve& curve, double t, double dt,
                                    const std::function<double(const std::array<double, 2>&)>& phi,
                                    const std::function<std::array<double, 2>(const std::array<double, 2>&)>& grad_phi) {
    if (!curve.has_evaluator()) throw DomainError("continuity residual needs a curve evaluator");
    if (!(dt > 0.0)) throw DomainError("time step must be positive", dt);
    const Grid& grid = curve.grid();
    auto integrate = [&](const GridMeasure& mu) {
        double total = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) total += mu.weight(i) * phi(grid.coords(i));
        return total;
    };
    const double forward = integrate(curve.at(t + dt).measure);
    const double backward = integrate(curve.at(t - dt).measure);
    const CurvePoint here = curve.at(t);
    double transport = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto g = grad_phi(grid.coords(i));
        double dot = 0.0;
        for (int a = 0; a < grid.dimension(); ++a) dot += g[a] * here.velocity.at(i, a);
        transport += here.measure.weight(i) * dot;
    }
    return std::abs((forward - backward) / (2.0 * dt) - transport);
}

}  // namespace schrolab
