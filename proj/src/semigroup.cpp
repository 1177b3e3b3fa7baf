#include "schrolab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "schrolab/error.hpp"
#include "schrolab/functionals.hpp"
#include "schrolab/io.hpp"

namespace schrolab {

double log_sum_exp(std::span<const double> values) {
    double peak = -HUGE_VAL;
    for (double v : values) peak = std::max(peak, v);
    if (peak == -HUGE_VAL) return -HUGE_VAL;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - peak);
    return peak + std::log(sum);
}

namespace {

// out[i] = lse_j(table[i * n + j] + x[j]) for i < n.
void lse_matvec(const std::vector<double>& table, std::size_t n, std::span<const double> x, std::span<double> out,
                std::vector<double>& scratch) {
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = table.data() + i * n;
        double peak = -HUGE_VAL;
        for (std::size_t j = 0; j < n; ++j) {
            scratch[j] = row[j] + x[j];
            peak = std::max(peak, scratch[j]);
        }
        if (peak == -HUGE_VAL) {
            out[i] = -HUGE_VAL;
            continue;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += std::exp(scratch[j] - peak);
        out[i] = peak + std::log(sum);
    }
}

void linear_matvec(const std::vector<double>& log_table, std::size_t n, std::span<const double> x,
                   std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = log_table.data() + i * n;
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += std::exp(row[j]) * x[j];
        out[i] = sum;
    }
}

// Standard deviation of the one-step transition along an axis.
double kernel_width(const Generator& gen, double t) {
    if (gen.kind() == Generator::Kind::Laplacian) return std::sqrt(2.0 * t);
    return std::sqrt(-std::expm1(-2.0 * t));
}

}  // namespace

KernelMatrix::KernelMatrix(const Generator& gen, double t, const Grid& grid)
    : generator_(gen), grid_(grid), time_(t), n_(static_cast<std::size_t>(grid.points())) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("kernel horizon must be positive", t);
    if (gen.dimension() != grid.dimension())
        throw DomainError("generator dimension does not match the grid", grid.dimension());
    under_resolved_ = kernel_width(gen, t) < 2.0 * grid.spacing();

    log_p_axis_.resize(n_ * n_);
    log_m_axis_.resize(n_);
    log_pm_axis_.resize(n_ * n_);
    const double h = grid.spacing();
    if (gen.kind() == Generator::Kind::Laplacian) {
        const double log_norm = -0.5 * std::log(4.0 * std::numbers::pi * t);
        for (std::size_t i = 0; i < n_; ++i) {
            const double x = grid.axis_coord(static_cast<int>(i));
            for (std::size_t j = 0; j < n_; ++j) {
                const double d = x - grid.axis_coord(static_cast<int>(j));
                log_p_axis_[i * n_ + j] = log_norm - d * d / (4.0 * t);
            }
            log_m_axis_[i] = std::log(h);
        }
    } else {
        // Mehler kernel against N(0,1): a = e^{-t}, b = 1 - a^2.
        const double a = std::exp(-t);
        const double a2 = std::exp(-2.0 * t);
        const double b = -std::expm1(-2.0 * t);
        const double log_norm = -0.5 * std::log(b);
        for (std::size_t i = 0; i < n_; ++i) {
            const double x = grid.axis_coord(static_cast<int>(i));
            for (std::size_t j = 0; j < n_; ++j) {
                const double y = grid.axis_coord(static_cast<int>(j));
                log_p_axis_[i * n_ + j] = log_norm - (a2 * (x * x + y * y) - 2.0 * a * (x * y)) / (2.0 * b);
            }
            log_m_axis_[i] = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * x * x + std::log(h);
        }
    }
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) log_pm_axis_[i * n_ + j] = log_p_axis_[i * n_ + j] + log_m_axis_[j];
}

double KernelMatrix::log_entry(std::size_t i, std::size_t j) const noexcept {
    const auto a = grid_.unflatten(i);
    const auto b = grid_.unflatten(j);
    double value = axis_log_entry(a[0], b[0]);
    if (grid_.dimension() == 2) value += axis_log_entry(a[1], b[1]);
    return value;
}

double KernelMatrix::log_reference_weight(std::size_t j) const noexcept {
    const auto b = grid_.unflatten(j);
    double value = log_m_axis_[b[0]];
    if (grid_.dimension() == 2) value += log_m_axis_[b[1]];
    return value;
}

double KernelMatrix::row_mass_defect(std::size_t i) const {
    const auto a = grid_.unflatten(i);
    double mass = 1.0;
    for (int axis = 0; axis < grid_.dimension(); ++axis) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += std::exp(log_pm_axis_[a[axis] * n_ + j]);
        mass *= s;
    }
    return std::abs(1.0 - mass);
}

std::vector<double> KernelMatrix::apply_log(std::span<const double> log_phi) const {
    if (log_phi.size() != grid_.size()) throw DomainError("apply_log: vector size does not match the grid");
    std::vector<double> out(grid_.size());
    std::vector<double> scratch;
    if (grid_.dimension() == 1) {
        lse_matvec(log_pm_axis_, n_, log_phi, out, scratch);
        return out;
    }
    // Contract the second axis, then the first.
    std::vector<double> stage(grid_.size());
    std::vector<double> column(n_), result(n_);
    for (std::size_t j0 = 0; j0 < n_; ++j0)
        lse_matvec(log_pm_axis_, n_, log_phi.subspan(j0 * n_, n_), std::span(stage).subspan(j0 * n_, n_), scratch);
    for (std::size_t i1 = 0; i1 < n_; ++i1) {
        for (std::size_t j0 = 0; j0 < n_; ++j0) column[j0] = stage[j0 * n_ + i1];
        lse_matvec(log_pm_axis_, n_, column, result, scratch);
        for (std::size_t i0 = 0; i0 < n_; ++i0) out[i0 * n_ + i1] = result[i0];
    }
    return out;
}

std::vector<double> KernelMatrix::apply(std::span<const double> phi) const {
    if (phi.size() != grid_.size()) throw DomainError("apply: vector size does not match the grid");
    std::vector<double> out(grid_.size());
    if (grid_.dimension() == 1) {
        linear_matvec(log_pm_axis_, n_, phi, out);
        return out;
    }
    std::vector<double> stage(grid_.size());
    std::vector<double> column(n_), result(n_);
    for (std::size_t j0 = 0; j0 < n_; ++j0)
        linear_matvec(log_pm_axis_, n_, phi.subspan(j0 * n_, n_), std::span(stage).subspan(j0 * n_, n_));
    for (std::size_t i1 = 0; i1 < n_; ++i1) {
        for (std::size_t j0 = 0; j0 < n_; ++j0) column[j0] = stage[j0 * n_ + i1];
        linear_matvec(log_pm_axis_, n_, column, result);
        for (std::size_t i0 = 0; i0 < n_; ++i0) out[i0 * n_ + i1] = result[i0];
    }
    return out;
}

std::shared_ptr<const KernelMatrix> kernel_matrix(const Generator& gen, double t, const Grid& grid) {
    return std::make_shared<const KernelMatrix>(gen, t, grid);
}

namespace {

void require_finite(std::span<const double> values, bool allow_minus_inf) {
    for (double v : values) {
        if (std::isfinite(v)) continue;
        if (allow_minus_inf && v == -HUGE_VAL) continue;
        throw DomainError("semigroup input contains a non-finite entry", v);
    }
}

}  // namespace

std::vector<double> apply_Pt(const Generator& gen, double t, const Grid& grid, std::span<const double> phi) {
    if (t < 0.0) throw DomainError("semigroup time must be nonnegative", t);
    require_finite(phi, false);
    if (t == 0.0) return {phi.begin(), phi.end()};
    return KernelMatrix(gen, t, grid).apply(phi);
}

std::vector<double> apply_Pt_log(const Generator& gen, double t, const Grid& grid, std::span<const double> log_phi) {
    if (t < 0.0) throw DomainError("semigroup time must be nonnegative", t);
    require_finite(log_phi, true);
    if (t == 0.0) return {log_phi.begin(), log_phi.end()};
    return KernelMatrix(gen, t, grid).apply_log(log_phi);
}

std::vector<double> adjoint_weights(const KernelMatrix& kernel, const GridMeasure& mu) {
    if (!(kernel.grid() == mu.grid())) throw DomainError("adjoint: measure and kernel live on different grids");
    const std::size_t size = mu.grid().size();
    std::vector<double> log_ratio(size);
    for (std::size_t i = 0; i < size; ++i)
        log_ratio[i] = mu.weight(i) > 0.0 ? std::log(mu.weight(i)) - kernel.log_reference_weight(i) : -HUGE_VAL;
    auto out = kernel.apply_log(log_ratio);
    for (std::size_t j = 0; j < size; ++j) out[j] = std::exp(out[j] + kernel.log_reference_weight(j));
    return out;
}

AdjointResult apply_Pt_star(const KernelMatrix& kernel, const GridMeasure& mu) {
    auto weights = adjoint_weights(kernel, mu);
    double mass = 0.0;
    for (double w : weights) mass += w;
    const double defect = std::abs(1.0 - mass);
    if (defect > kMaxMassDefect)
        throw NumericalError("P_t* lost mass " + io::format_double(defect) + " through the grid boundary");
    return {GridMeasure(mu.grid(), std::move(weights)), defect};
}

AdjointResult apply_Pt_star(const Generator& gen, double t, const GridMeasure& mu) {
    if (t < 0.0) throw DomainError("semigroup time must be nonnegative", t);
    if (t == 0.0) return {mu, 0.0};
    return apply_Pt_star(KernelMatrix(gen, t, mu.grid()), mu);
}

MeasureCurve heat_flow_curve(const Generator& gen, const GridMeasure& mu0, const std::vector<double>& times) {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0.0) throw DomainError("heat flow times must be nonnegative", times[k]);
        if (k > 0 && !(times[k] > times[k - 1])) throw DomainError("heat flow times must increase");
    }
    const ReferenceMeasure reference = gen.reference(mu0.grid());
    auto evaluator = [gen, mu0, reference](double t) -> CurvePoint {
        GridMeasure mu = apply_Pt_star(gen, t, mu0).measure;
        VelocityField v = score(mu, reference);
        VelocityField velocity(mu.grid());
        for (std::size_t i = 0; i < mu.grid().size(); ++i)
            for (int a = 0; a < mu.grid().dimension(); ++a) velocity.at(i, a) = -v.at(i, a);
        return {t, std::move(mu), std::move(velocity)};
    };
    return MeasureCurve(CurveKind::HeatFlow, evaluator, times);
}

void write_kernel_csv(const std::filesystem::path& path, const KernelMatrix& kernel) {
    const Grid& grid = kernel.grid();
    std::string out = "t,N,L\n";
    out += io::csv_row(std::vector<double>{kernel.time(), static_cast<double>(grid.points()), grid.half_width()});
    const std::size_t n = static_cast<std::size_t>(grid.points());
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            row[j] = std::exp(kernel.axis_log_entry(static_cast<int>(i), static_cast<int>(j)));
        out += io::csv_row(row);
    }
    io::write_file_atomic(path, out);
}

}  // namespace schrolab
