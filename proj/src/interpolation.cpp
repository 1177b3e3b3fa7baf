#include "schrolab/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "schrolab/error.hpp"
#include "schrolab/functionals.hpp"
#include "schrolab/io.hpp"

namespace schrolab {

namespace {

void check_time(const SchroedingerPotentials& pot, double s) {
    if (!(s >= 0.0 && s <= pot.horizon)) throw DomainError("interpolation time outside [0, T]", s);
}

std::shared_ptr<const KernelMatrix> kernel_at(const SchroedingerPotentials& pot, double t) {
    if (t == pot.horizon) return pot.kernel;
    return kernel_matrix(pot.generator, t, pot.grid());
}

// log P_t e^{log_phi}, with t = 0 the identity.
std::vector<double> propagate(const std::vector<double>& log_phi, const KernelMatrix* kernel) {
    if (kernel == nullptr) return log_phi;
    return kernel->apply_log(log_phi);
}

struct PathLogs {
    std::vector<double> log_pf;  // log P_s f
    std::vector<double> log_pg;  // log P_{T-s} g
};

// Kernels are passed in so sample_path can reuse them; null means time 0.
PathLogs path_logs(const SchroedingerPotentials& pot, const KernelMatrix* ks, const KernelMatrix* kts) {
    return {propagate(pot.log_f, ks), propagate(pot.log_g, kts)};
}

InterpolatedMeasure measure_from_logs(const SchroedingerPotentials& pot, const PathLogs& logs) {
    const std::size_t size = pot.grid().size();
    std::vector<double> w(size);
    double mass = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        const double e = logs.log_pf[i] + logs.log_pg[i];
        w[i] = e == -HUGE_VAL ? 0.0 : std::exp(e + pot.kernel->log_reference_weight(i));
        mass += w[i];
    }
    const double defect = std::abs(1.0 - mass);
    if (!(defect <= kMaxMassDefect))
        throw NumericalError("interpolation lost mass " + io::format_double(defect));
    return {GridMeasure(pot.grid(), std::move(w)), defect};
}

VelocityField velocity_from_logs(const GridMeasure& mu_s, const PathLogs& logs) {
    const std::size_t size = mu_s.grid().size();
    const auto support = mu_s.support();
    std::vector<double> phi(size, 0.0);
    for (std::size_t i = 0; i < size; ++i)
        if (support[i]) phi[i] = logs.log_pg[i] - logs.log_pf[i];
    return support_gradient(phi, support, mu_s.grid());
}

PathSample make_sample(const SchroedingerPotentials& pot, double s, const KernelMatrix* ks, const KernelMatrix* kts,
                       const GridMeasure* endpoint) {
    const PathLogs logs = path_logs(pot, ks, kts);
    GridMeasure mu_s = endpoint != nullptr ? *endpoint : measure_from_logs(pot, logs).measure;
    VelocityField v = velocity_from_logs(mu_s, logs);
    const ReferenceMeasure ref = pot.generator.reference(pot.grid());
    const double entropy = relative_entropy(mu_s, ref);
    const double fisher = fisher_info(mu_s, ref);
    const double kinetic = v.squared_norm(mu_s);
    return {s, std::move(mu_s), std::move(v), entropy, fisher, kinetic};
}

}  // namespace

InterpolatedMeasure interpolate(const SchroedingerPotentials& pot, double s) {
    check_time(pot, s);
    const auto ks = s > 0.0 ? kernel_at(pot, s) : nullptr;
    const auto kts = s < pot.horizon ? kernel_at(pot, pot.horizon - s) : nullptr;
    return measure_from_logs(pot, path_logs(pot, ks.get(), kts.get()));
}

VelocityField velocity(const SchroedingerPotentials& pot, double s) {
    check_time(pot, s);
    const auto ks = s > 0.0 ? kernel_at(pot, s) : nullptr;
    const auto kts = s < pot.horizon ? kernel_at(pot, pot.horizon - s) : nullptr;
    const PathLogs logs = path_logs(pot, ks.get(), kts.get());
    return velocity_from_logs(measure_from_logs(pot, logs).measure, logs);
}

std::vector<PathSample> sample_path(const SchroedingerPotentials& pot, int samples) {
    if (samples < 3) throw DomainError("a path needs at least 3 samples", samples);
    const int last = samples - 1;
    const double step = pot.horizon / last;
    // Kernel k serves P_{s_k} and, on the mirrored sample, P_{T - s_{last-k}}.
    std::vector<std::shared_ptr<const KernelMatrix>> kernels(samples);
    for (int k = 1; k <= last; ++k) kernels[k] = k == last ? pot.kernel : kernel_matrix(pot.generator, k * step, pot.grid());

    std::vector<PathSample> out;
    out.reserve(samples);
    for (int k = 0; k <= last; ++k) {
        const double s = k == last ? pot.horizon : k * step;
        const GridMeasure* endpoint = k == 0 ? &pot.mu : (k == last ? &pot.nu : nullptr);
        out.push_back(make_sample(pot, s, kernels[k].get(), kernels[last - k].get(), endpoint));
    }
    return out;
}

double simpson(std::span<const double> values, double step) {
    const std::size_t n = values.size();
    if (n < 3 || n % 2 == 0) throw DomainError("Simpson's rule needs an odd number (>= 3) of values", n);
    double total = values.front() + values.back();
    for (std::size_t k = 1; k + 1 < n; ++k) total += (k % 2 == 1 ? 4.0 : 2.0) * values[k];
    return total * step / 3.0;
}

DynamicCost dynamic_cost(const SchroedingerPotentials& pot, int samples) {
    if (samples < 33 || samples % 2 == 0) throw DomainError("dynamic cost needs an odd sample count >= 33", samples);
    auto path = sample_path(pot, samples);
    std::vector<double> integrand(path.size()), kinetic(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        integrand[k] = path[k].integrand();
        kinetic[k] = path[k].kinetic;
    }
    const double step = pot.horizon / (samples - 1);
    return {simpson(integrand, step), simpson(kinetic, step), std::move(path)};
}

BbsReport bbs_report(const SchroedingerPotentials& pot, int samples) {
    const double sch = schroedinger_cost(pot);
    const double c = dynamic_cost(pot, samples).value;
    const double f_mu = entropy_F(pot.mu, pot.generator);
    const double f_nu = entropy_F(pot.nu, pot.generator);
    return {sch,  c, f_mu, f_nu, std::abs(sch - c / 4.0 - 0.5 * (f_mu + f_nu)), pot.horizon != 1.0,
            pot.diagnostics};
}

BbsReport bbs_residual(const GridMeasure& mu, const GridMeasure& nu, const Generator& gen, double horizon,
                       int samples, const SolverOptions& opts) {
    return bbs_report(solve_schroedinger_system(mu, nu, gen, horizon, opts), samples);
}

std::vector<EntropyProfileRow> entropy_profile(const SchroedingerPotentials& pot, int samples,
                                               double relative_tolerance) {
    if (pot.grid().dimension() != 1) throw DomainError("entropy profiles are 1D only", pot.grid().dimension());
    // the flag tests CD(0, 1) convexity, which is the flat 1D case
    if (pot.generator.kind() != Generator::Kind::Laplacian)
        throw DomainError("entropy profiles need the Laplacian generator");
    const auto path = sample_path(pot, samples);
    const double step = pot.horizon / (samples - 1);
    std::vector<EntropyProfileRow> rows;
    rows.reserve(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        EntropyProfileRow row{path[k].s, path[k].entropy, path[k].fisher, 0.0, 0.0, true};
        if (k > 0 && k + 1 < path.size()) {
            const double lo = path[k - 1].entropy, mid = path[k].entropy, hi = path[k + 1].entropy;
            row.d1 = (hi - lo) / (2.0 * step);
            row.d2 = (hi - 2.0 * mid + lo) / (step * step);
            const double bound = row.d1 * row.d1 + row.fisher * row.fisher;
            row.convex = row.d2 >= bound * (1.0 - relative_tolerance);
        }
        rows.push_back(row);
    }
    return rows;
}

double entropy_slope(const SchroedingerPotentials& pot, double s) {
    check_time(pot, s);
    const auto ks = s > 0.0 ? kernel_at(pot, s) : nullptr;
    const auto kts = s < pot.horizon ? kernel_at(pot, pot.horizon - s) : nullptr;
    const PathLogs logs = path_logs(pot, ks.get(), kts.get());
    const GridMeasure mu_s = measure_from_logs(pot, logs).measure;
    const VelocityField v = velocity_from_logs(mu_s, logs);
    return score(mu_s, pot.generator.reference(pot.grid())).inner(v, mu_s);
}

void write_path_csv(const std::filesystem::path& path, const std::vector<PathSample>& samples) {
    std::string out = "s,entropy,fisher,kinetic,integrand\n";
    for (const auto& p : samples)
        out += io::csv_row(std::vector<double>{p.s, p.entropy, p.fisher, p.kinetic, p.integrand()});
    io::write_file_atomic(path, out);
}

// ------------------------------------------------------------ flow maps

namespace {

double interpolate_velocity(const VelocityField& v, const Grid& grid, double x) {
    const double pos = (x + grid.half_width()) / grid.spacing();
    const int i0 = std::clamp(static_cast<int>(std::floor(pos)), 0, grid.points() - 2);
    const double theta = pos - i0;
    return (1.0 - theta) * v.at(static_cast<std::size_t>(i0), 0) + theta * v.at(static_cast<std::size_t>(i0) + 1, 0);
}

}  // namespace

namespace {

// With `exited` set, escaping points are frozen and flagged; otherwise the
// first escape throws.
std::vector<double> integrate_flow(const MeasureCurve& curve, double t, double s, std::span<const double> x0,
                                   std::vector<bool>* exited) {
    const Grid& grid = curve.grid();
    if (grid.dimension() != 1) throw DomainError("flow maps are 1D only", grid.dimension());
    const double L = grid.half_width();
    for (double x : x0)
        if (!(std::abs(x) <= L)) throw DomainError("flow map start point outside the grid", x);
    std::vector<double> x(x0.begin(), x0.end());
    const std::size_t n = x.size();
    if (exited) exited->assign(n, false);
    if (s == t) return x;

    const CurvePoint start = curve.at(t);
    double vmax = 0.0;
    const auto support = start.measure.support();
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (support[i]) vmax = std::max(vmax, std::abs(start.velocity.at(i, 0)));
    const double quarter_step = grid.spacing() / 4.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(s - t) * vmax / quarter_step)));
    const double dt = (s - t) / steps;

    std::map<double, VelocityField> cache;
    cache.emplace(t, start.velocity);
    auto field = [&](double tau) -> const VelocityField& {
        auto it = cache.find(tau);
        if (it == cache.end()) it = cache.emplace(tau, curve.velocity_at(tau)).first;
        return it->second;
    };
    auto leave = [&](std::size_t p, double tau) {
        if (!exited) throw GridExitError("flow map trajectory left the grid", tau);
        (*exited)[p] = true;
    };

    std::vector<double> k1(n), k2(n), k3(n), k4(n);
    auto stage = [&](const VelocityField& v, std::vector<double>& k, const std::vector<double>* slope, double factor,
                     double tau) {
        for (std::size_t p = 0; p < n; ++p) {
            if (exited && (*exited)[p]) continue;
            const double y = slope ? x[p] + factor * (*slope)[p] : x[p];
            if (!(std::abs(y) <= L)) {
                leave(p, tau);
                continue;
            }
            k[p] = interpolate_velocity(v, grid, y);
        }
    };
    for (int step = 0; step < steps; ++step) {
        const double t0 = t + step * dt;
        const double th = t + (step + 0.5) * dt;
        const double t1 = step + 1 == steps ? s : t + (step + 1) * dt;
        stage(field(t0), k1, nullptr, 0.0, t0);
        const VelocityField& vh = field(th);
        stage(vh, k2, &k1, 0.5 * dt, th);
        stage(vh, k3, &k2, 0.5 * dt, th);
        stage(field(t1), k4, &k3, dt, t1);
        for (std::size_t p = 0; p < n; ++p) {
            if (exited && (*exited)[p]) continue;
            const double y = x[p] + dt / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
            if (!(std::abs(y) <= L)) {
                leave(p, t1);
                continue;
            }
            x[p] = y;
        }
        cache.erase(t0);
        cache.erase(th);
    }
    return x;
}

}  // namespace

std::vector<double> flow_map(const MeasureCurve& curve, double t, double s, std::span<const double> x0) {
    return integrate_flow(curve, t, s, x0, nullptr);
}

TrackedFlow flow_map_tracked(const MeasureCurve& curve, double t, double s, std::span<const double> x0) {
    TrackedFlow out;
    out.positions = integrate_flow(curve, t, s, x0, &out.exited);
    return out;
}

double flow_map(const MeasureCurve& curve, double t, double s, double x0) {
    const double start[1] = {x0};
    return flow_map(curve, t, s, std::span<const double>(start, 1)).front();
}

PushforwardReport flow_pushforward_check(const MeasureCurve& curve, double t, double s, int levels) {
    if (levels < 1) throw DomainError("pushforward check needs at least one level", levels);
    std::vector<double> u(levels);
    for (int k = 0; k < levels; ++k) u[k] = (k + 0.5) / levels;
    const auto from = histogram_quantiles(curve.at(t).measure, u);
    const auto to = histogram_quantiles(curve.at(s).measure, u);
    const auto mapped = flow_map(curve, t, s, from);
    double total = 0.0;
    for (int k = 0; k < levels; ++k) total += (mapped[k] - to[k]) * (mapped[k] - to[k]);
    return {t, s, std::sqrt(total / levels)};
}

}  // namespace schrolab
