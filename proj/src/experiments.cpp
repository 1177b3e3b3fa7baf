#include "schrolab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "schrolab/error.hpp"
#include "schrolab/functionals.hpp"
#include "schrolab/io.hpp"
#include "schrolab/semigroup.hpp"

namespace schrolab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Truncation truncate_renormalize(const GridMeasure& mu, double radius) {
    if (!(radius > 0.0)) throw DomainError("truncation radius must be positive", radius);
    const Grid& grid = mu.grid();
    std::vector<double> w(grid.size(), 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::sqrt(grid.squared_norm(i)) > radius) continue;
        w[i] = mu.weight(i);
        mass += w[i];
    }
    if (!(mass >= kMinTruncationMass)) throw DomainError("truncation ball carries too little mass", mass);
    return {GridMeasure(grid, std::move(w)), 1.0 / mass};
}

// ------------------------------------------------------------ continuity

namespace {

ContinuityRecord describe(double radius, const GridMeasure& mu_r, const GridMeasure& nu_r, const GridMeasure& mu,
                          const GridMeasure& nu, const Generator& gen, double alpha_mu, double alpha_nu) {
    const ReferenceMeasure ref = gen.reference(mu.grid());
    ContinuityRecord rec{};
    rec.radius = radius;
    rec.fisher_mu = fisher_info(mu_r, ref);
    rec.fisher_nu = fisher_info(nu_r, ref);
    rec.entropy_mu = relative_entropy(mu_r, ref);
    rec.entropy_nu = relative_entropy(nu_r, ref);
    const bool one_d = mu.grid().dimension() == 1;
    rec.w2_mu = one_d ? wasserstein_1d(mu_r, mu) : kNaN;
    rec.w2_nu = one_d ? wasserstein_1d(nu_r, nu) : kNaN;
    rec.alpha_mu = alpha_mu;
    rec.alpha_nu = alpha_nu;
    return rec;
}

bool within(double value, double reference, double fraction) {
    return value <= reference + fraction * std::abs(reference);
}

}  // namespace

ContinuitySweep continuity_sweep(const GridMeasure& mu, const GridMeasure& nu, const Generator& gen,
                                 const std::vector<double>& radii, const ContinuityOptions& copts,
                                 const SolverOptions& opts) {
    if (radii.empty()) throw DomainError("continuity sweep needs at least one radius");
    const auto kernel = kernel_matrix(gen, copts.horizon, mu.grid());

    ContinuitySweep sweep{};
    sweep.reference = describe(HUGE_VAL, mu, nu, mu, nu, gen, 1.0, 1.0);
    sweep.reference.cost = dynamic_cost(solve_schroedinger_system(mu, nu, kernel, opts), copts.samples).value;
    sweep.reference.converged = true;
    sweep.reference.gap = 0.0;

    for (double radius : radii) {
        const auto tm = truncate_renormalize(mu, radius);
        const auto tn = truncate_renormalize(nu, radius);
        ContinuityRecord rec = describe(radius, tm.measure, tn.measure, mu, nu, gen, tm.alpha, tn.alpha);
        try {
            rec.cost = dynamic_cost(solve_schroedinger_system(tm.measure, tn.measure, kernel, opts), copts.samples).value;
            rec.gap = std::abs(rec.cost - sweep.reference.cost);
            rec.converged = true;
        } catch (const SolverError& e) {
            rec.converged = false;
            rec.failure = e.what();
            rec.cost = kNaN;
            rec.gap = kNaN;
        }
        sweep.records.push_back(std::move(rec));
    }

    sweep.monotone = true;
    sweep.bounded = true;
    const ContinuityRecord* previous = nullptr;
    for (const auto& rec : sweep.records) {
        const auto& ref = sweep.reference;
        sweep.bounded = sweep.bounded && within(rec.fisher_mu, ref.fisher_mu, copts.bound_fraction) &&
                        within(rec.fisher_nu, ref.fisher_nu, copts.bound_fraction) &&
                        within(rec.entropy_mu, ref.entropy_mu, copts.bound_fraction) &&
                        within(rec.entropy_nu, ref.entropy_nu, copts.bound_fraction);
        if (!rec.converged) {
            sweep.monotone = false;
            continue;
        }
        if (previous && rec.gap > previous->gap + copts.monotone_slack) sweep.monotone = false;
        previous = &rec;
    }
    const auto& last = sweep.records.back();
    sweep.final_gap_ok = last.converged && last.gap < copts.final_gap;
    return sweep;
}

// ------------------------------------------------------------ derivative

double relative_error(double analytic, double finite_difference) {
    const double diff = std::abs(analytic - finite_difference);
    return std::abs(finite_difference) < 1e-12 ? diff : diff / std::abs(finite_difference);
}

namespace {

struct Evaluated {
    double sch;
    double cost;
};

SchroedingerPotentials solve_at(const MeasureCurve& curve_mu, const MeasureCurve& curve_nu,
                                const std::shared_ptr<const KernelMatrix>& kernel, double t,
                                const SolverOptions& opts) {
    const std::string where = "solve at t=" + io::format_double(t) + ": ";
    try {
        return solve_schroedinger_system(curve_mu.at(t).measure, curve_nu.at(t).measure, kernel, opts);
    } catch (const SolverError& e) {
        throw SolverError(where + e.what(), e.residual_trace());
    } catch (const DomainError& e) {
        throw DomainError(where + e.what(), e.measured());
    } catch (const NumericalError& e) {
        throw NumericalError(where + e.what());
    }
}

}  // namespace

DerivativeRecord derivative_check(const MeasureCurve& curve_mu, const MeasureCurve& curve_nu, const Generator& gen,
                                  double horizon, double t, const DerivativeOptions& dopts,
                                  const SolverOptions& opts) {
    if (!(dopts.h_fd > 0.0)) throw DomainError("finite-difference step must be positive", dopts.h_fd);
    if (!(curve_mu.grid() == curve_nu.grid())) throw DomainError("curves live on different grids");
    const auto kernel = kernel_matrix(gen, horizon, curve_mu.grid());

    auto evaluate = [&](double time) -> Evaluated {
        const auto pot = solve_at(curve_mu, curve_nu, kernel, time, opts);
        return {schroedinger_cost(pot), dynamic_cost(pot, dopts.samples).value};
    };
    auto central = [&](double h) {
        const Evaluated hi = evaluate(t + h);
        const Evaluated lo = evaluate(t - h);
        return Evaluated{(hi.sch - lo.sch) / (2.0 * h), (hi.cost - lo.cost) / (2.0 * h)};
    };

    DerivativeRecord rec{};
    rec.t = t;
    rec.h_fd = dopts.h_fd;
    Evaluated fd = central(dopts.h_fd);
    if (dopts.richardson) {
        const Evaluated half = central(0.5 * dopts.h_fd);
        fd = {(4.0 * half.sch - fd.sch) / 3.0, (4.0 * half.cost - fd.cost) / 3.0};
    }
    rec.fd_sch = fd.sch;
    rec.fd_cost = fd.cost;

    const auto pot = solve_at(curve_mu, curve_nu, kernel, t, opts);
    rec.sch = schroedinger_cost(pot);
    rec.cost = dynamic_cost(pot, dopts.samples).value;
    const CurvePoint pm = curve_mu.at(t);
    const CurvePoint pn = curve_nu.at(t);
    const VelocityField grad_f = support_gradient(pot.log_f, pot.mu.support(), pot.grid());
    const VelocityField grad_g = support_gradient(pot.log_g, pot.nu.support(), pot.grid());
    rec.analytic_static = pm.velocity.inner(grad_f, pot.mu) + pn.velocity.inner(grad_g, pot.nu);
    const VelocityField v0 = velocity(pot, 0.0);
    const VelocityField vT = velocity(pot, pot.horizon);
    rec.analytic_dynamic = 2.0 * (pn.velocity.inner(vT, pot.nu) - pm.velocity.inner(v0, pot.mu));
    rec.rel_err_static = relative_error(rec.analytic_static, rec.fd_sch);
    rec.rel_err_dynamic = relative_error(rec.analytic_dynamic, rec.fd_cost);
    return rec;
}

// ----------------------------------------------------------- contraction

ContractionReport contraction_check(const GridMeasure& mu, const GridMeasure& nu, const std::vector<double>& times,
                                    const ContractionOptions& copts, const SolverOptions& opts) {
    if (mu.grid().dimension() != 1) throw DomainError("contraction check is 1D only", mu.grid().dimension());
    if (copts.correction_intervals < 1)
        throw DomainError("correction integral needs at least one interval", copts.correction_intervals);
    const Generator gen = Generator::laplacian(1);
    const auto kernel = kernel_matrix(gen, copts.horizon, mu.grid());
    auto cost = [&](const GridMeasure& a, const GridMeasure& b) {
        return dynamic_cost(solve_schroedinger_system(a, b, kernel, opts), copts.samples).value;
    };
    auto entropy_gap_sq = [&](double u) {
        const double d = entropy_F(apply_Pt_star(gen, u, mu).measure, gen) - entropy_F(apply_Pt_star(gen, u, nu).measure, gen);
        return d * d;
    };

    ContractionReport report{};
    report.cost0 = cost(mu, nu);
    report.all_hold = true;
    for (double t : times) {
        if (!(t > 0.0)) throw DomainError("contraction times must be positive", t);
        ContractionRow row{};
        row.t = t;
        row.cost = cost(apply_Pt_star(gen, t, mu).measure, apply_Pt_star(gen, t, nu).measure);
        const int m = copts.correction_intervals;
        const double du = t / m;
        double integral = 0.0;
        for (int k = 0; k <= m; ++k) integral += (k == 0 || k == m ? 0.5 : 1.0) * entropy_gap_sq(k * du);
        row.correction = integral * du;
        row.bound = report.cost0 - row.correction;
        row.holds = row.cost <= row.bound + copts.relative_slack * std::abs(row.bound);
        report.all_hold = report.all_hold && row.holds;
        report.rows.push_back(row);
    }
    return report;
}

// ------------------------------------------------------------- Talagrand

std::string to_string(TalagrandBranch branch) {
    return branch == TalagrandBranch::PositiveCurvature ? "positive_curvature" : "zero_curvature";
}

TalagrandReport talagrand_check(const GridMeasure& mu, const GridMeasure& nu, const Generator& gen,
                                TalagrandBranch branch, const std::vector<double>& horizons, int samples,
                                const SolverOptions& opts) {
    if (horizons.empty()) throw DomainError("Talagrand check needs at least one horizon");
    if (branch == TalagrandBranch::PositiveCurvature && gen.kind() != Generator::Kind::OrnsteinUhlenbeck)
        throw DomainError("the positive-curvature branch needs the Ornstein-Uhlenbeck generator");
    if (branch == TalagrandBranch::ZeroCurvature && gen.kind() != Generator::Kind::Laplacian)
        throw DomainError("the zero-curvature branch needs the Laplacian generator");
    for (double T : horizons) {
        if (!(T > 0.0)) throw DomainError("horizons must be positive", T);
        if (branch == TalagrandBranch::ZeroCurvature && T < 1.0)
            throw DomainError("the zero-curvature branch needs T >= 1", T);
    }
    auto cost = [&](double T) {
        return dynamic_cost(solve_schroedinger_system(mu, nu, gen, T, opts), samples).value;
    };

    TalagrandReport report{branch, {}, true};
    const double f_mu = entropy_F(mu, gen);
    const double f_nu = entropy_F(nu, gen);
    const double rho = gen.cd_rho();
    const double c1 = branch == TalagrandBranch::ZeroCurvature ? cost(1.0) : 0.0;
    for (double T : horizons) {
        TalagrandRow row{};
        row.horizon = T;
        row.cost = T == 1.0 && branch == TalagrandBranch::ZeroCurvature ? c1 : cost(T);
        if (branch == TalagrandBranch::ZeroCurvature) {
            row.bound = c1 + 2.0 * gen.cd_n() * std::log(T);
        } else {
            double best = HUGE_VAL;
            for (int k = 1; k <= kTalagrandScanPoints; ++k) {
                const double t = T * k / (kTalagrandScanPoints + 1);
                const double value = f_mu / std::tanh(rho * t) + f_nu / std::tanh(rho * (T - t));
                best = std::min(best, value);
            }
            row.bound = 2.0 * best;
        }
        row.slack = row.bound - row.cost;
        row.holds = row.slack >= -kTalagrandTightness;
        report.all_hold = report.all_hold && row.holds;
        report.rows.push_back(row);
    }
    return report;
}

// -------------------------------------------------------- Gaussian oracle

namespace {

void require_variance(double variance) {
    if (!(variance > 0.0)) throw DomainError("Gaussian variance must be positive", variance);
}

struct OracleVisitor {
    double operator()(const oracle::Entropy& q) const {
        require_variance(q.variance);
        return -0.5 * std::log(2.0 * std::numbers::pi * q.variance) - 0.5;
    }
    double operator()(const oracle::Fisher& q) const {
        require_variance(q.variance);
        return 1.0 / q.variance;
    }
    double operator()(const oracle::HeatVariance& q) const {
        require_variance(q.variance);
        if (!(q.t >= 0.0)) throw DomainError("heat flow time must be nonnegative", q.t);
        return q.variance + 2.0 * q.t;
    }
    double operator()(const oracle::W2& q) const {
        require_variance(q.variance1);
        require_variance(q.variance2);
        const double dm = q.mean1 - q.mean2;
        const double ds = std::sqrt(q.variance1) - std::sqrt(q.variance2);
        return std::sqrt(dm * dm + ds * ds);
    }
};

}  // namespace

double gaussian_oracle(const GaussianQuery& query) { return std::visit(OracleVisitor{}, query); }

// ---------------------------------------------------------- Monge-Ampere

MongeAmpereReport monge_ampere_check(const MeasureCurve& curve, double t, double s) {
    const Grid& grid = curve.grid();
    if (grid.dimension() != 1) throw DomainError("Monge-Ampere check is 1D only", grid.dimension());
    const ReferenceMeasure leb = ReferenceMeasure::lebesgue(grid);
    const GridMeasure mu_t = curve.at(t).measure;
    const double h_t = relative_entropy(mu_t, leb);
    if (s == t) return {t, s, h_t, h_t, 0.0, 0.0};

    const std::size_t n = grid.size();
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = grid.axis_coord(static_cast<int>(i));
    const TrackedFlow flow = flow_map_tracked(curve, t, s, nodes);

    double log_jacobian = 0.0;
    double excluded = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = mu_t.weight(i);
        if (w == 0.0) continue;
        const bool usable = i > 0 && i + 1 < n && !flow.exited[i - 1] && !flow.exited[i] && !flow.exited[i + 1];
        if (!usable) {
            excluded += w;
            continue;
        }
        const double jac = (flow.positions[i + 1] - flow.positions[i - 1]) / (2.0 * grid.spacing());
        log_jacobian += w * std::log(std::abs(jac));
    }
    const double lhs = relative_entropy(curve.at(s).measure, leb);
    const double rhs = h_t - log_jacobian;
    return {t, s, lhs, rhs, std::abs(lhs - rhs), excluded};
}

}  // namespace schrolab
