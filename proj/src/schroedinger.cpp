#include "schrolab/schroedinger.hpp"

#include <algorithm>
#include <cmath>

#include "schrolab/error.hpp"
#include "schrolab/functionals.hpp"
#include "schrolab/io.hpp"

namespace schrolab {

namespace {

// Sweeps over which the residual must shrink by a relative 1e-6 before the
// solve is declared stalled.
constexpr int kPlateauWindow = 500;
constexpr double kPlateauDecrease = 1e-6;

std::vector<double> log_ratio_to_reference(const GridMeasure& mu, const KernelMatrix& kernel) {
    std::vector<double> out(mu.grid().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = mu.weight(i) > 0.0 ? std::log(mu.weight(i)) - kernel.log_reference_weight(i) : -HUGE_VAL;
    return out;
}

// log f = log(dmu/dm) - log P e^{log g}, with -inf kept off mu's support.
void fit_half(const std::vector<double>& log_target, const std::vector<double>& log_p_other, std::vector<double>& out) {
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = log_target[i] == -HUGE_VAL ? -HUGE_VAL : log_target[i] - log_p_other[i];
}

// L1 distance between the weights f * P g * m and mu.
double marginal_residual(const std::vector<double>& log_f, const std::vector<double>& log_pg, const GridMeasure& mu,
                         const KernelMatrix& kernel) {
    double total = 0.0;
    for (std::size_t i = 0; i < log_f.size(); ++i) {
        const double w = log_f[i] == -HUGE_VAL ? 0.0 : std::exp(log_f[i] + log_pg[i] + kernel.log_reference_weight(i));
        total += std::abs(w - mu.weight(i));
    }
    return total;
}

double log_integral(const std::vector<double>& log_phi, const KernelMatrix& kernel) {
    std::vector<double> terms(log_phi.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = log_phi[i] + kernel.log_reference_weight(i);
    return log_sum_exp(terms);
}

}  // namespace

SchroedingerPotentials SchroedingerPotentials::gauge_shifted(double c) const {
    SchroedingerPotentials out = *this;
    for (double& v : out.log_f) v += c;
    for (double& v : out.log_g) v -= c;
    return out;
}

SchroedingerPotentials solve_schroedinger_system(const GridMeasure& mu, const GridMeasure& nu, const Generator& gen,
                                                 double horizon, const SolverOptions& opts) {
    if (!(mu.grid() == nu.grid())) throw DomainError("marginals live on different grids");
    return solve_schroedinger_system(mu, nu, kernel_matrix(gen, horizon, mu.grid()), opts);
}

SchroedingerPotentials solve_schroedinger_system(const GridMeasure& mu, const GridMeasure& nu,
                                                 std::shared_ptr<const KernelMatrix> kernel,
                                                 const SolverOptions& opts) {
    if (!kernel) throw DomainError("solver needs a kernel");
    if (!(mu.grid() == nu.grid())) throw DomainError("marginals live on different grids");
    if (!(kernel->grid() == mu.grid())) throw DomainError("kernel grid does not match the marginals");
    if (!(opts.tol > 0.0)) throw DomainError("solver tolerance must be positive", opts.tol);
    if (opts.max_iter < 1) throw DomainError("max_iter must be at least 1", opts.max_iter);
    const Generator& gen = kernel->generator();
    if (!admissible(mu, gen)) throw DomainError("first marginal is not admissible", boundary_mass(mu));
    if (!admissible(nu, gen)) throw DomainError("second marginal is not admissible", boundary_mass(nu));

    const std::size_t size = mu.grid().size();
    const auto log_mu = log_ratio_to_reference(mu, *kernel);
    const auto log_nu = log_ratio_to_reference(nu, *kernel);
    std::vector<double> log_f(size), log_g(size, 0.0);
    std::vector<double> log_pg = kernel->apply_log(log_g);
    std::vector<double> log_pf;

    SolverDiagnostics diag;
    diag.kernel_under_resolved = kernel->under_resolved();
    bool converged = false;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        fit_half(log_mu, log_pg, log_f);
        log_pf = kernel->apply_log(log_f);
        fit_half(log_nu, log_pf, log_g);
        log_pg = kernel->apply_log(log_g);

        // After the g-update the second marginal is exact up to rounding.
        const double residual = marginal_residual(log_f, log_pg, mu, *kernel);
        if (!std::isfinite(residual))
            throw SolverError("non-finite marginal residual at sweep " + std::to_string(iter), diag.residual_trace);
        diag.residual_trace.push_back(residual);
        diag.iterations = iter;
        if (residual < opts.tol) {
            converged = true;
            break;
        }
        if (iter > kPlateauWindow) {
            const double before = diag.residual_trace[iter - 1 - kPlateauWindow];
            if (residual > before * (1.0 - kPlateauDecrease)) {
                std::string msg = "marginal residual stalled at " + io::format_double(residual) + " after " +
                                  std::to_string(iter) + " sweeps";
                throw SolverError(msg, std::move(diag.residual_trace));
            }
        }
    }
    if (!converged) {
        // build the message before the trace is moved out
        std::string msg = "no convergence within " + std::to_string(opts.max_iter) + " sweeps (residual " +
                          io::format_double(diag.residual_trace.back()) + ")";
        throw SolverError(msg, std::move(diag.residual_trace));
    }

    diag.residual_mu = diag.residual_trace.back();
    log_pf = kernel->apply_log(log_f);
    diag.residual_nu = marginal_residual(log_g, log_pf, nu, *kernel);

    const double c = 0.5 * (log_integral(log_f, *kernel) - log_integral(log_g, *kernel));
    for (double& v : log_f) v -= c;
    for (double& v : log_g) v += c;
    diag.gauge_shift = c;

    return {std::move(log_f), std::move(log_g), gen, kernel->time(), mu, nu, std::move(diag), std::move(kernel)};
}

double schroedinger_cost(const SchroedingerPotentials& pot) {
    double total = 0.0;
    for (std::size_t i = 0; i < pot.log_f.size(); ++i) {
        if (pot.mu.weight(i) > 0.0) total += pot.mu.weight(i) * pot.log_f[i];
        if (pot.nu.weight(i) > 0.0) total += pot.nu.weight(i) * pot.log_g[i];
    }
    return total;
}

namespace {

double pair_log_weight(const SchroedingerPotentials& pot, std::size_t i, std::size_t j) {
    if (pot.log_f[i] == -HUGE_VAL || pot.log_g[j] == -HUGE_VAL) return -HUGE_VAL;
    const KernelMatrix& k = *pot.kernel;
    return pot.log_f[i] + k.log_entry(i, j) + pot.log_g[j] + k.log_reference_weight(i) + k.log_reference_weight(j);
}

}  // namespace

EntropicPlan::EntropicPlan(const SchroedingerPotentials& pot) : nodes_(pot.grid().size()) {
    if (static_cast<double>(nodes_) * static_cast<double>(nodes_) > kMaxPlanPairs)
        throw DomainError("plan too large to materialize", static_cast<double>(nodes_) * static_cast<double>(nodes_));
    weights_.resize(nodes_ * nodes_);
    for (std::size_t i = 0; i < nodes_; ++i)
        for (std::size_t j = 0; j < nodes_; ++j) weights_[i * nodes_ + j] = std::exp(pair_log_weight(pot, i, j));
}

std::vector<double> EntropicPlan::marginal0() const {
    std::vector<double> out(nodes_, 0.0);
    for (std::size_t i = 0; i < nodes_; ++i)
        for (std::size_t j = 0; j < nodes_; ++j) out[i] += weights_[i * nodes_ + j];
    return out;
}

std::vector<double> EntropicPlan::marginal1() const {
    std::vector<double> out(nodes_, 0.0);
    for (std::size_t i = 0; i < nodes_; ++i)
        for (std::size_t j = 0; j < nodes_; ++j) out[j] += weights_[i * nodes_ + j];
    return out;
}

double EntropicPlan::total_mass() const {
    double total = 0.0;
    for (double w : weights_) total += w;
    return total;
}

EntropicPlan plan_density(const SchroedingerPotentials& pot) { return EntropicPlan(pot); }

double l1_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("l1_distance: size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
    return total;
}

RestrictionReport restriction_check(const SchroedingerPotentials& pot, double radius, const SolverOptions& opts) {
    if (!(radius > 0.0)) throw DomainError("restriction radius must be positive", radius);
    const Grid& grid = pot.grid();
    const std::size_t size = grid.size();
    std::vector<bool> inside(size);
    bool covers_all = true;
    double mass_mu = 0.0, mass_nu = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        inside[i] = std::sqrt(grid.squared_norm(i)) <= radius;
        covers_all = covers_all && inside[i];
        if (inside[i]) {
            mass_mu += pot.mu.weight(i);
            mass_nu += pot.nu.weight(i);
        }
    }
    if (mass_mu < 0.5 || mass_nu < 0.5)
        throw DomainError("restriction ball carries less than half of a marginal", std::min(mass_mu, mass_nu));
    if (covers_all) return {radius, mass_mu, mass_nu, 1.0, 0.0, 0.0};

    // Restricted plan marginals, accumulated pair by pair so 2D never stores the plan.
    std::vector<double> row(size, 0.0), col(size, 0.0);
    double plan_mass = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        if (!inside[i]) continue;
        for (std::size_t j = 0; j < size; ++j) {
            if (!inside[j]) continue;
            const double w = std::exp(pair_log_weight(pot, i, j));
            row[i] += w;
            col[j] += w;
            plan_mass += w;
        }
    }
    const GridMeasure mu_r(grid, row);
    const GridMeasure nu_r(grid, col);
    const auto fresh = solve_schroedinger_system(mu_r, nu_r, pot.kernel, opts);

    const double log_mass = std::log(plan_mass);
    double plan_l1 = 0.0;
    double restricted_entropy = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
            const double fresh_w = std::exp(pair_log_weight(fresh, i, j));
            if (!(inside[i] && inside[j])) {
                plan_l1 += fresh_w;
                continue;
            }
            const double w = std::exp(pair_log_weight(pot, i, j) - log_mass);
            plan_l1 += std::abs(w - fresh_w);
            if (w > 0.0) restricted_entropy += w * (pot.log_f[i] + pot.log_g[j] - log_mass);
        }
    }
    return {radius, mass_mu, mass_nu, plan_mass, plan_l1, std::abs(restricted_entropy - schroedinger_cost(fresh))};
}

void write_potentials_csv(const std::filesystem::path& path, const SchroedingerPotentials& pot) {
    const Grid& grid = pot.grid();
    std::string out = grid.dimension() == 1 ? "x,log_f,log_g\n" : "x,y,log_f,log_g\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.coords(i);
        if (grid.dimension() == 1)
            out += io::csv_row(std::vector<double>{x[0], pot.log_f[i], pot.log_g[i]});
        else
            out += io::csv_row(std::vector<double>{x[0], x[1], pot.log_f[i], pot.log_g[i]});
    }
    io::write_file_atomic(path, out);
}

void write_plan_csv(const std::filesystem::path& path, const SchroedingerPotentials& pot) {
    const Grid& grid = pot.grid();
    if (grid.dimension() != 1) throw DomainError("plan dumps are 1D only", grid.dimension());
    const EntropicPlan plan(pot);
    std::string out = "x,y,gamma\n";
    for (std::size_t i = 0; i < plan.nodes(); ++i)
        for (std::size_t j = 0; j < plan.nodes(); ++j)
            out += io::csv_row(std::vector<double>{grid.axis_coord(static_cast<int>(i)),
                                                   grid.axis_coord(static_cast<int>(j)), plan.weight(i, j)});
    io::write_file_atomic(path, out);
}

}  // namespace schrolab
