#include "schrolab/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "schrolab/error.hpp"

namespace schrolab {

// ------------------------------------------------------------ Generator

Generator Generator::laplacian(int dimension) {
    if (dimension != 1 && dimension != 2) throw DomainError("laplacian dimension must be 1 or 2", dimension);
    return {Kind::Laplacian, dimension};
}

Generator Generator::ornstein_uhlenbeck() { return {Kind::OrnsteinUhlenbeck, 1}; }

ReferenceMeasure Generator::reference(const Grid& grid) const {
    if (grid.dimension() != dimension_)
        throw DomainError("generator dimension " + std::to_string(dimension_) + " does not match the grid",
                          grid.dimension());
    if (kind_ == Kind::Laplacian) return ReferenceMeasure::lebesgue(grid);
    return ReferenceMeasure::gaussian(grid, 0.0, 1.0);
}

std::string Generator::name() const {
    if (kind_ == Kind::OrnsteinUhlenbeck) return "ornstein_uhlenbeck";
    return "laplacian";
}

// ---------------------------------------------------------- functionals

double relative_entropy(const GridMeasure& p, const ReferenceMeasure& r) {
    if (!(p.grid() == r.grid())) throw DomainError("relative_entropy: measures live on different grids");
    const auto log_p = p.log_densities();
    const auto log_r = r.log_density();
    double total = 0.0;
    for (std::size_t i = 0; i < log_p.size(); ++i) {
        if (log_p[i] == -HUGE_VAL) continue;
        if (log_r[i] == -HUGE_VAL) return HUGE_VAL;
        total += p.weight(i) * (log_p[i] - log_r[i]);
    }
    return total;
}

double entropy_F(const GridMeasure& mu, const Generator& gen) { return relative_entropy(mu, gen.reference(mu.grid())); }

VelocityField support_gradient(std::span<const double> values, const std::vector<bool>& support, const Grid& grid) {
    VelocityField grad(grid);
    const int n = grid.points();
    const double h = grid.spacing();
    for (std::size_t node = 0; node < grid.size(); ++node) {
        if (!support[node]) continue;
        const auto idx = grid.unflatten(node);
        for (int a = 0; a < grid.dimension(); ++a) {
            auto neighbour = [&](int offset) -> std::ptrdiff_t {
                auto j = idx;
                j[a] += offset;
                if (j[a] < 0 || j[a] >= n) return -1;
                const std::size_t k = grid.flatten(j[0], j[1]);
                return support[k] ? static_cast<std::ptrdiff_t>(k) : -1;
            };
            const auto lo = neighbour(-1);
            const auto hi = neighbour(+1);
            double g = 0.0;
            if (lo >= 0 && hi >= 0)
                g = (values[hi] - values[lo]) / (2.0 * h);
            else if (hi >= 0)
                g = (values[hi] - values[node]) / h;
            else if (lo >= 0)
                g = (values[node] - values[lo]) / h;
            grad.at(node, a) = g;
        }
    }
    return grad;
}

namespace {

void require_thick_support(const std::vector<bool>& support, const Grid& grid) {
    for (int a = 0; a < grid.dimension(); ++a) {
        std::vector<bool> seen(grid.points(), false);
        for (std::size_t node = 0; node < grid.size(); ++node)
            if (support[node]) seen[grid.unflatten(node)[a]] = true;
        const auto count = std::count(seen.begin(), seen.end(), true);
        if (count < 3)
            throw DomainError("effective support spans fewer than 3 nodes along an axis; gradient undefined",
                              static_cast<double>(count));
    }
}

}  // namespace

VelocityField score(const GridMeasure& mu, const ReferenceMeasure& m) {
    if (!(mu.grid() == m.grid())) throw DomainError("score: measures live on different grids");
    const auto support = mu.support();
    require_thick_support(support, mu.grid());
    auto u = mu.log_densities();
    const auto log_m = m.log_density();
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = support[i] ? u[i] - log_m[i] : 0.0;
    return support_gradient(u, support, mu.grid());
}

double fisher_info(const GridMeasure& mu, const ReferenceMeasure& m) { return score(mu, m).squared_norm(mu); }

std::vector<double> histogram_quantiles(const GridMeasure& mu, std::span<const double> levels) {
    if (mu.grid().dimension() != 1) throw DomainError("quantiles are only defined in 1D");
    const Grid& grid = mu.grid();
    const double h = grid.spacing();
    const auto w = mu.weights();
    std::vector<double> out;
    out.reserve(levels.size());
    std::size_t cell = 0;
    double below = 0.0;  // mass of cells strictly before `cell`
    for (double u : levels) {
        while (cell + 1 < w.size() && below + w[cell] <= u) {
            below += w[cell];
            ++cell;
        }
        const double left = grid.axis_coord(static_cast<int>(cell)) - 0.5 * h;
        const double frac = w[cell] > 0.0 ? std::clamp((u - below) / w[cell], 0.0, 1.0) : 1.0;
        out.push_back(left + frac * h);
    }
    return out;
}

double wasserstein_1d(const GridMeasure& mu, const GridMeasure& nu, int levels) {
    if (mu.grid().dimension() != 1 || nu.grid().dimension() != 1)
        throw DomainError("wasserstein_1d: 2D transport distances are not supported");
    if (!(mu.grid() == nu.grid())) throw DomainError("wasserstein_1d: measures live on different grids");
    if (levels < 2) throw DomainError("wasserstein_1d: need at least 2 quantile levels", levels);
    std::vector<double> u(levels);
    for (int k = 0; k < levels; ++k) u[k] = (k + 0.5) / levels;
    const auto qa = histogram_quantiles(mu, u);
    const auto qb = histogram_quantiles(nu, u);
    double total = 0.0;
    for (int k = 0; k < levels; ++k) total += (qa[k] - qb[k]) * (qa[k] - qb[k]);
    return std::sqrt(total / levels);
}

double second_moment(const GridMeasure& mu) {
    double total = 0.0;
    for (std::size_t i = 0; i < mu.grid().size(); ++i) total += mu.weight(i) * mu.grid().squared_norm(i);
    return total;
}

double boundary_mass(const GridMeasure& mu) {
    const Grid& grid = mu.grid();
    const int n = grid.points();
    double total = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto idx = grid.unflatten(node);
        bool edge = false;
        for (int a = 0; a < grid.dimension(); ++a) edge = edge || idx[a] < 2 || idx[a] >= n - 2;
        if (edge) total += mu.weight(node);
    }
    return total;
}

bool admissible(const GridMeasure& mu, const Generator& gen) {
    return std::isfinite(entropy_F(mu, gen)) && std::isfinite(second_moment(mu)) &&
           boundary_mass(mu) < kAdmissibleBoundaryMass;
}

}  // namespace schrolab
