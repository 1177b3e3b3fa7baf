#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace schrolab {

/// Densities below this value are treated as exact zero by the post-hoc
/// functionals (entropy, Fisher information, velocities).
inline constexpr double kDensityFloor = 1e-300;

/// Uniform tensor grid on [-L, L]^d, d in {1, 2}.
///
/// Nodes are x_i = -L + i*h with h = 2L/(N-1). In 2D the flat node index is
/// i0 * N + i1 (first axis outer), which is also the row order of every CSV
/// the library reads or writes.
class Grid {
public:
    Grid(int dimension, double half_width, int points);

    int dimension() const noexcept { return dimension_; }
    double half_width() const noexcept { return half_width_; }
    int points() const noexcept { return points_; }
    double spacing() const noexcept { return spacing_; }
    /// h^d, the rectangle-rule weight of one node.
    double cell_volume() const noexcept;
    /// Total number of nodes, N^d.
    std::size_t size() const noexcept;

    double axis_coord(int i) const noexcept { return -half_width_ + i * spacing_; }
    /// Per-axis indices of a flat node index.
    std::array<int, 2> unflatten(std::size_t node) const noexcept;
    std::size_t flatten(int i0, int i1 = 0) const noexcept;
    /// Coordinates of a node; the second entry is 0 in 1D.
    std::array<double, 2> coords(std::size_t node) const noexcept;
    double squared_norm(std::size_t node) const noexcept;

    bool operator==(const Grid& other) const noexcept;

private:
    int dimension_;
    double half_width_;
    int points_;
    double spacing_;
};

/// Probability measure stored as nonnegative node weights summing to 1.
/// The density against Lebesgue is weight / h^d.
class GridMeasure {
public:
    /// Takes ownership of nonnegative weights and renormalizes them to sum 1.
    GridMeasure(Grid grid, std::vector<double> weights);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double weight(std::size_t node) const noexcept { return weights_[node]; }
    double density(std::size_t node) const noexcept { return weights_[node] / grid_.cell_volume(); }
    std::vector<double> densities() const;
    /// log density against Lebesgue, -inf below the density floor.
    std::vector<double> log_densities() const;
    /// Nodes whose density exceeds the floor.
    std::vector<bool> support() const;
    /// Scale factor applied to the raw weights at construction.
    double normalization() const noexcept { return normalization_; }

private:
    Grid grid_;
    std::vector<double> weights_;
    double normalization_;
};

/// Reference measure m: Lebesgue, or a Gaussian N(mean, variance) per axis.
class ReferenceMeasure {
public:
    enum class Kind { Lebesgue, Gaussian };

    static ReferenceMeasure lebesgue(const Grid& grid);
    static ReferenceMeasure gaussian(const Grid& grid, double mean, double variance);

    Kind kind() const noexcept { return kind_; }
    const Grid& grid() const noexcept { return grid_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }
    std::span<const double> log_density() const noexcept { return log_density_; }
    /// log of the node weight m_i = density_i * h^d.
    double log_weight(std::size_t node) const noexcept;
    /// 1 - (grid quadrature of the density); 0 for Lebesgue.
    double truncation_mass_loss() const noexcept { return mass_loss_; }

private:
    ReferenceMeasure(Kind kind, Grid grid, double mean, double variance);

    Kind kind_;
    Grid grid_;
    double mean_;
    double variance_;
    std::vector<double> log_density_;
    double mass_loss_ = 0.0;
};

/// Vector field sampled at the grid nodes, `dimension` components per node.
class VelocityField {
public:
    explicit VelocityField(Grid grid);
    VelocityField(Grid grid, std::vector<double> values);

    const Grid& grid() const noexcept { return grid_; }
    double& at(std::size_t node, int axis) noexcept { return values_[node * grid_.dimension() + axis]; }
    double at(std::size_t node, int axis) const noexcept { return values_[node * grid_.dimension() + axis]; }
    std::span<const double> values() const noexcept { return values_; }
    /// ||v||^2 in L^2(measure).
    double squared_norm(const GridMeasure& measure) const;
    /// <v, w>_{L^2(measure)}.
    double inner(const VelocityField& other, const GridMeasure& measure) const;

private:
    Grid grid_;
    std::vector<double> values_;
};

// Measure descriptions accepted by make_grid_measure.

/// Gaussian with independent axes; in 1D only the first entry is used.
struct GaussianSpec {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> variance{1.0, 1.0};
};

struct MixtureComponent {
    double weight;
    GaussianSpec gaussian;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
};

/// CSV with header `x,density` (1D) or `x,y,density` (2D) in node order.
struct TabulatedSpec {
    std::filesystem::path path;
};

using MeasureSpec = std::variant<GaussianSpec, MixtureSpec, TabulatedSpec>;

GaussianSpec gaussian_1d(double mean, double variance);

/// Largest mass a measure description may put outside the grid window.
inline constexpr double kMaxTailMass = 1e-10;

/// Analytic mass of a Gaussian/mixture spec outside [-L, L]^d (0 for tables).
double spec_tail_mass(const MeasureSpec& spec, const Grid& grid);

/// Discretizes a measure description on the grid by sampling its density at the
/// nodes and renormalizing; GridMeasure::normalization() reports the factor.
/// Throws DomainError when the tail mass exceeds kMaxTailMass or a tabulated
/// density is negative or malformed.
GridMeasure make_grid_measure(const MeasureSpec& spec, const Grid& grid);

/// Reads a tabulated density file and checks it against the grid nodes.
std::vector<double> read_density_csv(const std::filesystem::path& path, const Grid& grid);

/// Writes a measure as a density CSV in the same format read_density_csv reads.
void write_density_csv(const std::filesystem::path& path, const GridMeasure& measure);

/// Point mass at the node closest to the origin.
GridMeasure point_mass_at_center(const Grid& grid);

}  // namespace schrolab
