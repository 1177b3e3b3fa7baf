#include "schrolab/grid.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "schrolab/error.hpp"
#include "schrolab/io.hpp"

namespace schrolab {

namespace {

double parse_number(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
    try {
        std::size_t used = 0;
        double value = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return value;
    } catch (const std::exception&) {
        throw DomainError(path.string() + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
    }
}

// Mass of N(mean, variance) inside [-L, L].
double interval_mass(double mean, double variance, double half_width) {
    const double s = std::sqrt(2.0 * variance);
    return 0.5 * (std::erf((half_width - mean) / s) - std::erf((-half_width - mean) / s));
}

double gaussian_log_density(const GaussianSpec& g, const std::array<double, 2>& x, int dimension) {
    double value = 0.0;
    for (int a = 0; a < dimension; ++a) {
        const double d = x[a] - g.mean[a];
        value += -0.5 * std::log(2.0 * std::numbers::pi * g.variance[a]) - d * d / (2.0 * g.variance[a]);
    }
    return value;
}

void check_gaussian(const GaussianSpec& g, int dimension) {
    for (int a = 0; a < dimension; ++a) {
        if (!(g.variance[a] > 0.0) || !std::isfinite(g.variance[a]))
            throw DomainError("gaussian variance must be positive", g.variance[a]);
        if (!std::isfinite(g.mean[a])) throw DomainError("gaussian mean must be finite");
    }
}

}  // namespace

// ---------------------------------------------------------------- Grid

Grid::Grid(int dimension, double half_width, int points)
    : dimension_(dimension), half_width_(half_width), points_(points) {
    if (dimension != 1 && dimension != 2) throw DomainError("grid dimension must be 1 or 2", dimension);
    if (points < 8) throw DomainError("grid needs at least 8 points per axis", points);
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw DomainError("grid half width must be positive", half_width);
    spacing_ = 2.0 * half_width / (points - 1);
}

double Grid::cell_volume() const noexcept { return dimension_ == 1 ? spacing_ : spacing_ * spacing_; }

std::size_t Grid::size() const noexcept {
    const auto n = static_cast<std::size_t>(points_);
    return dimension_ == 1 ? n : n * n;
}

std::array<int, 2> Grid::unflatten(std::size_t node) const noexcept {
    if (dimension_ == 1) return {static_cast<int>(node), 0};
    return {static_cast<int>(node / points_), static_cast<int>(node % points_)};
}

std::size_t Grid::flatten(int i0, int i1) const noexcept {
    return dimension_ == 1 ? static_cast<std::size_t>(i0)
                           : static_cast<std::size_t>(i0) * points_ + static_cast<std::size_t>(i1);
}

std::array<double, 2> Grid::coords(std::size_t node) const noexcept {
    auto idx = unflatten(node);
    if (dimension_ == 1) return {axis_coord(idx[0]), 0.0};
    return {axis_coord(idx[0]), axis_coord(idx[1])};
}

double Grid::squared_norm(std::size_t node) const noexcept {
    auto x = coords(node);
    return x[0] * x[0] + x[1] * x[1];
}

bool Grid::operator==(const Grid& other) const noexcept {
    return dimension_ == other.dimension_ && half_width_ == other.half_width_ && points_ == other.points_;
}

// ---------------------------------------------------------- GridMeasure

GridMeasure::GridMeasure(Grid grid, std::vector<double> weights) : grid_(grid), weights_(std::move(weights)) {
    if (weights_.size() != grid_.size())
        throw DomainError("weight vector size does not match the grid", static_cast<double>(weights_.size()));
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and nonnegative", w);
        total += w;
    }
    if (!(total > 0.0)) throw DomainError("measure has zero total mass");
    normalization_ = 1.0 / total;
    for (double& w : weights_) w /= total;
}

std::vector<double> GridMeasure::densities() const {
    std::vector<double> out(weights_.size());
    const double vol = grid_.cell_volume();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = weights_[i] / vol;
    return out;
}

std::vector<double> GridMeasure::log_densities() const {
    std::vector<double> out(weights_.size());
    const double log_vol = std::log(grid_.cell_volume());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = weights_[i] / grid_.cell_volume();
        out[i] = d > kDensityFloor ? std::log(weights_[i]) - log_vol : -HUGE_VAL;
    }
    return out;
}

std::vector<bool> GridMeasure::support() const {
    std::vector<bool> out(weights_.size());
    const double vol = grid_.cell_volume();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = weights_[i] / vol > kDensityFloor;
    return out;
}

// ----------------------------------------------------- ReferenceMeasure

ReferenceMeasure::ReferenceMeasure(Kind kind, Grid grid, double mean, double variance)
    : kind_(kind), grid_(grid), mean_(mean), variance_(variance), log_density_(grid.size(), 0.0) {
    if (kind_ == Kind::Lebesgue) return;
    if (!(variance > 0.0)) throw DomainError("reference variance must be positive", variance);
    GaussianSpec g;
    g.mean = {mean, mean};
    g.variance = {variance, variance};
    double mass = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        log_density_[i] = gaussian_log_density(g, grid.coords(i), grid.dimension());
        mass += std::exp(log_density_[i]) * grid.cell_volume();
    }
    mass_loss_ = 1.0 - mass;
}

ReferenceMeasure ReferenceMeasure::lebesgue(const Grid& grid) { return {Kind::Lebesgue, grid, 0.0, 0.0}; }

ReferenceMeasure ReferenceMeasure::gaussian(const Grid& grid, double mean, double variance) {
    return {Kind::Gaussian, grid, mean, variance};
}

double ReferenceMeasure::log_weight(std::size_t node) const noexcept {
    return log_density_[node] + std::log(grid_.cell_volume());
}

// -------------------------------------------------------- VelocityField

VelocityField::VelocityField(Grid grid) : grid_(grid), values_(grid.size() * grid.dimension(), 0.0) {}

VelocityField::VelocityField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size() * grid_.dimension())
        throw DomainError("velocity field size does not match the grid");
}

double VelocityField::squared_norm(const GridMeasure& measure) const { return inner(*this, measure); }

double VelocityField::inner(const VelocityField& other, const GridMeasure& measure) const {
    const int d = grid_.dimension();
    double total = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        const double w = measure.weight(i);
        if (w == 0.0) continue;
        double dot = 0.0;
        for (int a = 0; a < d; ++a) dot += at(i, a) * other.at(i, a);
        total += w * dot;
    }
    return total;
}

// ------------------------------------------------------ measure builders

GaussianSpec gaussian_1d(double mean, double variance) {
    GaussianSpec g;
    g.mean = {mean, 0.0};
    g.variance = {variance, 1.0};
    return g;
}

double spec_tail_mass(const MeasureSpec& spec, const Grid& grid) {
    auto gaussian_tail = [&](const GaussianSpec& g) {
        double inside = 1.0;
        for (int a = 0; a < grid.dimension(); ++a) inside *= interval_mass(g.mean[a], g.variance[a], grid.half_width());
        return 1.0 - inside;
    };
    if (auto g = std::get_if<GaussianSpec>(&spec)) return gaussian_tail(*g);
    if (auto m = std::get_if<MixtureSpec>(&spec)) {
        double total = 0.0, tail = 0.0;
        for (const auto& c : m->components) {
            total += c.weight;
            tail += c.weight * gaussian_tail(c.gaussian);
        }
        return total > 0.0 ? tail / total : 0.0;
    }
    return 0.0;
}

GridMeasure make_grid_measure(const MeasureSpec& spec, const Grid& grid) {
    std::vector<double> raw(grid.size(), 0.0);
    const double vol = grid.cell_volume();
    if (auto g = std::get_if<GaussianSpec>(&spec)) {
        check_gaussian(*g, grid.dimension());
        for (std::size_t i = 0; i < grid.size(); ++i)
            raw[i] = std::exp(gaussian_log_density(*g, grid.coords(i), grid.dimension())) * vol;
    } else if (auto m = std::get_if<MixtureSpec>(&spec)) {
        if (m->components.empty()) throw DomainError("mixture has no components");
        double total = 0.0;
        for (const auto& c : m->components) {
            if (!(c.weight > 0.0)) throw DomainError("mixture weights must be positive", c.weight);
            check_gaussian(c.gaussian, grid.dimension());
            total += c.weight;
        }
        for (const auto& c : m->components)
            for (std::size_t i = 0; i < grid.size(); ++i)
                raw[i] += c.weight / total * std::exp(gaussian_log_density(c.gaussian, grid.coords(i), grid.dimension())) * vol;
    } else {
        const auto& table = std::get<TabulatedSpec>(spec);
        auto density = read_density_csv(table.path, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) raw[i] = density[i] * vol;
    }
    const double tail = spec_tail_mass(spec, grid);
    if (tail > kMaxTailMass) {
        std::ostringstream msg;
        msg << "measure puts mass " << tail << " outside the grid window (limit " << kMaxTailMass << ")";
        throw DomainError(msg.str(), tail);
    }
    return GridMeasure(grid, std::move(raw));
}

std::vector<double> read_density_csv(const std::filesystem::path& path, const Grid& grid) {
    const std::string text = io::read_file(path);
    std::istringstream in(text);
    std::string line;
    const std::string expected = grid.dimension() == 1 ? "x,density" : "x,y,density";
    if (!std::getline(in, line) || line != expected)
        throw DomainError(path.string() + ": expected header '" + expected + "'");
    std::vector<double> density;
    density.reserve(grid.size());
    const double coord_tol = 1e-9 * grid.half_width();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = io::split_csv_line(line);
        if (static_cast<int>(cells.size()) != grid.dimension() + 1)
            throw DomainError(path.string() + ":" + std::to_string(line_no) + ": wrong number of columns");
        const std::size_t node = density.size();
        if (node >= grid.size()) throw DomainError(path.string() + ": more rows than grid nodes");
        auto x = grid.coords(node);
        for (int a = 0; a < grid.dimension(); ++a) {
            double c = parse_number(cells[a], path, line_no);
            if (std::abs(c - x[a]) > coord_tol)
                throw DomainError(path.string() + ":" + std::to_string(line_no) + ": coordinate does not match grid node", c);
        }
        double value = parse_number(cells.back(), path, line_no);
        if (!std::isfinite(value)) throw DomainError(path.string() + ": non-finite density", value);
        if (value < 0.0)
            throw DomainError(path.string() + ":" + std::to_string(line_no) + ": negative density", value);
        density.push_back(value);
    }
    if (density.size() != grid.size())
        throw DomainError(path.string() + ": expected " + std::to_string(grid.size()) + " rows, found " +
                              std::to_string(density.size()),
                          static_cast<double>(density.size()));
    return density;
}

void write_density_csv(const std::filesystem::path& path, const GridMeasure& measure) {
    const Grid& grid = measure.grid();
    std::string out = grid.dimension() == 1 ? "x,density\n" : "x,y,density\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto x = grid.coords(i);
        if (grid.dimension() == 1)
            out += io::csv_row(std::vector<double>{x[0], measure.density(i)});
        else
            out += io::csv_row(std::vector<double>{x[0], x[1], measure.density(i)});
    }
    io::write_file_atomic(path, out);
}

GridMeasure point_mass_at_center(const Grid& grid) {
    std::vector<double> w(grid.size(), 0.0);
    const int mid = (grid.points() - 1) / 2;
    w[grid.flatten(mid, grid.dimension() == 2 ? mid : 0)] = 1.0;
    return GridMeasure(grid, std::move(w));
}

}  // namespace schrolab
