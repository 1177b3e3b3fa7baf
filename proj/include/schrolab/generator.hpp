#pragma once

#include <limits>
#include <string>

#include "schrolab/grid.hpp"

namespace schrolab {

/// Diffusion generator: the Laplacian on R^d (reference Lebesgue, CD(0, d))
/// or the 1D Ornstein-Uhlenbeck operator f'' - x f' (reference N(0,1),
/// CD(1, inf)).
class Generator {
public:
    enum class Kind { Laplacian, OrnsteinUhlenbeck };

    static Generator laplacian(int dimension);
    static Generator ornstein_uhlenbeck();

    Kind kind() const noexcept { return kind_; }
    int dimension() const noexcept { return dimension_; }
    /// Curvature parameter rho of the CD(rho, n) condition.
    double cd_rho() const noexcept { return kind_ == Kind::Laplacian ? 0.0 : 1.0; }
    /// Dimension parameter n of the CD(rho, n) condition (inf for OU).
    double cd_n() const noexcept {
        return kind_ == Kind::Laplacian ? static_cast<double>(dimension_) : std::numeric_limits<double>::infinity();
    }
    /// The reversible measure m evaluated on `grid`.
    ReferenceMeasure reference(const Grid& grid) const;
    std::string name() const;

    bool operator==(const Generator&) const = default;

private:
    Generator(Kind kind, int dimension) : kind_(kind), dimension_(dimension) {}

    Kind kind_;
    int dimension_;
};

}  // namespace schrolab
