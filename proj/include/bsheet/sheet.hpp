#pragma once

#include <bsheet/error.hpp>
#include <bsheet/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bsheet {

/// Rectangular lattice [0, t_max] x [0, x_max] with nt x nx cells.
struct GridSpec {
    double t_max = 1.0;
    double x_max = 1.0;
    int nt = 1;
    int nx = 1;

    double dt() const noexcept { return t_max / nt; }
    double dx() const noexcept { return x_max / nx; }

    void validate() const {
        if (!(t_max > 0.0) || !std::isfinite(t_max))
            throw ConfigError("grid: t_max must be positive and finite");
        if (!(x_max > 0.0) || !std::isfinite(x_max))
            throw ConfigError("grid: x_max must be positive and finite");
        if (nt < 1 || nx < 1) throw ConfigError("grid: nt and nx must be at least 1");
        if (static_cast<std::uint64_t>(nt) >= lane::kMaxSheetRow)
            throw ConfigError("grid: nt exceeds the addressable row count");
        if (!(dt() > 0.0) || !(dx() > 0.0)) throw ConfigError("grid: cell sizes underflow");
    }

    /// Grid with the given number of cells per unit length in each direction.
    static GridSpec per_unit(double t_max, double x_max, int cells_per_unit_t, int cells_per_unit_x) {
        GridSpec spec{t_max, x_max,
                      static_cast<int>(std::lround(t_max * cells_per_unit_t)),
                      static_cast<int>(std::lround(x_max * cells_per_unit_x))};
        spec.validate();
        return spec;
    }
};

/// A realized Brownian sheet on a lattice: values(i, j) = B(i*dt, j*dx).
/// Immutable after construction.
class SheetGrid {
public:
    SheetGrid(GridSpec spec, std::vector<double> values, std::uint64_t seed, std::uint64_t substream,
              bool antithetic = false)
        : spec_(spec), values_(std::move(values)), seed_(seed), substream_(substream), antithetic_(antithetic) {}

    const GridSpec& spec() const noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t substream() const noexcept { return substream_; }
    bool antithetic() const noexcept { return antithetic_; }

    int rows() const noexcept { return spec_.nt + 1; }
    int cols() const noexcept { return spec_.nx + 1; }

    double at(int i, int j) const noexcept {
        return values_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(j)];
    }

    std::span<const double> row(int i) const noexcept {
        return {values_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()),
                static_cast<std::size_t>(cols())};
    }

    std::span<const double> values() const noexcept { return values_; }

    /// Increment of the cell [(i-1)dt, i dt] x [(j-1)dx, j dx], i, j >= 1.
    double cell_increment(int i, int j) const noexcept {
        return at(i, j) - at(i - 1, j) - at(i, j - 1) + at(i - 1, j - 1);
    }

private:
    GridSpec spec_;
    std::vector<double> values_;
    std::uint64_t seed_;
    std::uint64_t substream_;
    bool antithetic_;
};

namespace detail {

// Appends rows [first_row, last_row] to `values` (row-major, `cols` wide),
// continuing from the row already stored at first_row - 1. Row i draws its
// cell increments from lane i of the replication's substream, so a row's
// content never depends on how many rows were generated before it.
inline void append_rows(std::vector<double>& values, int cols, int first_row, int last_row, double scale,
                        std::uint64_t seed, std::uint64_t substream, double sign) {
    values.resize(static_cast<std::size_t>(last_row + 1) * static_cast<std::size_t>(cols));
    for (int i = first_row; i <= last_row; ++i) {
        CounterStream stream(seed, substream, static_cast<std::uint32_t>(i));
        const double* prev = values.data() + static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(cols);
        double* cur = values.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols);
        cur[0] = 0.0;
        double column_sum = 0.0;
        for (int j = 1; j < cols; ++j) {
            column_sum += sign * scale * stream.next_normal();
            cur[j] = prev[j] + column_sum;
        }
    }
}

}  // namespace detail

/// Samples B on the lattice of `spec` as cumulative sums of independent
/// N(0, dt*dx) cell increments. A pure function of (spec, seed, substream);
/// `antithetic` negates every increment.
inline SheetGrid generate_sheet(const GridSpec& spec, std::uint64_t seed, std::uint64_t substream,
                                bool antithetic = false) {
    spec.validate();
    const int cols = spec.nx + 1;
    std::vector<double> values(static_cast<std::size_t>(cols), 0.0);
    detail::append_rows(values, cols, 1, spec.nt, std::sqrt(spec.dt() * spec.dx()), seed, substream,
                        antithetic ? -1.0 : 1.0);
    return SheetGrid(spec, std::move(values), seed, substream, antithetic);
}

/// Lattice lookup of B(t, x), rounding down to the nearest node.
inline double sheet_value_at(const SheetGrid& grid, double t, double x) {
    const GridSpec& spec = grid.spec();
    constexpr double slack = 1e-12;
    if (!(t >= 0.0) || !(x >= 0.0) || t > spec.t_max * (1.0 + slack) || x > spec.x_max * (1.0 + slack))
        throw DomainError("sheet_value_at: (t, x) outside the grid rectangle");
    // Nodes computed as i*dt may sit an ulp below their exact value.
    auto node = [](double s, double step, int n) {
        const auto k = static_cast<int>(std::floor(s / step + 1e-9));
        return k > n ? n : k;
    };
    return grid.at(node(t, spec.dt(), spec.nt), node(x, spec.dx(), spec.nx));
}

/// Appends rows of fresh increments so the sheet covers [0, new_t_max].
/// The original lattice block is copied unchanged.
inline SheetGrid extend_sheet(const SheetGrid& grid, double new_t_max) {
    const GridSpec& spec = grid.spec();
    if (!(new_t_max > spec.t_max))
        throw ConfigError("extend_sheet: new horizon must exceed the current one");
    const double steps = (new_t_max - spec.t_max) / spec.dt();
    const double whole = std::round(steps);
    if (whole < 1.0 || std::abs(steps - whole) > 1e-9 * std::max(1.0, whole))
        throw ConfigError("extend_sheet: new horizon is not on the lattice (must add a whole number of dt)");

    GridSpec extended = spec;
    extended.nt = spec.nt + static_cast<int>(whole);
    extended.t_max = new_t_max;
    extended.validate();

    std::vector<double> values(grid.values().begin(), grid.values().end());
    detail::append_rows(values, spec.nx + 1, spec.nt + 1, extended.nt, std::sqrt(spec.dt() * spec.dx()),
                        grid.seed(), grid.substream(), grid.antithetic() ? -1.0 : 1.0);
    return SheetGrid(extended, std::move(values), grid.seed(), grid.substream(), grid.antithetic());
}

}  // namespace bsheet
