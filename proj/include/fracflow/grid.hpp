#pragma once
// Uniform product grids with origin 0. Fields are flattened row-major with
// the last axis fastest. Derivative stencils eat into the boundary, so every
// field carries per-axis margin widths (lo, hi) outside of which values are
// undefined (stored as NaN).

#include <cstddef>
#include <vector>

#include "fracflow/frac.hpp"

namespace fracflow::geom {

struct AxisSpec {
    double step = 0.0;
    int count = 0;
};

// h/v product chart: axes 0..n-1 are horizontal, n..n+m-1 vertical.
struct ChartSpec {
    int n = 0;
    int m = 0;
    std::vector<AxisSpec> axes;
    frac::FractionalOrder order{1.0};

    int dim() const { return n + m; }
    double coord(int axis, int index) const {
        return axes[std::size_t(axis)].step * index;
    }
    std::size_t node_count() const;
    void validate() const;  // throws config_error on bad dimensions
};

std::size_t flat_index(const std::vector<int>& counts, const std::vector<int>& idx);
// odometer walk over all indices, last axis fastest; false when exhausted
bool advance_index(const std::vector<int>& counts, std::vector<int>& idx);

class GridField {
  public:
    GridField() = default;
    explicit GridField(std::vector<int> counts, double value = 0.0);

    double at(const std::vector<int>& idx) const {
        return v_[flat_index(counts_, idx)];
    }
    double& at(const std::vector<int>& idx) { return v_[flat_index(counts_, idx)]; }
    const std::vector<int>& counts() const { return counts_; }
    std::vector<double>& raw() { return v_; }
    const std::vector<double>& raw() const { return v_; }
    std::size_t size() const { return v_.size(); }

    // idx lies inside the defined window
    bool defined(const std::vector<int>& idx) const;
    // widest margins of this field and src, in place
    void absorb_margins(const GridField& src);

    std::vector<int> lo;  // undefined layer widths per axis
    std::vector<int> hi;

  private:
    std::vector<int> counts_;
    std::vector<double> v_;
};

// node coordinate along one axis as a field (margin 0)
GridField coordinate_field(const ChartSpec& chart, int axis);

// Caputo derivative along one axis; the lower terminal sits at the field's
// own lo margin so derived fields stay well defined. Bumps lo by one node
// (and hi too for the centered alpha = 1 stencil).
GridField axis_derivative(const ChartSpec& chart, const GridField& f, int axis);

}  // namespace fracflow::geom
