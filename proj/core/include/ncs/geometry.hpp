#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace ncs {

using Vec = std::vector<double>;
using Coord = std::vector<std::int64_t>;

// Points closer than this to a box face count as inside.
inline constexpr double kBoundaryTol = 1e-9;

double inf_norm(const Vec& a);
double inf_dist(const Vec& a, const Vec& b);
double euclid_dist(const Vec& a, const Vec& b);

struct Box {
    Vec lo;
    Vec hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(const Vec& x, double tol = kBoundaryTol) const;
    double min_side() const;
    bool operator==(const Box&) const = default;
};

class BoxUnion {
public:
    BoxUnion() = default;
    explicit BoxUnion(std::vector<Box> boxes);
    BoxUnion(Box box);

    std::size_t dim() const;
    std::size_t size() const { return boxes_.size(); }
    bool empty() const { return boxes_.empty(); }
    const std::vector<Box>& boxes() const { return boxes_; }
    const Box& operator[](std::size_t i) const { return boxes_[i]; }

    // First box (declaration order) containing x.
    std::optional<std::size_t> locate(const Vec& x, double tol = kBoundaryTol) const;
    bool contains(const Vec& x, double tol = kBoundaryTol) const { return locate(x, tol).has_value(); }
    bool contains(const BoxUnion& other) const;
    double mu_hat() const;
    Box hull() const;

private:
    std::vector<Box> boxes_;
};

struct AxisRange {
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    std::int64_t count() const { return hi >= lo ? hi - lo + 1 : 0; }
};

// The grid step*Z^n intersected with a union of boxes.
class Lattice {
public:
    Lattice() = default;
    Lattice(BoxUnion region, Vec step);
    Lattice(BoxUnion region, double step);

    std::size_t dim() const { return step_.size(); }
    const Vec& step() const { return step_; }
    double max_step() const;
    const BoxUnion& region() const { return region_; }
    double mu_hat() const { return region_.mu_hat(); }

    // Worst-case inf-norm quantization error: half a step on axes whose box faces sit on
    // the grid, a full step otherwise.
    double accuracy() const;

    AxisRange axis_range(std::size_t box, std::size_t axis) const;

    Coord quantize_coord(const Vec& a) const;
    Vec quantize(const Vec& a) const { return point(quantize_coord(a)); }
    Vec point(const Coord& k) const;
    bool contains_coord(const Coord& k) const;

    std::uint64_t count() const;
    std::vector<std::uint64_t> axis_counts(std::size_t box = 0) const;

    // Lexicographic, each point once. Throws CapacityExceeded past the budget.
    std::vector<Coord> enumerate_coords(std::uint64_t budget = UINT64_MAX) const;
    std::vector<Vec> enumerate(std::uint64_t budget = UINT64_MAX) const;

    // Lattice points of the region inside the inf-ball of given radius around center (a grid
    // point), lexicographic.
    void for_each_in_ball(const Coord& center, double radius,
                          const std::function<void(const Coord&)>& visit) const;

private:
    BoxUnion region_;
    Vec step_;
    std::vector<std::vector<AxisRange>> ranges_;
};

}  // namespace ncs
