#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncs/geometry.hpp"

namespace ncs {

using VectorField = std::function<void(const Vec& x, const Vec& u, Vec& dxdt)>;

struct FlowOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double min_step = 1e-12;
    std::size_t max_steps = 1000000;
};

struct PlantModel {
    std::size_t dim_x = 0;
    std::size_t dim_u = 0;
    VectorField field;
    BoxUnion state_box;
    BoxUnion init_box;
    std::vector<Vec> inputs;
    double tau = 1.0;
    std::size_t u_ref = 0;  // index into inputs
    FlowOptions flow;

    const Vec& reference_input() const { return inputs.at(u_ref); }
    bool in_state_space(const Vec& x) const { return state_box.contains(x); }

    // Throws InvalidArgument on the first broken invariant; samples the box corners and
    // centre of every state box for finite derivatives.
    void validate() const;
};

// Solution at time t from x under constant u. Throws IntegrationDiverged when the adaptive
// step collapses below options.min_step or the state becomes non-finite.
Vec flow(const PlantModel& p, const Vec& x, const Vec& u, double t);
inline Vec step_map(const PlantModel& p, const Vec& x, const Vec& u) { return flow(p, x, u, p.tau); }

// Componentwise x -> (x - offset) / scale.
struct AffineMap {
    Vec offset;
    Vec scale;

    Vec forward(const Vec& x) const;
    Vec inverse(const Vec& y) const;
    Box forward(const Box& b) const;
};

// Symmetric [-m, m] maps to [-1, 1], [0, h] to [0, 1], [l, 0] to [-1, 0], anything else
// to [-1, 1] about its centre.
AffineMap unit_map(const Box& bounds);

struct NormalizedPlant {
    PlantModel plant;
    AffineMap state_map;
    AffineMap input_map;
};

Box input_bounds(const PlantModel& p);
NormalizedPlant normalize(const PlantModel& p, std::optional<Box> input_box = std::nullopt);

using Matrix = std::vector<std::vector<double>>;

VectorField linear_field(Matrix a, Matrix b);
// Rear-axle-driven single-track model: x = (px, py, heading), u = (speed, steering).
VectorField single_track_vehicle(double a, double b);
VectorField expression_field(const std::vector<std::string>& equations, std::size_t dim_x,
                             std::size_t dim_u, const std::map<std::string, double>& params = {});

// Inclusive grid over a box: lo, lo + step, ..., up to hi (within tolerance).
std::vector<Vec> input_grid(const Box& box, const Vec& step);

}  // namespace ncs
