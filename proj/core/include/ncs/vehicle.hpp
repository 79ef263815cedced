#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncs/abstraction.hpp"
#include "ncs/certificate.hpp"
#include "ncs/network.hpp"
#include "ncs/plant.hpp"
#include "ncs/synthesis.hpp"

namespace ncs {

// Everything needed to abstract, synthesize and simulate one loop.
struct Scenario {
    std::string name;
    PlantModel plant;
    AffineMap state_map;  // physical -> working coordinates
    AffineMap input_map;
    LyapunovCertificate certificate;
    NetworkParams network;
    DelayBounds bounds;
    Lattice lattice;
    double mu_x = 0.0;
    Variant variant = Variant::FC;
    double epsilon = 0.0;
    double theta = 0.0;
    Specification spec;

    AbstractionConfig abstraction_config() const;
};

inline constexpr double kVehicleA = 0.5;
inline constexpr double kVehicleB = 1.5;

// Bandwidth, delay and overhead figures of the surveillance example.
NetworkParams vehicle_network();

// Physical single-track vehicle on [-50,50]^2 x [-pi,pi], inputs on the grid with the given
// number of points per axis over [0,5] x [-pi/3,pi/3].
PlantModel vehicle_plant(std::size_t speed_points = 6, std::size_t steer_points = 11);

// Distance certificate in the inf-norm of the normalized vehicle: the heading gap is
// invariant under equal inputs and the position gap grows at most linearly in it, so
// V = ||x - x'||_inf, alpha = gamma = identity, lambda = 0.1 pi / cos(delta(pi/3)).
LyapunovCertificate vehicle_certificate(double a = kVehicleA, double b = kVehicleB);

// Quadratic certificate quoted for the physical vehicle (lambda = 2 u1max / cos(delta)).
LyapunovCertificate vehicle_quadratic_certificate(double a = kVehicleA, double b = kVehicleB);

struct Waypoints {
    std::vector<std::string> names;  // HOME, B1, B2, CHARGE
    std::vector<Box> regions;        // normalized planar boxes, same order
    std::vector<Box> unsafe;         // normalized planar boxes
};
Waypoints vehicle_waypoints();

// Cyclic spec through the waypoints: a nominal lattice trajectory per leg found by a
// best-first search over the plant inputs, closed back to HOME.
Specification vehicle_spec(const PlantModel& normalized, const Lattice& lattice, const Waypoints& wp,
                           std::size_t max_states = 200);

// Normalized vehicle with a reduced grid of points_per_axis per state axis.
Scenario vehicle_scenario(std::size_t points_per_axis = 21, double epsilon = 0.05);

// Contracting planar surrogate x' = -x + u on [-1,1]^2 with a region-cycle specification.
Scenario surrogate_gas_scenario(std::uint32_t n_min = 1, std::uint32_t n_max = 3);

// Scalar plant x' = -x + u on [-1,1], U = {-0.5, 0, 0.5}, V = 0.5 (x - x')^2, lambda = -2.
Scenario scalar_gas_scenario(double step = 0.1, double epsilon = 0.9, std::uint32_t n_max = 2);

}  // namespace ncs
