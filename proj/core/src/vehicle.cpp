#include "ncs/vehicle.hpp"

#include <fmt/format.h>
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <queue>
#include <unordered_set>

#include "ncs/error.hpp"

namespace ncs {

AbstractionConfig Scenario::abstraction_config() const {
    return AbstractionConfig{lattice, mu_x, bounds, variant, epsilon, theta};
}

NetworkParams vehicle_network() {
    NetworkParams p;
    p.b_min = 100.0;
    p.b_max = 1000.0;
    p.n_pc_plus = 0.2;
    p.n_cp_plus = 0.2;
    p.d_ctrl_min = 0.01;
    p.d_ctrl_max = 0.1;
    p.d_req_min = 0.05;
    p.d_req_max = 0.2;
    p.d_net_min = 0.1;
    p.d_net_max = 0.25;
    p.n_pd = 1;
    p.tau = 1.0;
    return p;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 1) return {0.5 * (lo + hi)};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

std::size_t find_input(const std::vector<Vec>& inputs, const Vec& u) {
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inf_dist(inputs[i], u) < 1e-12) return i;
    throw InvalidArgument("reference input is not on the input grid");
}

bool planar_inside(const Box& b, const Vec& x) {
    return x[0] >= b.lo[0] - 1e-12 && x[0] <= b.hi[0] + 1e-12 && x[1] >= b.lo[1] - 1e-12 && x[1] <= b.hi[1] + 1e-12;
}

Vec planar_centre(const Box& b) { return {0.5 * (b.lo[0] + b.hi[0]), 0.5 * (b.lo[1] + b.hi[1])}; }

// Spec states are lattice points; each reached point becomes one state.
struct SpecBuilder {
    const Lattice& lattice;
    Specification q;
    std::map<Coord, std::uint32_t> index;

    std::uint32_t point(const Coord& c) {
        auto [it, fresh] = index.try_emplace(c, static_cast<std::uint32_t>(q.points.size()));
        if (fresh) {
            q.points.push_back(lattice.point(c));
            q.names.emplace_back();
        }
        return it->second;
    }
    void edge(std::uint32_t a, std::uint32_t b) {
        if (!q.has_transition(a, b)) q.transitions.emplace_back(a, b);
    }
};


// Nominal lattice path from start into the goal box, best-first on steps taken plus the
// planar distance left; ties resolve by discovery order.
template <class Unsafe>
std::vector<Coord> shortest_leg(const PlantModel& plant, const Lattice& lattice, const Coord& start, const Box& goal,
                                Unsafe unsafe) {
    double reach = 0.0;
    for (const auto& u : plant.inputs) reach = std::max(reach, u[0] * plant.tau);
    if (!(reach > 0.0)) throw InvalidArgument("no input moves the vehicle");
    auto h = [&](const Coord& c) {
        Vec y = lattice.point(c);
        double dx = std::max({goal.lo[0] - y[0], 0.0, y[0] - goal.hi[0]});
        double dy = std::max({goal.lo[1] - y[1], 0.0, y[1] - goal.hi[1]});
        return std::hypot(dx, dy) / (reach + lattice.max_step());
    };
    struct Item {
        double f;
        std::uint64_t order;
        Coord c;
        bool operator>(const Item& o) const { return f != o.f ? f > o.f : order > o.order; }
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    std::map<Coord, std::pair<Coord, std::uint32_t>> parent;  // node -> (predecessor, steps)
    std::uint64_t order = 0;
    parent.emplace(start, std::pair{start, 0u});
    open.push({h(start), order++, start});
    while (!open.empty()) {
        Item it = open.top();
        open.pop();
        std::uint32_t g = parent.at(it.c).second;
        if (planar_inside(goal, lattice.point(it.c)) && !(it.c == start)) {
            std::vector<Coord> path;
            for (Coord c = it.c; !(c == start); c = parent.at(c).first) path.push_back(c);
            std::reverse(path.begin(), path.end());
            return path;
        }
        if (parent.size() > 2000000) break;
        for (const auto& u : plant.inputs) {
            if (u[0] <= 0.0) continue;
            Vec x = step_map(plant, lattice.point(it.c), u);
            if (!plant.in_state_space(x) || unsafe(x)) continue;
            Coord c = lattice.quantize_coord(x);
            if (parent.contains(c)) continue;
            parent.emplace(c, std::pair{it.c, g + 1});
            open.push({g + 1 + h(c), order++, c});
        }
    }
    throw InvalidArgument("waypoint leg is unreachable on the lattice");
}

}  // namespace

PlantModel vehicle_plant(std::size_t speed_points, std::size_t steer_points) {
    const double pi = std::numbers::pi;
    PlantModel p;
    p.dim_x = 3;
    p.dim_u = 2;
    p.field = single_track_vehicle(kVehicleA, kVehicleB);
    Box x{{-50.0, -50.0, -pi}, {50.0, 50.0, pi}};
    p.state_box = BoxUnion(x);
    p.init_box = BoxUnion(x);
    for (double v : linspace(0.0, 5.0, speed_points))
        for (double s : linspace(-pi / 3.0, pi / 3.0, steer_points)) p.inputs.push_back({v, s});
    // standstill with the straightest steering
    p.u_ref = steer_points / 2;
    p.tau = 1.0;
    return p;
}

LyapunovCertificate vehicle_certificate(double a, double b) {
    double delta = std::atan(a * std::tan(std::numbers::pi / 3.0) / b);
    double lambda = 0.1 * std::numbers::pi / std::cos(delta);
    auto id = KFunction::power(1.0, 1.0);
    return LyapunovCertificate::inf_norm(1.0, lambda, id, id, id);
}

LyapunovCertificate vehicle_quadratic_certificate(double a, double b) {
    double delta = std::atan(a * std::tan(std::numbers::pi / 3.0) / b);
    return LyapunovCertificate::squared_euclidean(0.5, 2.0 * 5.0 / std::cos(delta), KFunction::power(0.5, 2.0),
                                                  KFunction::power(1.5, 2.0), KFunction::power(6.0, 1.0));
}

Waypoints vehicle_waypoints() {
    Waypoints w;
    w.names = {"HOME", "B1", "B2", "CHARGE"};
    w.regions = {Box{{-0.75, -0.75}, {-0.45, -0.45}}, Box{{0.45, -0.75}, {0.75, -0.45}},
                 Box{{0.45, 0.45}, {0.75, 0.75}}, Box{{-0.75, 0.45}, {-0.45, 0.75}}};
    w.unsafe = {Box{{-0.25, -0.25}, {0.25, 0.25}}};
    return w;
}

Specification vehicle_spec(const PlantModel& plant, const Lattice& lattice, const Waypoints& wp,
                           std::size_t max_states) {
    SpecBuilder sb{lattice, {}, {}};
    auto unsafe = [&](const Vec& x) {
        return std::any_of(wp.unsafe.begin(), wp.unsafe.end(), [&](const Box& b) { return planar_inside(b, x); });
    };
    Vec start = planar_centre(wp.regions.at(0));
    Coord cur = lattice.quantize_coord({start[0], start[1], 0.0});
    std::uint32_t first = sb.point(cur);
    sb.q.initial.push_back(first);
    std::uint32_t prev = first;
    for (std::size_t leg = 1; leg <= wp.regions.size(); ++leg) {
        const Box& goal = wp.regions[leg % wp.regions.size()];
            for (const Coord& c : shortest_leg(plant, lattice, cur, goal, unsafe)) {
            cur = c;
            std::uint32_t id = sb.point(cur);
            sb.edge(prev, id);
            prev = id;
            if (sb.q.size() > max_states) throw CapacityExceeded(fmt::format("spec exceeds {} states", max_states));
        }
        std::uint32_t id = sb.point(cur);
        sb.q.regions[wp.names[leg % wp.names.size()]].push_back(id);
        if (sb.q.names[id].empty()) sb.q.names[id] = wp.names[leg % wp.names.size()];
    }
    // close the cycle at the starting point
    sb.edge(prev, first);
    if (sb.q.names[first].empty()) sb.q.names[first] = wp.names[0];
    sb.q.regions[wp.names[0]].push_back(first);
    for (std::uint32_t i = 0; i < sb.q.size(); ++i)
        if (unsafe(sb.q.points[i])) sb.q.regions["UNSAFE"].push_back(i);
    sb.q.validate();
    return sb.q;
}

Scenario vehicle_scenario(std::size_t points_per_axis, double epsilon) {
    if (points_per_axis < 3 || points_per_axis % 2 == 0) throw InvalidArgument("points per axis must be odd and >= 3");
    Scenario s;
    s.name = "vehicle";
    PlantModel phys = vehicle_plant(3, 5);
    NormalizedPlant np = normalize(phys);
    s.plant = np.plant;
    s.state_map = np.state_map;
    s.input_map = np.input_map;
    s.certificate = vehicle_certificate();
    s.network = vehicle_network();
    // message sizes follow the full-resolution encoding (201 points per axis, 66 inputs)
    s.bounds = compute_delay_bounds(s.network, 201ull * 201ull * 201ull, 66);
    s.lattice = Lattice(s.plant.state_box, 2.0 / static_cast<double>(points_per_axis - 1));
    s.mu_x = s.lattice.accuracy();
    s.variant = Variant::FC;
    s.epsilon = epsilon;
    s.theta = std::max(s.mu_x, epsilon - s.mu_x);
    s.spec = vehicle_spec(s.plant, s.lattice, vehicle_waypoints());
    return s;
}

namespace {

// Spec generated by exhausting the symbolic model under a feedback rule on (last element,
// held input): every lattice sample the rule can produce becomes a state.
Specification policy_spec(const Scenario& sc, const std::function<InputId(const Vec&, InputId)>& rule,
                          std::size_t budget) {
    Abstraction abs(sc.plant, sc.certificate, sc.abstraction_config());
    SpecBuilder sb{sc.lattice, {}, {}};
    std::unordered_set<std::string> seen;
    std::deque<SymbolicState> queue;
    for (auto& s : abs.initial_symbolic_states()) {
        sb.q.initial.push_back(sb.point(s.last()));
        if (seen.insert(state_key(s)).second) queue.push_back(std::move(s));
    }
    while (!queue.empty()) {
        SymbolicState s = std::move(queue.front());
        queue.pop_front();
        InputId u = rule(sc.lattice.point(s.last()), s.held);
        for (auto& nxt : abs.successors(s, u)) {
            std::uint32_t a = sb.point(s.last());
            for (const auto& c : nxt.burst) {
                std::uint32_t b = sb.point(c);
                sb.edge(a, b);
                a = b;
            }
            if (seen.insert(state_key(nxt)).second) {
                if (seen.size() > budget) throw CapacityExceeded("policy spec exploration exceeds budget");
                queue.push_back(std::move(nxt));
            }
        }
    }
    sb.q.validate();
    return sb.q;
}

}  // namespace

Scenario surrogate_gas_scenario(std::uint32_t n_min, std::uint32_t n_max) {
    Scenario s;
    s.name = "surrogate";
    PlantModel& p = s.plant;
    p.dim_x = 2;
    p.dim_u = 2;
    p.field = linear_field({{-1.0, 0.0}, {0.0, -1.0}}, {{1.0, 0.0}, {0.0, 1.0}});
    p.state_box = BoxUnion(Box{{-1.0, -1.0}, {1.0, 1.0}});
    p.init_box = BoxUnion(Box{{-0.2, -0.2}, {0.2, 0.2}});
    for (double a : {-0.5, 0.0, 0.5})
        for (double b : {-0.5, 0.0, 0.5}) p.inputs.push_back({a, b});
    p.u_ref = find_input(p.inputs, {0.0, 0.0});
    p.tau = 1.0;
    s.state_map = AffineMap{{0.0, 0.0}, {1.0, 1.0}};
    s.input_map = AffineMap{{0.0, 0.0}, {1.0, 1.0}};
    auto id = KFunction::power(1.0, 1.0);
    s.certificate = LyapunovCertificate::inf_norm(1.0, -1.0, id, id, id);
    s.bounds = fixed_delay_bounds(n_min, n_max);
    s.lattice = Lattice(p.state_box, 0.1);
    s.mu_x = s.lattice.accuracy();
    s.variant = Variant::GAS;
    s.theta = 0.25;
    s.epsilon = s.mu_x + s.theta;

    std::vector<Vec> targets = {{0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}};
    std::vector<InputId> target_input;
    for (const auto& t : targets) target_input.push_back(static_cast<InputId>(find_input(p.inputs, t)));
    auto rule = [&](const Vec& w, InputId held) -> InputId {
        auto it = std::find(target_input.begin(), target_input.end(), held);
        if (it == target_input.end()) return target_input[0];
        std::size_t j = it - target_input.begin();
        if (inf_dist(w, targets[j]) <= 0.15) return target_input[(j + 1) % targets.size()];
        return held;
    };
    s.spec = policy_spec(s, rule, 200000);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        std::string name = fmt::format("T{}", j);
        for (std::uint32_t i = 0; i < s.spec.size(); ++i)
            if (inf_dist(s.spec.points[i], targets[j]) <= 0.15) {
                s.spec.regions[name].push_back(i);
                if (s.spec.names[i].empty()) s.spec.names[i] = name;
            }
    }
    return s;
}

Scenario scalar_gas_scenario(double step, double epsilon, std::uint32_t n_max) {
    Scenario s;
    s.name = "scalar";
    PlantModel& p = s.plant;
    p.dim_x = 1;
    p.dim_u = 1;
    p.field = linear_field({{-1.0}}, {{1.0}});
    p.state_box = BoxUnion(Box{{-1.0}, {1.0}});
    p.init_box = BoxUnion(Box{{-1.0}, {1.0}});
    p.inputs = {{-0.5}, {0.0}, {0.5}};
    p.u_ref = 1;
    p.tau = 1.0;
    s.state_map = AffineMap{{0.0}, {1.0}};
    s.input_map = AffineMap{{0.0}, {1.0}};
    s.certificate = LyapunovCertificate::squared_euclidean(0.5, -2.0, KFunction::power(0.5, 2.0),
                                                           KFunction::power(0.5, 2.0), KFunction::power(2.0, 1.0));
    s.bounds = fixed_delay_bounds(1, n_max);
    s.lattice = Lattice(p.state_box, step);
    s.mu_x = s.lattice.accuracy();
    s.variant = Variant::GAS;
    s.epsilon = epsilon;
    s.theta = epsilon - s.mu_x;
    // settle at the origin under u = 0
    s.spec = policy_spec(s, [](const Vec&, InputId) -> InputId { return 1; }, 100000);
    for (std::uint32_t i = 0; i < s.spec.size(); ++i)
        if (std::abs(s.spec.points[i][0]) < 1e-9) {
            s.spec.names[i] = "ORIGIN";
            s.spec.regions["ORIGIN"].push_back(i);
        }
    return s;
}

}  // namespace ncs
