#include "ncs/plant.hpp"

#include <boost/numeric/odeint.hpp>
#include <algorithm>
#include <cmath>

#include "ncs/error.hpp"
#include "ncs/expr.hpp"

namespace ncs {

namespace odeint = boost::numeric::odeint;

void PlantModel::validate() const {
    if (dim_x == 0) throw InvalidArgument("plant state dimension must be positive");
    if (!field) throw InvalidArgument("plant has no vector field");
    if (state_box.empty() || state_box.dim() != dim_x) throw InvalidArgument("state box dimension mismatch");
    if (init_box.empty() || init_box.dim() != dim_x) throw InvalidArgument("initial box dimension mismatch");
    if (!state_box.contains(init_box)) throw InvalidArgument("initial set is not contained in the state box");
    if (inputs.empty()) throw InvalidArgument("input set is empty");
    for (const auto& u : inputs)
        if (u.size() != dim_u) throw InvalidArgument("input point dimension mismatch");
    if (u_ref >= inputs.size()) throw InvalidArgument("reference input is not an element of the input set");
    if (!(tau > 0.0)) throw InvalidArgument("sampling time must be positive");
    Vec dx(dim_x);
    for (const auto& b : state_box.boxes()) {
        Vec mid(dim_x);
        for (std::size_t i = 0; i < dim_x; ++i) mid[i] = 0.5 * (b.lo[i] + b.hi[i]);
        for (const Vec* x : std::initializer_list<const Vec*>{&b.lo, &b.hi, &mid})
            for (const auto& u : inputs) {
                field(*x, u, dx);
                for (double d : dx)
                    if (!std::isfinite(d)) throw InvalidArgument("vector field is not finite on the state box");
            }
    }
}

Vec flow(const PlantModel& p, const Vec& x, const Vec& u, double t) {
    if (!(t > 0.0)) return x;
    using Stepper = odeint::runge_kutta_dopri5<Vec>;
    auto ctrl = odeint::make_controlled<Stepper>(p.flow.abs_tol, p.flow.rel_tol);
    auto sys = [&](const Vec& s, Vec& ds, double) { p.field(s, u, ds); };
    Vec state = x;
    double now = 0.0;
    double dt = std::min(t, 0.1);
    std::size_t steps = 0;
    const double end_tol = 1e-14 * std::max(1.0, t);
    while (t - now > end_tol) {
        if (++steps > p.flow.max_steps) throw IntegrationDiverged("step budget exhausted");
        dt = std::min(dt, t - now);
        auto res = ctrl.try_step(sys, state, now, dt);
        if (res == odeint::fail) {
            if (dt < p.flow.min_step) throw IntegrationDiverged("step size collapsed below the minimum");
            continue;
        }
        for (double v : state)
            if (!std::isfinite(v)) throw IntegrationDiverged("state became non-finite");
    }
    return state;
}

Vec AffineMap::forward(const Vec& x) const {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - offset[i]) / scale[i];
    return y;
}

Vec AffineMap::inverse(const Vec& y) const {
    Vec x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = offset[i] + scale[i] * y[i];
    return x;
}

Box AffineMap::forward(const Box& b) const {
    Box r{forward(b.lo), forward(b.hi)};
    for (std::size_t i = 0; i < r.lo.size(); ++i)
        if (r.lo[i] > r.hi[i]) std::swap(r.lo[i], r.hi[i]);
    return r;
}

AffineMap unit_map(const Box& bounds) {
    AffineMap m;
    for (std::size_t i = 0; i < bounds.dim(); ++i) {
        double lo = bounds.lo[i], hi = bounds.hi[i];
        if (!(hi > lo)) throw DegenerateAxis("axis " + std::to_string(i + 1) + " has zero width");
        if (std::abs(lo + hi) <= 1e-12 * (hi - lo)) {
            m.offset.push_back(0.0);
            m.scale.push_back(hi);
        } else if (lo == 0.0) {
            m.offset.push_back(0.0);
            m.scale.push_back(hi);
        } else if (hi == 0.0) {
            m.offset.push_back(0.0);
            m.scale.push_back(-lo);
        } else {
            m.offset.push_back(0.5 * (lo + hi));
            m.scale.push_back(0.5 * (hi - lo));
        }
    }
    return m;
}

Box input_bounds(const PlantModel& p) {
    Box b{p.inputs.at(0), p.inputs.at(0)};
    for (const auto& u : p.inputs)
        for (std::size_t i = 0; i < u.size(); ++i) {
            b.lo[i] = std::min(b.lo[i], u[i]);
            b.hi[i] = std::max(b.hi[i], u[i]);
        }
    return b;
}

NormalizedPlant normalize(const PlantModel& p, std::optional<Box> input_box) {
    NormalizedPlant n;
    n.state_map = unit_map(p.state_box.hull());
    n.input_map = unit_map(input_box ? *input_box : input_bounds(p));
    n.plant = p;
    std::vector<Box> sb, ib;
    for (const auto& b : p.state_box.boxes()) sb.push_back(n.state_map.forward(b));
    for (const auto& b : p.init_box.boxes()) ib.push_back(n.state_map.forward(b));
    n.plant.state_box = BoxUnion(sb);
    n.plant.init_box = BoxUnion(ib);
    n.plant.inputs.clear();
    for (const auto& u : p.inputs) n.plant.inputs.push_back(n.input_map.forward(u));
    auto field = p.field;
    auto sm = n.state_map;
    auto im = n.input_map;
    n.plant.field = [field, sm, im](const Vec& y, const Vec& v, Vec& dy) {
        Vec x = sm.inverse(y);
        Vec u = im.inverse(v);
        field(x, u, dy);
        for (std::size_t i = 0; i < dy.size(); ++i) dy[i] /= sm.scale[i];
    };
    return n;
}

VectorField linear_field(Matrix a, Matrix b) {
    return [a = std::move(a), b = std::move(b)](const Vec& x, const Vec& u, Vec& dx) {
        for (std::size_t i = 0; i < dx.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) s += a[i][j] * x[j];
            for (std::size_t j = 0; j < u.size() && i < b.size(); ++j) s += b[i][j] * u[j];
            dx[i] = s;
        }
    };
}

VectorField single_track_vehicle(double a, double b) {
    return [a, b](const Vec& x, const Vec& u, Vec& dx) {
        double delta = std::atan(a * std::tan(u[1]) / b);
        double c = std::cos(delta);
        dx[0] = u[0] * std::cos(x[2] + delta) / c;
        dx[1] = u[0] * std::sin(x[2] + delta) / c;
        dx[2] = u[0] * std::tan(u[1]) / b;
    };
}

VectorField expression_field(const std::vector<std::string>& equations, std::size_t dim_x,
                             std::size_t dim_u, const std::map<std::string, double>& params) {
    if (equations.size() != dim_x) throw ConfigError("expected one equation per state component");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < dim_x; ++i) names.push_back("x" + std::to_string(i + 1));
    for (std::size_t i = 0; i < dim_u; ++i) names.push_back("u" + std::to_string(i + 1));
    std::vector<Expression> exprs;
    for (const auto& eq : equations) exprs.push_back(Expression::parse(eq, names, params));
    return [exprs, dim_x, dim_u](const Vec& x, const Vec& u, Vec& dx) {
        double vars[64];
        std::vector<double> big;
        double* v = vars;
        if (dim_x + dim_u > 64) {
            big.resize(dim_x + dim_u);
            v = big.data();
        }
        std::copy(x.begin(), x.end(), v);
        std::copy(u.begin(), u.end(), v + dim_x);
        for (std::size_t i = 0; i < exprs.size(); ++i) dx[i] = exprs[i].eval(v);
    };
}

std::vector<Vec> input_grid(const Box& box, const Vec& step) {
    return Lattice(BoxUnion(box), step).enumerate();
}

}  // namespace ncs
