#include "ncs/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ncs/error.hpp"

namespace ncs {

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) {
    auto m = n.Mark();
    if (m.line >= 0) throw ConfigError(fmt::format("line {}, column {}: {}: {}", m.line + 1, m.column + 1, field, msg));
    throw ConfigError(fmt::format("{}: {}", field, msg));
}

template <class T>
T as(const YAML::Node& n, const std::string& field) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        fail(n, field, "wrong type");
    }
}

template <class T>
T get(const YAML::Node& parent, const char* key, const std::string& ctx, T fallback) {
    YAML::Node n = parent[key];
    if (!n) return fallback;
    return as<T>(n, ctx + "." + key);
}

YAML::Node need(const YAML::Node& parent, const char* key, const std::string& ctx) {
    YAML::Node n = parent[key];
    if (!n) fail(parent, ctx, fmt::format("missing field '{}'", key));
    return n;
}

Vec vec(const YAML::Node& n, const std::string& field) {
    if (n.IsScalar()) return {as<double>(n, field)};
    if (!n.IsSequence()) fail(n, field, "expected a number list");
    return as<Vec>(n, field);
}

Box box(const YAML::Node& n, const std::string& field) {
    Box b{vec(need(n, "lo", field), field + ".lo"), vec(need(n, "hi", field), field + ".hi")};
    if (b.lo.size() != b.hi.size()) fail(n, field, "lo and hi differ in dimension");
    for (std::size_t i = 0; i < b.dim(); ++i)
        if (!(b.lo[i] <= b.hi[i])) fail(n, field, fmt::format("lo > hi on axis {}", i + 1));
    return b;
}

BoxUnion boxes(const YAML::Node& n, const std::string& field) {
    if (n.IsMap()) return BoxUnion(box(n, field));
    if (!n.IsSequence() || n.size() == 0) fail(n, field, "expected a box or a list of boxes");
    std::vector<Box> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(box(n[i], fmt::format("{}[{}]", field, i)));
    try {
        return BoxUnion(std::move(out));
    } catch (const Error& e) {
        fail(n, field, e.what());
    }
}

Matrix matrix(const YAML::Node& n, const std::string& field) {
    if (!n.IsSequence()) fail(n, field, "expected a list of rows");
    Matrix m;
    for (std::size_t i = 0; i < n.size(); ++i) m.push_back(vec(n[i], fmt::format("{}[{}]", field, i)));
    return m;
}

KFunction kfun(const YAML::Node& n, const std::string& field) {
    double c = get<double>(n, "coeff", field, 1.0);
    double p = get<double>(n, "exponent", field, 1.0);
    if (!(c > 0.0) || !(p > 0.0)) fail(n, field, "coeff and exponent must be positive");
    return KFunction::power(c, p);
}

PlantModel plant_section(const YAML::Node& n, bool& normalize_flag) {
    const std::string ctx = "plant";
    PlantModel p;
    std::string model = as<std::string>(need(n, "model", ctx), "plant.model");
    if (model == "vehicle") {
        p = vehicle_plant(get<std::size_t>(n, "speed_points", ctx, 6), get<std::size_t>(n, "steer_points", ctx, 11));
        double a = get<double>(n, "a", ctx, kVehicleA), b = get<double>(n, "b", ctx, kVehicleB);
        p.field = single_track_vehicle(a, b);
    } else if (model == "linear") {
        Matrix a = matrix(need(n, "A", ctx), "plant.A");
        Matrix b = matrix(need(n, "B", ctx), "plant.B");
        p.dim_x = a.size();
        p.dim_u = b.empty() ? 0 : b[0].size();
        for (const auto& row : a)
            if (row.size() != p.dim_x) fail(n["A"], "plant.A", "matrix must be square");
        if (b.size() != p.dim_x) fail(n["B"], "plant.B", "row count must equal the state dimension");
        p.field = linear_field(std::move(a), std::move(b));
    } else if (model == "expression") {
        auto eqs = as<std::vector<std::string>>(need(n, "equations", ctx), "plant.equations");
        p.dim_x = eqs.size();
        p.dim_u = as<std::size_t>(need(n, "dim_u", ctx), "plant.dim_u");
        auto params = get<std::map<std::string, double>>(n, "params", ctx, {});
        try {
            p.field = expression_field(eqs, p.dim_x, p.dim_u, params);
        } catch (const Error& e) {
            fail(n["equations"], "plant.equations", e.what());
        }
    } else {
        fail(n["model"], "plant.model", "expected vehicle, linear or expression");
    }
    if (n["state_box"]) p.state_box = boxes(n["state_box"], "plant.state_box");
    if (n["init_box"]) p.init_box = boxes(n["init_box"], "plant.init_box");
    else if (model != "vehicle") p.init_box = p.state_box;
    if (YAML::Node in = n["inputs"]) {
        p.inputs.clear();
        if (in.IsMap()) {
            Box b = box(need(in, "grid", "plant.inputs"), "plant.inputs.grid");
            Vec step = vec(need(in["grid"], "step", "plant.inputs.grid"), "plant.inputs.grid.step");
            if (step.size() != b.dim()) fail(in, "plant.inputs.grid.step", "dimension mismatch");
            p.inputs = input_grid(b, step);
        } else {
            for (std::size_t i = 0; i < in.size(); ++i) p.inputs.push_back(vec(in[i], fmt::format("plant.inputs[{}]", i)));
        }
    }
    if (YAML::Node r = n["u_ref"]) {
        Vec u = vec(r, "plant.u_ref");
        auto it = std::find_if(p.inputs.begin(), p.inputs.end(), [&](const Vec& v) { return v.size() == u.size() && inf_dist(v, u) < 1e-9; });
        if (it == p.inputs.end()) fail(r, "plant.u_ref", "not an element of the input set");
        p.u_ref = static_cast<std::size_t>(it - p.inputs.begin());
    }
    p.tau = get<double>(n, "tau", ctx, p.tau);
    normalize_flag = get<bool>(n, "normalize", ctx, model == "vehicle");
    try {
        p.validate();
    } catch (const Error& e) {
        fail(n, ctx, e.what());
    }
    return p;
}

LyapunovCertificate certificate_section(const YAML::Node& n) {
    const std::string ctx = "certificate";
    std::string shape = get<std::string>(n, "shape", ctx, "squared_euclidean");
    if (shape == "vehicle") return vehicle_certificate(get<double>(n, "a", ctx, kVehicleA), get<double>(n, "b", ctx, kVehicleB));
    double scale = get<double>(n, "scale", ctx, shape == "squared_euclidean" ? 0.5 : 1.0);
    double lambda = as<double>(need(n, "lambda", ctx), "certificate.lambda");
    KFunction lo = kfun(need(n, "alpha_lower", ctx), "certificate.alpha_lower");
    KFunction hi = kfun(need(n, "alpha_upper", ctx), "certificate.alpha_upper");
    KFunction g = kfun(need(n, "gamma", ctx), "certificate.gamma");
    if (shape == "squared_euclidean") return LyapunovCertificate::squared_euclidean(scale, lambda, lo, hi, g);
    if (shape == "euclidean") return LyapunovCertificate::euclidean(scale, lambda, lo, hi, g);
    if (shape == "inf_norm") return LyapunovCertificate::inf_norm(scale, lambda, lo, hi, g);
    fail(n["shape"], "certificate.shape", "expected squared_euclidean, euclidean, inf_norm or vehicle");
}

NetworkParams network_params(const YAML::Node& n) {
    const std::string ctx = "network";
    NetworkParams p;
    p.b_min = as<double>(need(n, "b_min", ctx), "network.b_min");
    p.b_max = as<double>(need(n, "b_max", ctx), "network.b_max");
    p.n_pc_plus = get<double>(n, "overhead_pc", ctx, 0.0);
    p.n_cp_plus = get<double>(n, "overhead_cp", ctx, 0.0);
    auto range = [&](const char* key, double& lo, double& hi) {
        YAML::Node r = need(n, key, ctx);
        Vec v = vec(r, std::string("network.") + key);
        if (v.size() != 2) fail(r, std::string("network.") + key, "expected [min, max]");
        lo = v[0];
        hi = v[1];
    };
    range("access_wait", p.d_req_min, p.d_req_max);
    range("delivery", p.d_net_min, p.d_net_max);
    range("computation", p.d_ctrl_min, p.d_ctrl_max);
    p.n_pd = get<std::uint32_t>(n, "dropouts", ctx, 0);
    try {
        p.validate();
    } catch (const Error& e) {
        fail(n, ctx, e.what());
    }
    return p;
}

std::vector<std::uint32_t> id_list(const YAML::Node& n, const std::string& field,
                                   const std::map<std::string, std::uint32_t>& names, std::size_t count) {
    std::vector<std::uint32_t> out;
    if (!n.IsSequence()) fail(n, field, "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) {
        std::string tok = as<std::string>(n[i], field);
        auto it = names.find(tok);
        if (it != names.end()) {
            out.push_back(it->second);
            continue;
        }
        try {
            std::size_t pos = 0;
            unsigned long v = std::stoul(tok, &pos);
            if (pos == tok.size() && v < count) {
                out.push_back(static_cast<std::uint32_t>(v));
                continue;
            }
        } catch (const std::logic_error&) {
        }
        fail(n[i], field, fmt::format("unknown state '{}'", tok));
    }
    return out;
}

Specification spec_from(const YAML::Node& root) {
    Specification q;
    YAML::Node st = need(root, "states", "spec");
    std::map<std::string, std::uint32_t> names;
    for (std::size_t i = 0; i < st.size(); ++i) {
        std::string f = fmt::format("spec.states[{}]", i);
        std::string name = get<std::string>(st[i], "name", f, "");
        q.points.push_back(vec(need(st[i], "point", f), f + ".point"));
        q.names.push_back(name);
        if (!name.empty() && !names.emplace(name, static_cast<std::uint32_t>(i)).second) fail(st[i], f, "duplicate state name " + name);
    }
    YAML::Node tr = need(root, "transitions", "spec");
    for (std::size_t i = 0; i < tr.size(); ++i) {
        auto pair = id_list(tr[i], fmt::format("spec.transitions[{}]", i), names, q.points.size());
        if (pair.size() != 2) fail(tr[i], fmt::format("spec.transitions[{}]", i), "expected [from, to]");
        q.transitions.emplace_back(pair[0], pair[1]);
    }
    q.initial = id_list(need(root, "initial", "spec"), "spec.initial", names, q.points.size());
    if (YAML::Node rg = root["regions"])
        for (auto it = rg.begin(); it != rg.end(); ++it) {
            std::string key = as<std::string>(it->first, "spec.regions");
            q.regions[key] = id_list(it->second, "spec.regions." + key, names, q.points.size());
        }
    try {
        q.validate();
    } catch (const Error& e) {
        fail(root, "spec", e.what());
    }
    return q;
}

YAML::Node load_yaml(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1, e.msg));
    }
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Specification parse_spec(const std::string& text) { return spec_from(load_yaml(text)); }

Specification load_spec(const std::filesystem::path& path) {
    try {
        return parse_spec(slurp(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_spec(std::ostream& os, const Specification& q) {
    YAML::Emitter e;
    e.SetDoublePrecision(12);
    e << YAML::BeginMap << YAML::Key << "states" << YAML::Value << YAML::BeginSeq;
    for (std::size_t i = 0; i < q.size(); ++i) {
        e << YAML::Flow << YAML::BeginMap;
        if (i < q.names.size() && !q.names[i].empty()) e << YAML::Key << "name" << YAML::Value << q.names[i];
        e << YAML::Key << "point" << YAML::Value << YAML::Flow << q.points[i] << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::Key << "transitions" << YAML::Value << YAML::BeginSeq;
    for (auto [a, b] : q.transitions) e << YAML::Flow << std::vector<std::uint32_t>{a, b};
    e << YAML::EndSeq << YAML::Key << "initial" << YAML::Value << YAML::Flow << q.initial;
    if (!q.regions.empty()) {
        e << YAML::Key << "regions" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, v] : q.regions) e << YAML::Key << k << YAML::Value << YAML::Flow << v;
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
    os << e.c_str() << "\n";
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base) {
    YAML::Node root = load_yaml(text);
    if (!root.IsMap()) throw ConfigError("config must be a mapping");
    RunConfig rc;
    Scenario& s = rc.scenario;

    std::string preset = get<std::string>(root, "preset", "config", "");
    if (!preset.empty()) {
        YAML::Node po = root["preset_options"];
        try {
            if (preset == "vehicle")
                s = vehicle_scenario(get<std::size_t>(po, "points_per_axis", "preset_options", 21),
                                     get<double>(po, "epsilon", "preset_options", 0.05));
            else if (preset == "surrogate")
                s = surrogate_gas_scenario(get<std::uint32_t>(po, "n_min", "preset_options", 1),
                                           get<std::uint32_t>(po, "n_max", "preset_options", 3));
            else if (preset == "scalar")
                s = scalar_gas_scenario(get<double>(po, "step", "preset_options", 0.1),
                                        get<double>(po, "epsilon", "preset_options", 0.9),
                                        get<std::uint32_t>(po, "n_max", "preset_options", 2));
            else
                fail(root["preset"], "preset", "expected vehicle, surrogate or scalar");
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            fail(root["preset"], "preset", e.what());
        }
        s.name = preset;
    } else {
        bool norm = false;
        PlantModel p = plant_section(need(root, "plant", "config"), norm);
        s.name = get<std::string>(root, "name", "config", "custom");
        if (norm) {
            NormalizedPlant np = normalize(p);
            s.plant = np.plant;
            s.state_map = np.state_map;
            s.input_map = np.input_map;
        } else {
            s.plant = p;
            s.state_map = AffineMap{Vec(p.dim_x, 0.0), Vec(p.dim_x, 1.0)};
            s.input_map = AffineMap{Vec(p.dim_u, 0.0), Vec(p.dim_u, 1.0)};
        }
        s.certificate = certificate_section(need(root, "certificate", "config"));
    }

    YAML::Node ab = root["abstraction"];
    if (ab) {
        if (YAML::Node st = ab["step"]) {
            Vec step = vec(st, "abstraction.step");
            if (step.size() == 1) step.assign(s.plant.dim_x, step[0]);
            if (step.size() != s.plant.dim_x) fail(st, "abstraction.step", "one step per state axis expected");
            for (double h : step)
                if (!(h > 0.0)) fail(st, "abstraction.step", "steps must be positive");
            s.lattice = Lattice(s.plant.state_box, step);
            s.mu_x = s.lattice.accuracy();
        }
        s.mu_x = get<double>(ab, "mu_x", "abstraction", s.mu_x);
        if (YAML::Node v = ab["variant"]) {
            try {
                s.variant = parse_variant(as<std::string>(v, "abstraction.variant"));
            } catch (const ConfigError& e) {
                fail(v, "abstraction.variant", e.what());
            }
        }
        s.epsilon = get<double>(ab, "epsilon", "abstraction", s.epsilon);
        s.theta = get<double>(ab, "theta", "abstraction", s.theta);
        rc.game.budget = get<std::uint64_t>(ab, "budget", "abstraction", rc.game.budget);
        rc.game.state_budget = get<std::uint64_t>(ab, "state_budget", "abstraction", rc.game.state_budget);
        rc.build.budget = rc.game.state_budget;
        rc.build.max_depth = get<std::uint32_t>(ab, "max_depth", "abstraction", rc.build.max_depth);
        rc.engine = get<std::string>(ab, "engine", "abstraction", rc.engine);
        if (rc.engine != "lazy" && rc.engine != "explicit") fail(ab["engine"], "abstraction.engine", "expected lazy or explicit");
        if (YAML::Node sel = ab["selection"]) {
            try {
                rc.selection = Selection::parse(as<std::string>(sel, "abstraction.selection"));
            } catch (const ConfigError& e) {
                fail(sel, "abstraction.selection", e.what());
            }
        }
    }
    if (s.lattice.dim() == 0) fail(root, "abstraction.step", "no lattice step given");

    if (YAML::Node nw = root["network"]) {
        if (YAML::Node fx = nw["fixed"]) {
            auto lo = as<std::uint32_t>(need(fx, "n_min", "network.fixed"), "network.fixed.n_min");
            auto hi = as<std::uint32_t>(need(fx, "n_max", "network.fixed"), "network.fixed.n_max");
            if (lo < 1 || hi < lo) fail(fx, "network.fixed", "require 1 <= n_min <= n_max");
            s.bounds = fixed_delay_bounds(lo, hi);
            rc.network_from_params = false;
        } else {
            s.network = network_params(nw);
            s.network.tau = s.plant.tau;
            rc.network_from_params = true;
            rc.delay_states = get<std::uint64_t>(nw, "message_states", "network", s.lattice.count());
            rc.delay_inputs = get<std::uint64_t>(nw, "message_inputs", "network", s.plant.inputs.size());
            s.bounds = compute_delay_bounds(s.network, rc.delay_states, rc.delay_inputs);
        }
    } else if (preset.empty()) {
        fail(root, "network", "missing section");
    }

    if (YAML::Node sp = root["spec"]) {
        if (sp.IsScalar()) {
            rc.spec_path = base / as<std::string>(sp, "spec");
            s.spec = load_spec(rc.spec_path);
        } else {
            s.spec = spec_from(sp);
        }
    } else if (preset.empty()) {
        fail(root, "spec", "missing section");
    }
    for (const auto& pt : s.spec.points)
        if (pt.size() != s.plant.dim_x) fail(root["spec"], "spec", "state dimension differs from the plant");

    if (YAML::Node sim = root["simulation"]) {
        SimulationConfig& c = rc.simulation;
        c.policy = get<std::string>(sim, "policy", "simulation", c.policy);
        try {
            parse_policy(c.policy);
        } catch (const Error& e) {
            fail(sim["policy"], "simulation.policy", e.what());
        }
        c.seed = get<std::uint64_t>(sim, "seed", "simulation", c.seed);
        c.horizon = get<std::uint32_t>(sim, "horizon", "simulation", c.horizon);
        if (c.horizon < 1) fail(sim["horizon"], "simulation.horizon", "must be at least 1");
        c.runs = get<std::size_t>(sim, "runs", "simulation", c.runs);
        if (YAML::Node x0 = sim["x0"]) {
            c.x0 = vec(x0, "simulation.x0");
            if (c.x0->size() != s.plant.dim_x) fail(x0, "simulation.x0", "dimension mismatch");
        }
    }
    if (YAML::Node out = root["output"]) rc.output_dir = get<std::string>(out, "dir", "output", "out");
    rc.game.jobs = rc.build.jobs = get<unsigned>(root, "jobs", "config", 1);
    return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
    try {
        RunConfig rc = parse_config(slurp(path), path.parent_path());
        rc.source = path;
        return rc;
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace ncs
