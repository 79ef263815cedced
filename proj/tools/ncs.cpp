// ncs: command-line driver for the networked symbolic-control pipeline.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ncs/config.hpp"
#include "ncs/error.hpp"
#include "ncs/sim.hpp"

namespace fs = std::filesystem;
using namespace ncs;

namespace {

enum Exit { kOk = 0, kInternal = 1, kValidation = 2, kEmpty = 3, kRuntime = 4 };

// Flat key/value report: printed and optionally written as summary.txt.
class Summary {
public:
    explicit Summary(std::string command) : command_(std::move(command)) {}

    template <class T>
    void put(const std::string& key, const T& value) {
        lines_.emplace_back(key, fmt::format("{}", value));
    }
    void put(const std::string& key, double value) { lines_.emplace_back(key, fmt::format("{:.12g}", value)); }

    void print(std::ostream& os) const {
        for (const auto& [k, v] : lines_) os << k << " = " << v << "\n";
    }
    void write(const fs::path& dir) const {
        fs::create_directories(dir);
        std::ofstream os(dir / (command_ + "_summary.txt"));
        os << "# ncs-summary v1 " << command_ << "\n";
        for (const auto& [k, v] : lines_) os << k << "=" << v << "\n";
    }

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> lines_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void put_bounds(Summary& s, const DelayBounds& b) {
    s.put("bits_pc", b.bits_pc);
    s.put("bits_cp", b.bits_cp);
    s.put("delta_b_pc_min", b.d_b_pc_min);
    s.put("delta_b_pc_max", b.d_b_pc_max);
    s.put("delta_b_cp_min", b.d_b_cp_min);
    s.put("delta_b_cp_max", b.d_b_cp_max);
    s.put("delta_min", b.delta_min);
    s.put("delta_max", b.delta_max);
    s.put("N_min", b.n_min);
    s.put("N_max", b.n_max);
}

// Every parameter condition; returns false and prints the first violation.
bool validate_run(const RunConfig& rc, Summary& sum) {
    const Scenario& s = rc.scenario;
    bool ok = true;
    auto report = [&](const std::string& stage, const ParameterReport& r) {
        for (const auto& c : r.checks) {
            sum.put(stage + "." + c.name, c.ok ? "ok" : "violated");
            if (!c.ok) {
                std::cerr << fmt::format("violated {}: {} (lhs {:.6g}, rhs {:.6g})\n", c.name, c.formula, c.lhs, c.rhs);
                ok = false;
            }
        }
    };
    report("abstraction", check_abstraction(s.abstraction_config(), s.certificate, s.plant.tau));
    report("synthesis", check_parameters(s.mu_x, s.theta, s.epsilon, s.lattice.mu_hat(), s.variant, s.certificate, s.plant.tau));
    CertificateCheck cc = spot_check(s.certificate, s.plant, 500, 7);
    sum.put("certificate.samples", cc.ok() ? "ok" : "violated");
    if (!cc.ok()) {
        std::cerr << fmt::format(
            "violated certificate: lower {} upper {} gamma {} decay {} symmetry {} of {} samples\n",
            cc.lower_violations, cc.upper_violations, cc.gamma_violations, cc.decay_violations,
            cc.symmetry_violations, cc.samples);
        ok = false;
    }
    bool in_x = true;
    for (const auto& p : s.spec.points) in_x = in_x && s.plant.in_state_space(p);
    sum.put("spec.in_state_space", in_x ? "ok" : "violated");
    if (!in_x) {
        std::cerr << "violated spec_in_state_space: a specification point lies outside X\n";
        ok = false;
    }
    return ok;
}

ControllerResult run_synthesis(const RunConfig& rc, const Abstraction& abs, Summary& sum) {
    const Scenario& s = rc.scenario;
    auto t0 = std::chrono::steady_clock::now();
    ControllerResult res;
    if (rc.engine == "explicit") {
        BuiltSystem<Coord> star = build_symbolic(abs, abs.initial_symbolic_states(), rc.build);
        LiftedSpec lifted = lift_spec(s.spec, s.bounds.n_min, s.bounds.n_max);
        res = synthesize_explicit(star.system, lifted, s.mu_x);
    } else {
        res = synthesize_lazy(abs, s.spec, s.mu_x, rc.game);
    }
    sum.put("engine", res.stats.engine);
    sum.put("candidates", res.stats.candidates);
    sum.put("surviving", res.stats.surviving);
    sum.put("iterations", res.stats.iterations);
    sum.put("controller_states", res.controller.num_states());
    sum.put("controller_transitions", res.controller.num_transitions());
    sum.put("synthesis_seconds", seconds_since(t0));
    return res;
}

MealyController controller_for(const RunConfig& rc, const std::string& file, Summary& sum) {
    const Scenario& s = rc.scenario;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot read controller " + file);
        return MealyController::read(in);
    }
    Abstraction abs(s.plant, s.certificate, s.abstraction_config());
    ControllerResult res = run_synthesis(rc, abs, sum);
    return MealyController::refine(res.controller, s.lattice, s.plant.inputs, s.bounds, s.mu_x, rc.selection);
}

int cmd_validate(const RunConfig& rc) {
    Summary sum("validate");
    sum.put("scenario", rc.scenario.name);
    bool ok = validate_run(rc, sum);
    sum.put("result", ok ? "valid" : "invalid");
    sum.print(std::cout);
    sum.write(rc.output_dir);
    return ok ? kOk : kValidation;
}

int cmd_delays(const RunConfig& rc, std::uint64_t states, std::uint64_t inputs) {
    auto t0 = std::chrono::steady_clock::now();
    const Scenario& s = rc.scenario;
    Summary sum("delays");
    DelayBounds b = s.bounds;
    if (rc.network_from_params || states || inputs) {
        std::uint64_t ns = states ? states : (rc.delay_states ? rc.delay_states : s.lattice.count());
        std::uint64_t ni = inputs ? inputs : (rc.delay_inputs ? rc.delay_inputs : s.plant.inputs.size());
        b = compute_delay_bounds(s.network, ns, ni);
        sum.put("message_states", ns);
        sum.put("message_inputs", ni);
    }
    put_bounds(sum, b);
    sum.put("seconds", seconds_since(t0));
    sum.print(std::cout);
    sum.write(rc.output_dir);
    return kOk;
}

int cmd_abstract(const RunConfig& rc) {
    const Scenario& s = rc.scenario;
    Summary sum("abstract");
    Abstraction abs(s.plant, s.certificate, s.abstraction_config());
    auto t0 = std::chrono::steady_clock::now();
    BuiltSystem<Coord> built = build_symbolic(abs, abs.initial_symbolic_states(), rc.build);
    SystemStats st = system_stats(built.system);
    sum.put("variant", variant_name(s.variant));
    sum.put("lattice_points", s.lattice.count());
    sum.put("inputs", s.plant.inputs.size());
    sum.put("N_min", s.bounds.n_min);
    sum.put("N_max", s.bounds.n_max);
    sum.put("link_radius", abs.search_radius());
    sum.put("states", st.states);
    sum.put("transitions", st.transitions);
    sum.put("initial", st.initial);
    sum.put("unexpanded", st.unexpanded);
    sum.put("depth", built.depth_reached);
    sum.put("truncated", built.system.truncated() ? "yes" : "no");
    sum.put("seconds", seconds_since(t0));
    sum.print(std::cout);
    sum.write(rc.output_dir);
    std::ofstream os(rc.output_dir / "symbolic_model.txt");
    write_system(os, built.system);
    return kOk;
}

int cmd_synthesize(const RunConfig& rc) {
    const Scenario& s = rc.scenario;
    Summary sum("synthesize");
    if (!validate_run(rc, sum)) {
        sum.print(std::cout);
        return kValidation;
    }
    Abstraction abs(s.plant, s.certificate, s.abstraction_config());
    ControllerResult res = run_synthesis(rc, abs, sum);
    WitnessCheck wc = verify_witnesses(res);
    sum.put("witnesses", wc.ok() ? "ok" : "violated");
    MealyController mc = MealyController::refine(res.controller, s.lattice, s.plant.inputs, s.bounds, s.mu_x, rc.selection);
    fs::create_directories(rc.output_dir);
    std::ofstream os(rc.output_dir / "controller.txt");
    mc.write(os);
    sum.put("controller_file", (rc.output_dir / "controller.txt").string());
    sum.print(std::cout);
    sum.write(rc.output_dir);
    if (!wc.ok()) {
        std::cerr << "witness relations failed their independent check\n";
        return kRuntime;
    }
    return kOk;
}

struct SimArgs {
    std::string controller;
    std::optional<std::uint64_t> seed;
    std::string policy;
    std::optional<std::uint32_t> horizon;
    std::optional<std::size_t> runs;
};

DelayPolicy seeded(const std::string& text, std::uint64_t seed) {
    DelayPolicy p = parse_policy(text);
    if (auto* u = std::get_if<policy::Uniform>(&p)) u->seed = seed;
    return p;
}

int cmd_simulate(const RunConfig& rc, const SimArgs& a) {
    const Scenario& s = rc.scenario;
    Summary sum("simulate");
    MealyController mc = controller_for(rc, a.controller, sum);
    std::string pol = a.policy.empty() ? rc.simulation.policy : a.policy;
    std::uint64_t seed = a.seed.value_or(rc.simulation.seed);
    std::uint32_t horizon = a.horizon.value_or(rc.simulation.horizon);
    std::size_t runs = a.runs.value_or(rc.simulation.runs);
    fs::create_directories(rc.output_dir);
    std::size_t passed = 0, iterations = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        Vec x0 = rc.simulation.x0 ? *rc.simulation.x0 : s.spec.points.at(s.spec.initial.at(r % s.spec.initial.size()));
        DelaySampler ds(s.bounds, seeded(pol, seed + r));
        LoopTrace t = run_loop(s.plant, mc, x0, ds, horizon);
        if (auto law = check_trace_laws(t, s.lattice)) throw OutsideDomain("loop law violated: " + *law);
        Verdict v = verify_trace(t, s.spec, s.epsilon);
        passed += v.ok;
        iterations += t.iterations();
        std::string tag = runs == 1 ? "" : fmt::format("_{:03}", r);
        std::ofstream smp(rc.output_dir / ("samples" + tag + ".csv"));
        export_samples(smp, t, s.plant.inputs);
        std::ofstream itr(rc.output_dir / ("iterations" + tag + ".csv"));
        export_iterations(itr, t, s.plant.inputs);
        if (!v.ok)
            std::cerr << fmt::format("run {}: trace leaves the epsilon tube at sampling index {}\n", r,
                                     v.first_failure.value_or(0));
    }
    sum.put("runs", runs);
    sum.put("passed", passed);
    sum.put("horizon", horizon);
    sum.put("mean_iterations", runs ? static_cast<double>(iterations) / static_cast<double>(runs) : 0.0);
    sum.print(std::cout);
    sum.write(rc.output_dir);
    return passed == runs ? kOk : kRuntime;
}

int cmd_verify(const RunConfig& rc, const std::string& samples, const std::string& iterations,
               std::optional<double> eps) {
    Summary sum("verify");
    std::ifstream smp(samples), itr(iterations);
    if (!smp || !itr) throw ConfigError("cannot read trace files");
    LoopTrace t = import_trace(smp, itr);
    auto law = check_trace_laws(t, rc.scenario.lattice);
    sum.put("loop_laws", law ? *law : std::string("ok"));
    Verdict v = verify_trace(t, rc.scenario.spec, eps.value_or(rc.scenario.epsilon));
    sum.put("samples", t.samples());
    sum.put("iterations", t.iterations());
    sum.put("verdict", v.ok ? "satisfied" : "violated");
    if (!v.ok) sum.put("first_failure", v.first_failure.value_or(0));
    sum.print(std::cout);
    sum.write(rc.output_dir);
    return v.ok && !law ? kOk : kRuntime;
}

int cmd_demo(std::size_t points, double eps, const fs::path& out, unsigned jobs) {
    auto t0 = std::chrono::steady_clock::now();
    Summary sum("demo_vehicle");
    Scenario s = vehicle_scenario(points, eps);
    put_bounds(sum, s.bounds);
    sum.put("points_per_axis", points);
    sum.put("mu_x", s.mu_x);
    sum.put("epsilon", s.epsilon);
    sum.put("theta", s.theta);
    sum.put("spec_states", s.spec.size());
    fs::create_directories(out);
    {
        std::ofstream os(out / "vehicle_spec.yaml");
        write_spec(os, s.spec);
    }
    RunConfig rc;
    rc.scenario = s;
    rc.output_dir = out;
    rc.game.jobs = jobs;
    bool ok = validate_run(rc, sum);
    if (!ok) {
        sum.print(std::cout);
        sum.write(out);
        return kValidation;
    }
    Abstraction abs(rc.scenario.plant, rc.scenario.certificate, rc.scenario.abstraction_config());
    sum.put("link_radius", abs.search_radius());
    auto probe = abs.initial_symbolic(s.lattice.quantize_coord(s.spec.points[s.spec.initial[0]]));
    sum.put("successors_per_input", abs.successors(probe, 0).size());
    try {
        ControllerResult res = run_synthesis(rc, abs, sum);
        MealyController mc = MealyController::refine(res.controller, s.lattice, s.plant.inputs, s.bounds, s.mu_x);
        std::ofstream os(out / "controller.txt");
        mc.write(os);
        DelaySampler ds(s.bounds, policy::Uniform{0});
        LoopTrace t = run_loop(s.plant, mc, s.spec.points[s.spec.initial[0]], ds, 94);
        std::ofstream smp(out / "samples.csv"), itr(out / "iterations.csv");
        export_samples(smp, t, s.plant.inputs);
        export_iterations(itr, t, s.plant.inputs);
        Verdict v = verify_trace(t, s.spec, s.epsilon);
        sum.put("control_samples", t.iterations());
        sum.put("verdict", v.ok ? "satisfied" : "violated");
    } catch (const EmptyController& e) {
        sum.put("synthesis", "empty");
        sum.put("seconds", seconds_since(t0));
        sum.print(std::cout);
        sum.write(out);
        std::cerr << e.what() << "\n";
        return kEmpty;
    }
    sum.put("seconds", seconds_since(t0));
    sum.print(std::cout);
    sum.write(out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic controller synthesis for nonlinear networked control systems"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned jobs = 0;
    app.add_option("-j,--jobs", jobs, "Cap on worker threads (default: from config)");
    std::string config;
    std::string out_dir;

    auto with_config = [&](CLI::App* sub) {
        sub->add_option("config", config, "Run configuration (YAML)")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out_dir, "Output directory (overrides the config)");
    };
    auto* validate = app.add_subcommand("validate", "Check every parameter condition of a run");
    with_config(validate);
    auto* delays = app.add_subcommand("delays", "Delay bounds and burst-length range of the network");
    with_config(delays);
    std::uint64_t msg_states = 0, msg_inputs = 0;
    delays->add_option("--states", msg_states, "Number of quantized states sized into messages");
    delays->add_option("--inputs", msg_inputs, "Number of inputs sized into messages");
    auto* abstract = app.add_subcommand("abstract", "Build the symbolic model reachable from X0");
    with_config(abstract);
    auto* synth = app.add_subcommand("synthesize", "Synthesize and refine the controller");
    with_config(synth);
    auto* simulate = app.add_subcommand("simulate", "Closed-loop simulation through the network");
    with_config(simulate);
    SimArgs sim_args;
    simulate->add_option("--controller", sim_args.controller, "Serialized controller (synthesized when absent)");
    simulate->add_option("--seed", sim_args.seed, "Base seed for delay draws");
    simulate->add_option("--policy", sim_args.policy, "uniform:SEED | fixed:N | adversarial:1,3,2 | worst | best");
    simulate->add_option("--horizon", sim_args.horizon, "Sampling intervals to simulate");
    simulate->add_option("--runs", sim_args.runs, "Number of runs (seeds seed..seed+runs-1)");
    auto* verify = app.add_subcommand("verify", "Check a recorded trace against its spec automaton");
    with_config(verify);
    std::string samples, iterations;
    std::optional<double> eps;
    verify->add_option("--samples", samples, "Per-sample CSV")->required();
    verify->add_option("--iterations", iterations, "Per-iteration CSV")->required();
    verify->add_option("--epsilon", eps, "Precision (default: from config)");
    auto* demo = app.add_subcommand("demo-vehicle", "Surveillance vehicle scenario at a reduced grid");
    std::size_t points = 41;
    double demo_eps = 0.05;
    std::string demo_out = "demo_vehicle";
    demo->add_option("--points", points, "Lattice points per state axis (odd)");
    demo->add_option("--epsilon", demo_eps, "Precision");
    demo->add_option("-o,--out", demo_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (demo->parsed()) return cmd_demo(points, demo_eps, demo_out, jobs ? jobs : 1);
        RunConfig rc = load_config(config);
        if (!out_dir.empty()) rc.output_dir = out_dir;
        if (jobs) rc.game.jobs = rc.build.jobs = jobs;
        if (validate->parsed()) return cmd_validate(rc);
        if (delays->parsed()) return cmd_delays(rc, msg_states, msg_inputs);
        if (abstract->parsed()) return cmd_abstract(rc);
        if (synth->parsed()) return cmd_synthesize(rc);
        if (simulate->parsed()) return cmd_simulate(rc, sim_args);
        if (verify->parsed()) return cmd_verify(rc, samples, iterations, eps);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kValidation;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kValidation;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kValidation;
    } catch (const EmptyController& e) {
        std::cerr << "synthesis empty: " << e.what() << "\n";
        return kEmpty;
    } catch (const Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
