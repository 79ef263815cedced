#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ncs/error.hpp"
#include "ncs/sim.hpp"
#include "ncs/vehicle.hpp"

using namespace ncs;

namespace {

struct Loop {
    Scenario sc;
    std::unique_ptr<Abstraction> abs;
    ControllerResult synth;
    MealyController ctrl;

    explicit Loop(Scenario s, Selection sel = {}) : sc(std::move(s)) {
        abs = std::make_unique<Abstraction>(sc.plant, sc.certificate, sc.abstraction_config());
        synth = synthesize_lazy(*abs, sc.spec, sc.mu_x);
        ctrl = MealyController::refine(synth.controller, sc.lattice, sc.plant.inputs, sc.bounds, sc.mu_x, sel);
    }
    Vec x0() const { return sc.spec.points[sc.spec.initial[0]]; }
};

const Loop& surrogate() {
    static const Loop l(surrogate_gas_scenario());
    return l;
}

Specification line_spec() {
    Specification q;
    q.points = {{0.0}, {1.0}};
    q.names = {"A", "B"};
    q.transitions = {{0, 1}, {1, 1}};
    q.initial = {0};
    return q;
}

LoopTrace trace_of(const std::vector<double>& ys) {
    LoopTrace t;
    for (double y : ys) t.y_tilde.push_back({y});
    return t;
}

}  // namespace

TEST(OpenLoop, ConstantPlantStaysPut) {
    PlantModel p;
    p.dim_x = 2;
    p.dim_u = 1;
    p.field = [](const Vec&, const Vec&, Vec& dx) { dx.assign(2, 0.0); };
    p.state_box = BoxUnion(Box{{-1, -1}, {1, 1}});
    p.init_box = p.state_box;
    p.inputs = {{0.0}};
    auto t = run_open_loop(p, {0.3, -0.7}, std::vector<InputId>(10, 0));
    ASSERT_EQ(t.samples(), 11u);
    for (const auto& y : t.y_tilde) EXPECT_LE(inf_dist(y, {0.3, -0.7}), 1e-12);
    EXPECT_EQ(t.iterations(), 10u);
}

TEST(Loop, HalvingWithUnitDelays) {
    // x' = -x over tau = ln 2 halves the state; spec points follow 2^-s down to the lattice floor
    Scenario sc;
    PlantModel& p = sc.plant;
    p.dim_x = 1;
    p.dim_u = 1;
    p.field = linear_field({{-1.0}}, {{1.0}});
    p.state_box = BoxUnion(Box{{-1.0}, {1.0}});
    p.init_box = BoxUnion(Box{{1.0}, {1.0}});
    p.inputs = {{0.0}};
    p.tau = std::log(2.0);
    sc.certificate = LyapunovCertificate::inf_norm(1.0, -1.0, KFunction::power(1, 1), KFunction::power(1, 1),
                                                   KFunction::power(1, 1));
    sc.bounds = fixed_delay_bounds(1, 1);
    double step = 1.0 / 4096.0;
    sc.lattice = Lattice(p.state_box, step);
    sc.mu_x = sc.lattice.accuracy();
    sc.variant = Variant::GAS;
    sc.epsilon = 0.01;
    sc.theta = 0.01;
    // 2^-13 sits on a quantizer tie, so the floor state may settle on either neighbour
    for (int s = 0; s <= 12; ++s) sc.spec.points.push_back({std::ldexp(1.0, -s)});
    sc.spec.points.push_back({0.0});
    sc.spec.names.assign(14, "");
    for (std::uint32_t s = 0; s < 12; ++s) sc.spec.transitions.emplace_back(s, s + 1);
    sc.spec.transitions.insert(sc.spec.transitions.end(), {{12, 12}, {12, 13}, {13, 13}, {13, 12}});
    sc.spec.initial = {0};
    Loop l(std::move(sc));
    DelaySampler d(l.sc.bounds, policy::Fixed{1});
    auto t = run_loop(l.sc.plant, l.ctrl, {1.0}, d, 11);
    ASSERT_EQ(t.samples(), 12u);
    for (std::size_t s = 0; s < t.samples(); ++s) EXPECT_NEAR(t.y_tilde[s][0], std::ldexp(1.0, -int(s)), 1e-8);
    EXPECT_EQ(t.iterations(), 11u);
    EXPECT_FALSE(check_trace_laws(t, l.sc.lattice).has_value());
    EXPECT_TRUE(verify_trace(t, l.sc.spec, l.sc.epsilon).ok);
}

TEST(VerifyTrace, AcceptsTraceNearASpecRun) {
    auto v = verify_trace(trace_of({0.05, 0.95, 1.0}), line_spec(), 0.1);
    ASSERT_TRUE(v.ok);
    EXPECT_EQ(v.witness, (std::vector<std::uint32_t>{0, 1, 1}));
}

TEST(VerifyTrace, ReportsTheFirstFailingSample) {
    auto v = verify_trace(trace_of({0.05, 0.5, 1.0}), line_spec(), 0.1);
    EXPECT_FALSE(v.ok);
    ASSERT_TRUE(v.first_failure);
    EXPECT_EQ(*v.first_failure, 1u);
    auto w = verify_trace(trace_of({0.5}), line_spec(), 0.1);
    EXPECT_FALSE(w.ok);
    EXPECT_EQ(*w.first_failure, 0u);
}

TEST(VerifyTrace, BoundaryUsesInclusiveTolerance) {
    EXPECT_TRUE(verify_trace(trace_of({0.1, 0.9}), line_spec(), 0.1).ok);
    EXPECT_TRUE(verify_trace(trace_of({}), line_spec(), 0.1).ok);
}

TEST(Loop, SurrogateSatisfiesTheSpecUnderEveryPolicy) {
    const auto& l = surrogate();
    std::vector<DelayPolicy> policies{policy::WorstCaseMax{}, policy::BestCaseMin{}, policy::Fixed{2},
                                      policy::Adversarial{{3, 1, 3, 1, 2, 3, 3, 1, 1, 2, 2, 3, 1, 3, 2, 1, 3, 3, 3,
                                                           3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3,
                                                           3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3,
                                                           3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3,
                                                           3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3}}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) policies.push_back(policy::Uniform{seed});
    for (const auto& pol : policies) {
        DelaySampler d(l.sc.bounds, pol);
        auto t = run_loop(l.sc.plant, l.ctrl, l.x0(), d, 94);
        EXPECT_FALSE(check_trace_laws(t, l.sc.lattice).has_value()) << describe(pol);
        auto v = verify_trace(t, l.sc.spec, l.sc.epsilon);
        EXPECT_TRUE(v.ok) << describe(pol);
        EXPECT_EQ(t.samples(), 95u);
    }
}

TEST(Loop, SensorValuesDriveTheController) {
    const auto& l = surrogate();
    DelaySampler d(l.sc.bounds, policy::Uniform{4});
    auto t = run_loop(l.sc.plant, l.ctrl, l.x0(), d, 60);
    ASSERT_GT(t.iterations(), 10u);
    for (std::size_t k = 0; k < t.iterations(); ++k) {
        EXPECT_EQ(t.w[k], t.y[t.m_seq[k]]);
        EXPECT_EQ(l.sc.lattice.point(l.ctrl.node(t.xi_seq[k]).burst.back()), t.w[k]);
        EXPECT_EQ(t.v[k + 1], l.ctrl.node(t.xi_seq[k]).select);
    }
    EXPECT_EQ(t.v[0], l.sc.plant.u_ref);
}

TEST(Loop, BurstsMatchTheConcreteSuccessor) {
    const auto& l = surrogate();
    DelaySampler d(l.sc.bounds, policy::Uniform{8});
    auto t = run_loop(l.sc.plant, l.ctrl, l.x0(), d, 94);
    for (std::size_t k = 0; k + 1 < t.iterations(); ++k) {
        std::uint32_t m = t.m_seq[k], n = t.n_seq[k];
        ConcreteState prev{{t.y_tilde[m]}, t.v[k], k == 0};
        auto next = l.abs->concrete_successor(prev, t.v[k + 1], n);
        ASSERT_TRUE(next);
        EXPECT_EQ(next->held, t.v[k + 1]);
        for (std::uint32_t i = 0; i < n; ++i) EXPECT_LE(inf_dist(next->burst[i], t.y_tilde[m + 1 + i]), 1e-12);
        // and the controller's next state carries the quantized burst's last element
        EXPECT_EQ(l.ctrl.node(t.xi_seq[k + 1]).burst.size(), n);
    }
}

TEST(Loop, OutsideDomainWhenNoInitialState) {
    const auto& l = surrogate();
    DelaySampler d(l.sc.bounds, policy::Fixed{1});
    EXPECT_THROW(run_loop(l.sc.plant, l.ctrl, {0.95, 0.95}, d, 5), OutsideDomain);
    EXPECT_THROW(run_loop(l.sc.plant, l.ctrl, {3.0, 0.0}, d, 5), LeftStateSpace);
    EXPECT_THROW(run_loop(l.sc.plant, l.ctrl, l.x0(), d, 0), InvalidArgument);
}

TEST(Trace, LawsDetectTampering) {
    const auto& l = surrogate();
    DelaySampler d(l.sc.bounds, policy::Uniform{1});
    auto t = run_loop(l.sc.plant, l.ctrl, l.x0(), d, 30);
    ASSERT_FALSE(check_trace_laws(t, l.sc.lattice).has_value());
    auto bad = t;
    bad.m_seq[1] += 1;
    EXPECT_TRUE(check_trace_laws(bad, l.sc.lattice).has_value());
    bad = t;
    bad.y[3][0] += 0.1;
    EXPECT_TRUE(check_trace_laws(bad, l.sc.lattice).has_value());
    bad = t;
    bad.applied[0] = (bad.applied[0] + 1) % 9;
    EXPECT_TRUE(check_trace_laws(bad, l.sc.lattice).has_value());
    bad = t;
    bad.v.pop_back();
    EXPECT_TRUE(check_trace_laws(bad, l.sc.lattice).has_value());
}

TEST(Trace, CsvIsDeterministicAndRoundTrips) {
    const auto& l = surrogate();
    auto run = [&] {
        DelaySampler d(l.sc.bounds, policy::Uniform{11});
        return run_loop(l.sc.plant, l.ctrl, l.x0(), d, 94);
    };
    auto t1 = run(), t2 = run();
    std::stringstream s1, s2, i1, i2;
    export_samples(s1, t1, l.sc.plant.inputs);
    export_samples(s2, t2, l.sc.plant.inputs);
    export_iterations(i1, t1, l.sc.plant.inputs);
    export_iterations(i2, t2, l.sc.plant.inputs);
    EXPECT_EQ(s1.str(), s2.str());
    EXPECT_EQ(i1.str(), i2.str());
    EXPECT_EQ(s1.str().rfind("# ncs-trace v1 samples tau=1 dim_x=2 dim_u=2\n", 0), 0u);
    EXPECT_NE(s1.str().find("\ns,t,y_tilde0,y_tilde1,y0,y1,u_id,u0,u1,k,N\n"), std::string::npos);
    EXPECT_EQ(i1.str().rfind("# ncs-trace v1 iterations v0=", 0), 0u);

    auto back = import_trace(s1, i1);
    EXPECT_EQ(back.applied, t1.applied);
    EXPECT_EQ(back.m_seq, t1.m_seq);
    EXPECT_EQ(back.n_seq, t1.n_seq);
    EXPECT_EQ(back.v, t1.v);
    EXPECT_EQ(back.xi_seq, t1.xi_seq);
    ASSERT_EQ(back.samples(), t1.samples());
    for (std::size_t s = 0; s < t1.samples(); ++s) {
        EXPECT_LE(inf_dist(back.y_tilde[s], t1.y_tilde[s]), 1e-11);
        EXPECT_LE(inf_dist(back.y[s], t1.y[s]), 1e-11);
    }
    EXPECT_FALSE(check_trace_laws(back, l.sc.lattice).has_value());
    EXPECT_EQ(verify_trace(back, l.sc.spec, l.sc.epsilon).ok, verify_trace(t1, l.sc.spec, l.sc.epsilon).ok);
}

TEST(Trace, MalformedCsvRejected) {
    std::stringstream s("garbage\n"), i("");
    EXPECT_THROW(import_trace(s, i), FormatError);
    std::stringstream s2("# ncs-trace v1 samples tau=1 dim_x=1 dim_u=1\nheader\n0,0,1\n"), i2("");
    EXPECT_THROW(import_trace(s2, i2), FormatError);
}

TEST(Trace, TruncatedFinalIterationIsNotResolved) {
    const auto& l = surrogate();
    DelaySampler d(l.sc.bounds, policy::Fixed{3});
    auto t = run_loop(l.sc.plant, l.ctrl, l.x0(), d, 10);
    // iterations start at 0, 3, 6, 9; the last one is cut at the horizon
    EXPECT_EQ(t.m_seq, (std::vector<std::uint32_t>{0, 3, 6, 9}));
    EXPECT_EQ(t.samples(), 11u);
    EXPECT_FALSE(check_trace_laws(t, l.sc.lattice).has_value());
}
