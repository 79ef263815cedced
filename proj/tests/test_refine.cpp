#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ncs/error.hpp"
#include "ncs/refine.hpp"
#include "ncs/vehicle.hpp"
#include "support.hpp"

using namespace ncs;

namespace {

struct Fixture {
    Scenario sc = surrogate_gas_scenario();
    Abstraction abs{sc.plant, sc.certificate, sc.abstraction_config()};
    ControllerResult synth = synthesize_lazy(abs, sc.spec, sc.mu_x);

    MealyController make(const Selection& sel = {}) const {
        return MealyController::refine(synth.controller, sc.lattice, sc.plant.inputs, sc.bounds, sc.mu_x, sel);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST(Selection, ParseAndDescribe) {
    for (std::string text : {"first", "random:42", "priority:3,1,0"})
        EXPECT_EQ(Selection::parse(text).describe(), text);
    EXPECT_EQ(Selection::parse("random:7").seed, 7u);
    EXPECT_EQ(Selection::parse("priority:2,5").priority, (std::vector<InputId>{2, 5}));
    EXPECT_THROW(Selection::parse("greedy"), ConfigError);
    EXPECT_THROW(Selection::parse("random:x"), ConfigError);
}

TEST(Refine, FirstCanonicalPicksTheLowestEnabledInput) {
    const auto& f = fixture();
    auto c = f.make();
    ASSERT_EQ(c.size(), f.synth.controller.num_states());
    for (StateId x = 0; x < c.size(); ++x) {
        const auto& n = c.node(x);
        auto enabled = f.synth.controller.enabled_inputs(x);
        EXPECT_EQ(n.select, enabled.front());
        EXPECT_EQ(n.next, f.synth.controller.post(x, n.select));
        EXPECT_FALSE(n.next.empty());
        EXPECT_EQ(n.initial, f.synth.controller.is_initial(x));
        EXPECT_EQ(n.burst, f.synth.states[x].burst);
        EXPECT_EQ(n.held, f.synth.states[x].held);
    }
}

TEST(Refine, RandomSelectionIsReproducibleAndAdmissible) {
    const auto& f = fixture();
    auto a = f.make(Selection::parse("random:9")), b = f.make(Selection::parse("random:9"));
    EXPECT_EQ(a, b);
    auto other = f.make(Selection::parse("random:10"));
    bool differs = false;
    for (StateId x = 0; x < a.size(); ++x) {
        auto enabled = f.synth.controller.enabled_inputs(x);
        EXPECT_TRUE(std::binary_search(enabled.begin(), enabled.end(), a.node(x).select));
        differs = differs || a.node(x).select != other.node(x).select;
    }
    EXPECT_TRUE(differs);
}

TEST(Refine, PriorityFallsBackToTheLowestInput) {
    const auto& f = fixture();
    auto c = f.make(Selection::parse("priority:8,4"));
    for (StateId x = 0; x < c.size(); ++x) {
        auto enabled = f.synth.controller.enabled_inputs(x);
        InputId expect = enabled.front();
        for (InputId u : {8u, 4u})
            if (std::binary_search(enabled.begin(), enabled.end(), u)) {
                expect = u;
                break;
            }
        EXPECT_EQ(c.node(x).select, expect);
    }
}

TEST(Refine, DomainIsTheLastBurstElement) {
    const auto& f = fixture();
    auto c = f.make();
    auto grid = f.sc.lattice.enumerate_coords();
    for (StateId x = 0; x < c.size(); ++x)
        for (const auto& w : grid) {
            bool in = c.node(x).burst.back() == w;
            EXPECT_EQ(c.in_domain(x, w), in);
            if (in) {
                auto st = c.step(x, w);
                EXPECT_EQ(st.v, c.node(x).select);
                EXPECT_EQ(st.next, &c.node(x).next);
            } else {
                EXPECT_THROW(c.step(x, w), OutsideDomain);
            }
        }
}

TEST(Refine, InitialStateAndResolve) {
    const auto& f = fixture();
    auto c = f.make();
    for (StateId x = 0; x < c.size(); ++x) {
        const auto& n = c.node(x);
        if (n.initial) {
            auto found = c.initial_state(n.burst[0]);
            ASSERT_TRUE(found);
            EXPECT_TRUE(c.node(*found).initial);
        }
        for (StateId y : n.next) {
            auto len = static_cast<std::uint32_t>(c.node(y).burst.size());
            auto r = c.resolve(n.next, len, c.node(y).burst.back());
            ASSERT_TRUE(r);
            EXPECT_LE(*r, y);
        }
    }
    EXPECT_FALSE(c.initial_state(Coord{100, 100}).has_value());
}

TEST(Refine, SerializationRoundTrip) {
    const auto& f = fixture();
    for (auto sel : {"first", "random:3", "priority:2"}) {
        auto c = f.make(Selection::parse(sel));
        std::stringstream ss;
        c.write(ss);
        auto back = MealyController::read(ss);
        EXPECT_EQ(back, c);
        std::stringstream again;
        back.write(again);
        std::stringstream first;
        c.write(first);
        EXPECT_EQ(again.str(), first.str());
    }
}

TEST(Refine, CorruptSerializationRejected) {
    std::stringstream missing("not a controller\n");
    EXPECT_THROW(MealyController::read(missing), FormatError);
    const auto& f = fixture();
    std::stringstream ss;
    f.make().write(ss);
    std::string text = ss.str();
    std::stringstream truncated(text.substr(0, text.size() / 2));
    EXPECT_THROW(MealyController::read(truncated), FormatError);
}

TEST(Refine, BlockingStateRejected) {
    const auto& f = fixture();
    FiniteSystem sc;
    SymbolicState s{{{0, 0}}, 0, true};
    sc.add_state(state_key(s), {{0.0, 0.0}});
    sc.set_initial(0);
    EXPECT_THROW(MealyController::refine(sc, f.sc.lattice, f.sc.plant.inputs, f.sc.bounds, f.sc.mu_x),
                 BlockingController);
}

TEST(Refine, ForeignKeysRejected) {
    const auto& f = fixture();
    auto sc = ncs::testing::make_system({0.0}, {0}, {{0, 0, 0}});
    EXPECT_THROW(MealyController::refine(sc, f.sc.lattice, f.sc.plant.inputs, f.sc.bounds, f.sc.mu_x), FormatError);
}
