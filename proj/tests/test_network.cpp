#include <gtest/gtest.h>

#include <array>
#include <random>

#include "ncs/error.hpp"
#include "ncs/network.hpp"
#include "ncs/vehicle.hpp"

using namespace ncs;

TEST(MessageBits, Examples) {
    EXPECT_EQ(message_bits(2, 0.0), 1u);
    EXPECT_EQ(message_bits(66, 0.2), 9u);
    EXPECT_EQ(message_bits(201ull * 201 * 201, 0.2), 28u);
    EXPECT_EQ(message_bits(1, 0.5), 0u);
    EXPECT_THROW(message_bits(0, 0.0), InvalidArgument);
}

TEST(MessageBits, CeilLog2Oracle) {
    for (std::uint64_t n = 1; n < 5000; ++n) {
        std::uint64_t bits = 0;
        while ((1ull << bits) < n) ++bits;
        EXPECT_EQ(ceil_log2(n), bits) << n;
    }
}

TEST(DelayBounds, TwoOneBitMessagesAtOneBitPerSecond) {
    NetworkParams p;
    p.b_min = p.b_max = 1.0;
    auto b = compute_delay_bounds(p, 2, 2);
    EXPECT_DOUBLE_EQ(b.delta_bar_min, 2.0);
    EXPECT_DOUBLE_EQ(b.delta_bar_max, 2.0);
    EXPECT_EQ(b.n_min, 2u);
    EXPECT_EQ(b.n_max, 2u);
}

TEST(DelayBounds, SurveillanceExample) {
    auto b = compute_delay_bounds(vehicle_network(), 201ull * 201 * 201, 66);
    EXPECT_EQ(b.n_min, 1u);
    EXPECT_EQ(b.n_max, 3u);
    EXPECT_GE(b.delta_min, 0.33);
    EXPECT_LE(b.delta_min, 0.35);
    EXPECT_GE(b.delta_max, 2.65);
    EXPECT_LE(b.delta_max, 2.75);
    // hand arithmetic with the ceilings: 28 and 9 bits
    EXPECT_NEAR(b.d_b_pc_min, 0.028, 1e-15);
    EXPECT_NEAR(b.d_b_pc_max, 0.28, 1e-15);
    EXPECT_NEAR(b.d_b_cp_min, 0.009, 1e-15);
    EXPECT_NEAR(b.d_b_cp_max, 0.09, 1e-15);
    EXPECT_NEAR(b.delta_min, 0.028 + 0.01 + 0.009 + 0.1 + 0.2, 1e-12);
    EXPECT_NEAR(b.delta_max, 2.0 * (0.28 + 0.1 + 0.09 + 0.4 + 0.5), 1e-12);
}

TEST(DelayBounds, DropoutsScaleTheMaximum) {
    NetworkParams p = vehicle_network();
    p.n_pd = 0;
    auto b0 = compute_delay_bounds(p, 1000, 10);
    p.n_pd = 2;
    auto b2 = compute_delay_bounds(p, 1000, 10);
    EXPECT_DOUBLE_EQ(b2.delta_max, 3.0 * b0.delta_bar_max);
    EXPECT_DOUBLE_EQ(b2.delta_min, b0.delta_min);
}

TEST(DelayBounds, CeilingIsNudged) {
    EXPECT_EQ(nudged_ceil(2.0000000000001), 2u);
    EXPECT_EQ(nudged_ceil(2.001), 3u);
    EXPECT_EQ(nudged_ceil(0.0), 0u);
}

TEST(DelayBounds, MonotoneInDelaysAndDropouts) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(0.0, 0.5), grow(0.0, 0.3);
    for (int i = 0; i < 300; ++i) {
        NetworkParams p;
        p.b_min = 50.0 + 100.0 * d(rng);
        p.b_max = p.b_min * (1.0 + 4.0 * d(rng));
        p.d_req_min = d(rng);
        p.d_req_max = p.d_req_min + d(rng);
        p.d_net_min = d(rng);
        p.d_net_max = p.d_net_min + d(rng);
        p.d_ctrl_min = d(rng);
        p.d_ctrl_max = p.d_ctrl_min + d(rng);
        p.n_pd = static_cast<std::uint32_t>(rng() % 3);
        auto base = compute_delay_bounds(p, 4000, 30);
        EXPECT_GE(base.n_min, 1u);
        NetworkParams q = p;
        q.d_req_max += grow(rng);
        q.d_net_max += grow(rng);
        q.d_ctrl_max += grow(rng);
        q.n_pd += 1;
        auto wider = compute_delay_bounds(q, 4000, 30);
        EXPECT_GE(wider.n_max, base.n_max);
        EXPECT_EQ(wider.n_min, base.n_min);
    }
}

TEST(DelayBounds, InvalidParamsRejected) {
    NetworkParams p = vehicle_network();
    p.b_min = 0.0;
    EXPECT_THROW(compute_delay_bounds(p, 10, 10), InvalidArgument);
    p = vehicle_network();
    p.d_net_min = 1.0;
    EXPECT_THROW(compute_delay_bounds(p, 10, 10), InvalidArgument);
    p = vehicle_network();
    p.n_pc_plus = -1.0;
    EXPECT_THROW(compute_delay_bounds(p, 10, 10), InvalidArgument);
}

TEST(DelaySampler, FixedPolicy) {
    DelaySampler s(fixed_delay_bounds(1, 3), policy::Fixed{2});
    for (int i = 0; i < 20; ++i) EXPECT_EQ(s.next(), 2u);
}

TEST(DelaySampler, WorstAndBestCase) {
    DelaySampler w(fixed_delay_bounds(1, 3), policy::WorstCaseMax{});
    DelaySampler b(fixed_delay_bounds(1, 3), policy::BestCaseMin{});
    for (int i = 0; i < 20; ++i) {
        EXPECT_EQ(w.next(), 3u);
        EXPECT_EQ(b.next(), 1u);
    }
}

TEST(DelaySampler, UniformFrequencies) {
    DelaySampler s(fixed_delay_bounds(1, 3), policy::Uniform{17});
    std::array<int, 4> count{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto v = s.next();
        ASSERT_GE(v, 1u);
        ASSERT_LE(v, 3u);
        ++count[v];
    }
    for (int v = 1; v <= 3; ++v) EXPECT_NEAR(count[v] / double(n), 1.0 / 3.0, 0.02);
}

TEST(DelaySampler, UniformIsReproducible) {
    DelaySampler a(fixed_delay_bounds(1, 3), policy::Uniform{5}), b(fixed_delay_bounds(1, 3), policy::Uniform{5});
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(DelaySampler, AdversarialSequenceRunsOut) {
    DelaySampler s(fixed_delay_bounds(1, 3), policy::Adversarial{{3, 1, 2}});
    EXPECT_EQ(s.next(), 3u);
    EXPECT_EQ(s.next(), 1u);
    EXPECT_EQ(s.next(), 2u);
    EXPECT_THROW(s.next(), PolicyExhausted);
}

TEST(DelaySampler, AdversarialOutOfRangeRejected) {
    DelaySampler s(fixed_delay_bounds(1, 3), policy::Adversarial{{4}});
    EXPECT_THROW(s.next(), InvalidArgument);
}

TEST(DelayPolicy, ParseAndDescribe) {
    for (std::string text : {"uniform:7", "fixed:2", "adversarial:1,3,2", "worst", "best"})
        EXPECT_EQ(describe(parse_policy(text)), text);
    EXPECT_THROW(parse_policy("sometimes"), ConfigError);
}
