#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace ncs {

struct NetworkParams {
    double b_min = 0.0;  // bits/s
    double b_max = 0.0;
    double n_pc_plus = 0.0;  // relative overhead, sensor-to-controller messages
    double n_cp_plus = 0.0;  // relative overhead, controller-to-actuator messages
    double d_req_min = 0.0, d_req_max = 0.0;
    double d_net_min = 0.0, d_net_max = 0.0;
    double d_ctrl_min = 0.0, d_ctrl_max = 0.0;
    std::uint32_t n_pd = 0;  // max successive dropouts
    double tau = 1.0;

    void validate() const;
};

struct DelayBounds {
    std::uint64_t bits_pc = 0;
    std::uint64_t bits_cp = 0;
    double d_b_pc_min = 0.0, d_b_pc_max = 0.0;
    double d_b_cp_min = 0.0, d_b_cp_max = 0.0;
    double delta_bar_min = 0.0, delta_bar_max = 0.0;
    double delta_min = 0.0, delta_max = 0.0;
    std::uint32_t n_min = 1;
    std::uint32_t n_max = 1;

    std::uint32_t span() const { return n_max - n_min + 1; }
};

std::uint64_t ceil_log2(std::uint64_t count);
std::uint64_t message_bits(std::uint64_t count, double overhead);
// ceil(value) after a 1e-12 downward nudge.
std::uint32_t nudged_ceil(double value);

DelayBounds compute_delay_bounds(const NetworkParams& p, std::uint64_t n_states, std::uint64_t n_inputs);
// Bounds given directly in sampling intervals.
DelayBounds fixed_delay_bounds(std::uint32_t n_min, std::uint32_t n_max);

namespace policy {
struct Uniform {
    std::uint64_t seed = 0;
};
struct Fixed {
    std::uint32_t n = 1;
};
struct Adversarial {
    std::vector<std::uint32_t> sequence;
};
struct WorstCaseMax {};
struct BestCaseMin {};
}  // namespace policy

using DelayPolicy =
    std::variant<policy::Uniform, policy::Fixed, policy::Adversarial, policy::WorstCaseMax, policy::BestCaseMin>;

std::string describe(const DelayPolicy& p);
// Parses "uniform:SEED", "fixed:N", "adversarial:1,3,2", "worst", "best".
DelayPolicy parse_policy(const std::string& text);

// Stateful delay source with its own generator stream.
class DelaySampler {
public:
    DelaySampler(DelayBounds bounds, DelayPolicy policy);
    std::uint32_t next();
    std::size_t draws() const { return draws_; }

private:
    DelayBounds bounds_;
    DelayPolicy policy_;
    std::mt19937_64 rng_;
    std::size_t draws_ = 0;
};

}  // namespace ncs
