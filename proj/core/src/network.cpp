#include "ncs/network.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "ncs/error.hpp"

namespace ncs {

void NetworkParams::validate() const {
    if (!(b_min > 0.0) || !(b_min <= b_max)) throw InvalidArgument("require 0 < b_min <= b_max");
    if (!(n_pc_plus > -1.0) || !(n_cp_plus > -1.0)) throw InvalidArgument("overheads must exceed -1");
    auto ordered = [](double lo, double hi, const char* name) {
        if (!(lo >= 0.0) || !(lo <= hi)) throw InvalidArgument(std::string(name) + ": require 0 <= min <= max");
    };
    ordered(d_req_min, d_req_max, "network access wait");
    ordered(d_net_min, d_net_max, "delivery delay");
    ordered(d_ctrl_min, d_ctrl_max, "controller computation time");
    if (!(tau > 0.0)) throw InvalidArgument("sampling time must be positive");
}

std::uint64_t ceil_log2(std::uint64_t count) {
    if (count <= 1) return 0;
    return static_cast<std::uint64_t>(std::bit_width(count - 1));
}

std::uint64_t message_bits(std::uint64_t count, double overhead) {
    if (count < 1) throw InvalidArgument("message alphabet must be nonempty");
    double raw = (1.0 + overhead) * static_cast<double>(ceil_log2(count));
    return static_cast<std::uint64_t>(std::ceil(raw - 1e-9));
}

std::uint32_t nudged_ceil(double value) {
    double c = std::ceil(value - 1e-12);
    return c < 0 ? 0u : static_cast<std::uint32_t>(c);
}

DelayBounds compute_delay_bounds(const NetworkParams& p, std::uint64_t n_states, std::uint64_t n_inputs) {
    p.validate();
    if (n_states < 1 || n_inputs < 1) throw InvalidArgument("state and input counts must be positive");
    DelayBounds d;
    d.bits_pc = message_bits(n_states, p.n_pc_plus);
    d.bits_cp = message_bits(n_inputs, p.n_cp_plus);
    d.d_b_pc_min = static_cast<double>(d.bits_pc) / p.b_max;
    d.d_b_pc_max = static_cast<double>(d.bits_pc) / p.b_min;
    d.d_b_cp_min = static_cast<double>(d.bits_cp) / p.b_max;
    d.d_b_cp_max = static_cast<double>(d.bits_cp) / p.b_min;
    d.delta_bar_min = d.d_b_pc_min + p.d_ctrl_min + d.d_b_cp_min + 2.0 * p.d_req_min + 2.0 * p.d_net_min;
    d.delta_bar_max = d.d_b_pc_max + p.d_ctrl_max + d.d_b_cp_max + 2.0 * p.d_req_max + 2.0 * p.d_net_max;
    d.delta_min = d.delta_bar_min;
    d.delta_max = (1.0 + static_cast<double>(p.n_pd)) * d.delta_bar_max;
    d.n_min = nudged_ceil(d.delta_min / p.tau);
    d.n_max = nudged_ceil(d.delta_max / p.tau);
    if (d.n_min < 1) d.n_min = 1;
    if (d.n_max < d.n_min) d.n_max = d.n_min;
    return d;
}

DelayBounds fixed_delay_bounds(std::uint32_t n_min, std::uint32_t n_max) {
    if (n_min < 1 || n_max < n_min) throw InvalidArgument("require 1 <= n_min <= n_max");
    DelayBounds d;
    d.n_min = n_min;
    d.n_max = n_max;
    return d;
}

std::string describe(const DelayPolicy& p) {
    struct V {
        std::string operator()(const policy::Uniform& u) const { return "uniform:" + std::to_string(u.seed); }
        std::string operator()(const policy::Fixed& f) const { return "fixed:" + std::to_string(f.n); }
        std::string operator()(const policy::Adversarial& a) const {
            std::string s = "adversarial:";
            for (std::size_t i = 0; i < a.sequence.size(); ++i)
                s += (i ? "," : "") + std::to_string(a.sequence[i]);
            return s;
        }
        std::string operator()(const policy::WorstCaseMax&) const { return "worst"; }
        std::string operator()(const policy::BestCaseMin&) const { return "best"; }
    };
    return std::visit(V{}, p);
}

DelayPolicy parse_policy(const std::string& text) {
    auto colon = text.find(':');
    std::string head = text.substr(0, colon);
    std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (head == "uniform") return policy::Uniform{tail.empty() ? 0 : std::stoull(tail)};
        if (head == "fixed") return policy::Fixed{static_cast<std::uint32_t>(std::stoul(tail))};
        if (head == "worst" || head == "worst-case-max") return policy::WorstCaseMax{};
        if (head == "best" || head == "best-case-min") return policy::BestCaseMin{};
        if (head == "adversarial") {
            policy::Adversarial a;
            std::stringstream ss(tail);
            std::string item;
            while (std::getline(ss, item, ',')) a.sequence.push_back(static_cast<std::uint32_t>(std::stoul(item)));
            return a;
        }
    } catch (const std::logic_error&) {
        throw ConfigError("malformed delay policy '" + text + "'");
    }
    throw ConfigError("unknown delay policy '" + text + "'");
}

DelaySampler::DelaySampler(DelayBounds bounds, DelayPolicy policy)
    : bounds_(bounds), policy_(std::move(policy)) {
    if (auto* u = std::get_if<policy::Uniform>(&policy_)) rng_.seed(u->seed);
    if (auto* f = std::get_if<policy::Fixed>(&policy_))
        if (f->n < bounds_.n_min || f->n > bounds_.n_max)
            throw InvalidArgument("fixed delay outside [n_min; n_max]");
}

std::uint32_t DelaySampler::next() {
    std::size_t index = draws_++;
    if (std::holds_alternative<policy::Uniform>(policy_))
        return bounds_.n_min + static_cast<std::uint32_t>(rng_() % bounds_.span());
    if (auto* f = std::get_if<policy::Fixed>(&policy_)) return f->n;
    if (std::holds_alternative<policy::WorstCaseMax>(policy_)) return bounds_.n_max;
    if (std::holds_alternative<policy::BestCaseMin>(policy_)) return bounds_.n_min;
    auto& seq = std::get<policy::Adversarial>(policy_).sequence;
    if (index >= seq.size()) throw PolicyExhausted("adversarial delay sequence exhausted after " + std::to_string(seq.size()) + " draws");
    std::uint32_t n = seq[index];
    if (n < bounds_.n_min || n > bounds_.n_max) throw InvalidArgument("adversarial delay outside [n_min; n_max]");
    return n;
}

}  // namespace ncs
