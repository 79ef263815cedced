#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ncs/geometry.hpp"

namespace ncs {

using StateId = std::uint32_t;
using InputId = std::uint32_t;
using Burst = std::vector<Vec>;

// The single label of a lifted specification.
inline constexpr InputId kSpecInput = std::numeric_limits<InputId>::max();

// Burst distance: empty when lengths differ.
using BurstDistance = std::optional<double>;
inline constexpr std::nullopt_t kIncomparable = std::nullopt;
inline constexpr double kMetricTol = 1e-12;

BurstDistance burst_distance(const Burst& a, const Burst& b);
inline bool within(const BurstDistance& d, double eps) { return d.has_value() && *d <= eps + kMetricTol; }

struct Edge {
    InputId input;
    StateId dst;
    auto operator<=>(const Edge&) const = default;
};

class FiniteSystem {
public:
    // Returns the existing id when the key is already present; OutputClash if outputs differ.
    StateId add_state(const std::string& key, Burst output);
    std::optional<StateId> find(const std::string& key) const;
    void set_initial(StateId s);
    void add_input(InputId u);
    void add_transition(StateId src, InputId u, StateId dst);
    void set_expanded(StateId s, bool expanded) { expanded_.at(s) = expanded; }
    void set_truncated(bool t) { truncated_ = t; }

    std::size_t num_states() const { return keys_.size(); }
    std::size_t num_transitions() const { return num_transitions_; }
    const std::string& key(StateId s) const { return keys_.at(s); }
    const Burst& output(StateId s) const { return outputs_.at(s); }
    bool is_initial(StateId s) const { return initial_flag_.at(s); }
    bool is_expanded(StateId s) const { return expanded_.at(s); }
    bool truncated() const { return truncated_; }
    const std::vector<StateId>& initial_states() const { return initial_; }
    const std::vector<InputId>& inputs() const { return inputs_; }
    bool has_input(InputId u) const;

    // Sorted by (input, dst).
    const std::vector<Edge>& edges(StateId s) const { return out_.at(s); }
    std::vector<StateId> post(StateId s, InputId u) const;
    std::vector<InputId> enabled_inputs(StateId s) const;
    bool has_transition(StateId src, InputId u, StateId dst) const;
    // Incoming edges; Edge::dst holds the source. Rebuilt when the system changed.
    const std::vector<std::vector<Edge>>& reverse() const;

private:
    std::vector<std::string> keys_;
    std::unordered_map<std::string, StateId> index_;
    std::vector<Burst> outputs_;
    std::vector<bool> initial_flag_;
    std::vector<bool> expanded_;
    std::vector<StateId> initial_;
    std::vector<InputId> inputs_;
    std::vector<std::vector<Edge>> out_;
    std::size_t num_transitions_ = 0;
    bool truncated_ = false;
    mutable std::vector<std::vector<Edge>> reverse_;
    mutable bool reverse_valid_ = false;
};

bool is_subsystem(const FiniteSystem& s1, const FiniteSystem& s2);
FiniteSystem system_union(const FiniteSystem& s1, const FiniteSystem& s2);
bool is_nonblocking(const FiniteSystem& s);
// Same state keys, outputs, initial states, inputs and transitions.
bool same_system(const FiniteSystem& a, const FiniteSystem& b);

void write_system(std::ostream& os, const FiniteSystem& s);
FiniteSystem read_system(std::istream& is);

std::string hex_encode(const std::string& bytes);
std::string hex_decode(const std::string& hex);

}  // namespace ncs
