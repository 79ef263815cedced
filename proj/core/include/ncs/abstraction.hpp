#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ncs/certificate.hpp"
#include "ncs/geometry.hpp"
#include "ncs/network.hpp"
#include "ncs/plant.hpp"
#include "ncs/tsys.hpp"

namespace ncs {

// (x_1, ..., x_N, held). P is Vec for concrete states, Coord for lattice states.
template <class P>
struct AggregateState {
    std::vector<P> burst;
    InputId held = 0;
    bool initial_form = false;

    const P& last() const { return burst.back(); }
    bool operator==(const AggregateState&) const = default;
};

using ConcreteState = AggregateState<Vec>;
using SymbolicState = AggregateState<Coord>;

enum class Variant { FC, GAS };
const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);

struct AbstractionConfig {
    Lattice lattice;   // step per axis over X
    double mu_x = 0.0; // quantization accuracy used in the bounds
    DelayBounds bounds;
    Variant variant = Variant::FC;
    double epsilon = 0.0;
    double theta = 0.0;
};

struct ConditionCheck {
    std::string name;
    std::string formula;
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
    double margin() const { return rhs - lhs; }
};

struct ParameterReport {
    std::vector<ConditionCheck> checks;
    bool ok() const;
    const ConditionCheck* first_failure() const;
};

// Quantizer and construction conditions on mu_x (variant-specific).
ParameterReport check_abstraction(const AbstractionConfig& cfg, const LyapunovCertificate& cert, double tau);

// Key encodings used to intern states.
std::string state_key(const SymbolicState& s);
std::string state_key(const ConcreteState& s);
// Inverse of the symbolic encoding; nothing for other keys.
std::optional<SymbolicState> decode_state_key(const std::string& key);

class Abstraction {
public:
    Abstraction(const PlantModel& plant, const LyapunovCertificate& cert, AbstractionConfig cfg);

    const PlantModel& plant() const { return plant_; }
    const LyapunovCertificate& certificate() const { return cert_; }
    const AbstractionConfig& config() const { return cfg_; }
    const Lattice& lattice() const { return cfg_.lattice; }

    double growth() const { return growth_; }
    double link_bound() const { return link_bound_; }
    double search_radius() const { return radius_; }

    // [f(x, u)] on the lattice, or nothing when the image leaves X (FC: farther than the
    // link radius). Cached, thread-safe.
    std::optional<Coord> quantized_image(const Coord& x, InputId u) const;
    // Lattice points admissible right after a burst element whose quantized image is img.
    std::vector<Coord> link_candidates(const Coord& img) const;
    bool admissible_link(const Coord& img, const Coord& next) const;

    SymbolicState initial_symbolic(const Coord& x0) const;
    std::vector<SymbolicState> initial_symbolic_states() const;
    ConcreteState initial_concrete(const Vec& x0) const;

    // Every symbolic successor under input u for burst lengths in [n_min; n_max], N-ascending
    // then lexicographic.
    std::vector<SymbolicState> successors(const SymbolicState& s, InputId u) const;
    // Restricted to one burst length.
    std::vector<SymbolicState> successors(const SymbolicState& s, InputId u, std::uint32_t n) const;
    // Membership test for a single transition, without enumeration.
    bool is_transition(const SymbolicState& from, InputId u, const SymbolicState& to) const;

    // Unique concrete successor, or nothing when an iterate leaves X.
    std::optional<ConcreteState> concrete_successor(const ConcreteState& s, InputId u, std::uint32_t n) const;
    // Componentwise [.] of a concrete state.
    SymbolicState quantize_state(const ConcreteState& s) const;

    Burst output(const SymbolicState& s) const;
    static Burst output(const ConcreteState& s) { return s.burst; }

    std::size_t cached_images() const;

private:
    std::optional<Coord> boundary_image(const Vec& y) const;
    void expand_fc(const SymbolicState& s, InputId u, std::uint32_t n_lo, std::uint32_t n_hi,
                   std::vector<SymbolicState>& out) const;
    void expand_gas(const SymbolicState& s, InputId u, std::uint32_t n_lo, std::uint32_t n_hi,
                    std::vector<SymbolicState>& out) const;

    const PlantModel& plant_;
    const LyapunovCertificate& cert_;
    AbstractionConfig cfg_;
    double growth_;
    double link_bound_;
    double radius_;

    struct Cache;
    std::shared_ptr<Cache> cache_;
};

struct BuildOptions {
    std::uint64_t budget = 1000000;
    bool require_complete = false;
    std::uint32_t max_depth = UINT32_MAX;
    unsigned jobs = 1;
};

template <class P>
struct BuiltSystem {
    FiniteSystem system;
    std::vector<AggregateState<P>> states;
    std::uint32_t depth_reached = 0;
};

// Breadth-first closure of the seeds under the successor map over the plant inputs.
// Frontier waves are expanded in parallel and merged in canonical order.
BuiltSystem<Coord> build_symbolic(const Abstraction& abs, const std::vector<SymbolicState>& seeds,
                                  const BuildOptions& opt);
BuiltSystem<Vec> build_concrete(const Abstraction& abs, const std::vector<ConcreteState>& seeds,
                                const BuildOptions& opt);

struct SystemStats {
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::size_t initial = 0;
    std::size_t unexpanded = 0;
    std::map<std::size_t, std::size_t> branching;  // successor count per (state, input) -> occurrences
};
SystemStats system_stats(const FiniteSystem& s);

}  // namespace ncs
