#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ncs/abstraction.hpp"
#include "ncs/relations.hpp"
#include "ncs/tsys.hpp"

namespace ncs {

struct Specification {
    std::vector<std::string> names;  // one per point; may be empty strings
    std::vector<Vec> points;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> transitions;
    std::vector<std::uint32_t> initial;
    std::map<std::string, std::vector<std::uint32_t>> regions;  // optional labelled groups

    std::size_t size() const { return points.size(); }
    void validate() const;
    // Sorted successor lists.
    std::vector<std::vector<std::uint32_t>> successors() const;
    bool has_transition(std::uint32_t a, std::uint32_t b) const;
};

// States: the bare initial layer, then every T_Q-path with length in [n_min; n_max]. Single
// input kSpecInput.
struct LiftedSpec {
    FiniteSystem system;
    std::vector<std::vector<std::uint32_t>> paths;  // spec indices per lifted state
    std::vector<bool> bare;                         // initial-layer flag
};

LiftedSpec lift_spec(const Specification& q, std::uint32_t n_min, std::uint32_t n_max,
                     std::uint64_t budget = 10000000);
std::string lifted_key(const std::vector<std::uint32_t>& path, bool bare);

ParameterReport check_parameters(double mu_x, double theta, double eps, double mu_hat, Variant variant,
                                 const LyapunovCertificate& cert, double tau);

struct SynthesisStats {
    std::string engine;
    std::size_t candidates = 0;   // product pairs or cores considered
    std::size_t surviving = 0;
    std::size_t iterations = 0;
    std::size_t initial_candidates = 0;
    std::vector<std::string> first_removed;  // diagnostic sample from the first pruning wave
};

struct ControllerResult {
    FiniteSystem controller;            // sub-system of the symbolic model
    std::vector<SymbolicState> states;  // per controller id
    FiniteSystem spec_part;             // lifted-spec states the controller is related to
    PairRelation spec_relation;         // controller -> spec_part, approximate simulation at mu_x
    FiniteSystem star_part;             // symbolic-model fragment around the controller
    PairRelation star_relation;         // controller -> star_part, strong alternating at 0
    SynthesisStats stats;
};

// Product greatest fixpoint over an explicitly built symbolic model and lifted spec.
// Throws EmptyController when no initial state survives.
ControllerResult synthesize_explicit(const FiniteSystem& s_star, const LiftedSpec& sq, double mu_x);

struct GameOptions {
    std::uint64_t budget = 2000000;  // cores
    std::uint64_t state_budget = 2000000;
    unsigned jobs = 1;
};

// Same fixpoint computed on cores (anchor, held input, spec point): successors of a symbolic
// state depend only on its last element and held input, and spec successors only on the last
// spec point. Only cores reachable from initial pairs are explored.
ControllerResult synthesize_lazy(const Abstraction& abs, const Specification& q, double mu_x,
                                 const GameOptions& opt = {});

struct WitnessCheck {
    bool subsystem = false;
    bool nonblocking = false;
    RelationCheck spec;
    RelationCheck star;
    bool ok() const { return subsystem && nonblocking && spec.ok() && star.ok(); }
};

// Independent re-check of the two witnesses with the relation checkers.
WitnessCheck verify_witnesses(const ControllerResult& r);

}  // namespace ncs
