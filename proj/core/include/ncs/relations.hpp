#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncs/tsys.hpp"

namespace ncs {

enum class Flavor { ApproxSim, AltApproxSim, StrongAltSim, StrongAltBisim };
const char* flavor_name(Flavor f);
Flavor parse_flavor(const std::string& s);

using StatePair = std::pair<StateId, StateId>;

class PairRelation {
public:
    PairRelation() = default;
    PairRelation(std::vector<StatePair> pairs, double epsilon, Flavor flavor);

    const std::vector<StatePair>& pairs() const { return pairs_; }
    double epsilon() const { return epsilon_; }
    Flavor flavor() const { return flavor_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }
    bool contains(StateId a, StateId b) const;
    // Partners of a in sorted order.
    std::vector<StateId> image(StateId a) const;
    PairRelation inverse() const;
    bool subset_of(const PairRelation& other) const;
    bool operator==(const PairRelation& o) const { return pairs_ == o.pairs_; }

private:
    std::vector<StatePair> pairs_;  // sorted, unique
    double epsilon_ = 0.0;
    Flavor flavor_ = Flavor::ApproxSim;
};

PairRelation identity_relation(const FiniteSystem& s, Flavor flavor = Flavor::StrongAltBisim);

struct RelationResult {
    // The greatest relation satisfying (ii) and the transfer condition; possibly empty.
    PairRelation fixpoint;
    // Initial states left unrelated; non-empty means ABSENT.
    std::vector<StateId> uncovered_first;   // initial states of s1
    std::vector<StateId> uncovered_second;  // initial states of s2 (bisimulation only)
    std::size_t deletions = 0;
    std::string diagnostic;

    bool absent() const { return !uncovered_first.empty() || !uncovered_second.empty(); }
};

RelationResult largest_relation(const FiniteSystem& s1, const FiniteSystem& s2, double eps, Flavor flavor);
inline RelationResult largest_approx_sim(const FiniteSystem& s1, const FiniteSystem& s2, double eps) {
    return largest_relation(s1, s2, eps, Flavor::ApproxSim);
}
inline RelationResult largest_strong_alt_sim(const FiniteSystem& s1, const FiniteSystem& s2, double eps) {
    return largest_relation(s1, s2, eps, Flavor::StrongAltSim);
}
inline RelationResult strong_alt_bisim(const FiniteSystem& s1, const FiniteSystem& s2, double eps) {
    return largest_relation(s1, s2, eps, Flavor::StrongAltBisim);
}

struct Violation {
    std::string condition;  // "i", "ii", "iii", "iii'", "iii''", with "inverse " prefix for the reverse direction
    StateId first = 0;
    StateId second = 0;
    InputId input = 0;
    std::string detail;
};

struct RelationCheck {
    std::vector<Violation> violations;
    std::size_t pairs_checked = 0;
    std::size_t frontier_pairs = 0;  // pairs exempt from the transfer condition (unexpanded state)
    bool ok() const { return violations.empty(); }
};

struct CheckOptions {
    bool skip_unexpanded = true;
    bool check_initial = true;
    std::size_t max_violations = 100;
};

// Checks rel against its flavor from s1 to s2; bisimulations are also checked in reverse.
RelationCheck check_relation(const FiniteSystem& s1, const FiniteSystem& s2, const PairRelation& rel,
                             const CheckOptions& opt = {});
RelationCheck check_relation(const FiniteSystem& s1, const FiniteSystem& s2, const PairRelation& rel, Flavor as,
                             const CheckOptions& opt = {});

// Relational composition; precision adds up. Both relations must be in the same family
// (approximate, or alternating).
PairRelation compose(const PairRelation& rab, const PairRelation& rbc);

struct FeedbackSystem {
    FiniteSystem system;
    std::vector<StatePair> components;  // (plant state, controller state) per product state
    bool degenerate = false;
};

// Product of plant and controller restricted to rel^-1, where rel is a strong alternating
// simulation from the controller to the plant.
FeedbackSystem feedback_compose(const FiniteSystem& s_plant, const FiniteSystem& s_ctrl, const PairRelation& rel,
                                double eps);

void write_relation(std::ostream& os, const PairRelation& r);
PairRelation read_relation(std::istream& is);

}  // namespace ncs
