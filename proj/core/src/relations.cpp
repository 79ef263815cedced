#include "ncs/relations.hpp"

#include <fmt/format.h>
#include <algorithm>
#include <functional>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "ncs/error.hpp"

namespace ncs {

const char* flavor_name(Flavor f) {
    switch (f) {
        case Flavor::ApproxSim: return "approx-sim";
        case Flavor::AltApproxSim: return "alt-approx-sim";
        case Flavor::StrongAltSim: return "strong-alt-sim";
        case Flavor::StrongAltBisim: return "strong-alt-bisim";
    }
    return "?";
}

Flavor parse_flavor(const std::string& s) {
    for (Flavor f : {Flavor::ApproxSim, Flavor::AltApproxSim, Flavor::StrongAltSim, Flavor::StrongAltBisim})
        if (s == flavor_name(f)) return f;
    throw FormatError("unknown relation flavor '" + s + "'");
}

PairRelation::PairRelation(std::vector<StatePair> pairs, double epsilon, Flavor flavor)
    : pairs_(std::move(pairs)), epsilon_(epsilon), flavor_(flavor) {
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

bool PairRelation::contains(StateId a, StateId b) const {
    return std::binary_search(pairs_.begin(), pairs_.end(), StatePair{a, b});
}

std::vector<StateId> PairRelation::image(StateId a) const {
    std::vector<StateId> out;
    for (auto it = std::lower_bound(pairs_.begin(), pairs_.end(), StatePair{a, 0}); it != pairs_.end() && it->first == a;
         ++it)
        out.push_back(it->second);
    return out;
}

PairRelation PairRelation::inverse() const {
    std::vector<StatePair> inv;
    inv.reserve(pairs_.size());
    for (auto [a, b] : pairs_) inv.emplace_back(b, a);
    return {std::move(inv), epsilon_, flavor_};
}

bool PairRelation::subset_of(const PairRelation& other) const {
    return std::includes(other.pairs_.begin(), other.pairs_.end(), pairs_.begin(), pairs_.end());
}

PairRelation identity_relation(const FiniteSystem& s, Flavor flavor) {
    std::vector<StatePair> p;
    for (StateId x = 0; x < s.num_states(); ++x) p.emplace_back(x, x);
    return {std::move(p), 0.0, flavor};
}

namespace {

template <class In>
std::optional<Violation> transfer(const FiniteSystem& s1, const FiniteSystem& s2, StateId a, StateId b, Flavor f,
                                  const In& in) {
    auto fail = [&](const char* cond, InputId u, std::string detail) {
        return std::optional<Violation>(Violation{cond, a, b, u, std::move(detail)});
    };
    switch (f) {
        case Flavor::ApproxSim:
            for (const auto& e1 : s1.edges(a)) {
                bool matched = std::any_of(s2.edges(b).begin(), s2.edges(b).end(),
                                           [&](const Edge& e2) { return in(e1.dst, e2.dst); });
                if (!matched) return fail("iii", e1.input, fmt::format("successor {} unmatched", e1.dst));
            }
            return std::nullopt;
        case Flavor::AltApproxSim:
            for (InputId u1 : s1.enabled_inputs(a)) {
                auto post1 = s1.post(a, u1);
                bool some = false;
                for (InputId u2 : s2.enabled_inputs(b)) {
                    bool all = true;
                    for (StateId b2 : s2.post(b, u2))
                        if (!std::any_of(post1.begin(), post1.end(), [&](StateId a2) { return in(a2, b2); })) {
                            all = false;
                            break;
                        }
                    if (all) {
                        some = true;
                        break;
                    }
                }
                if (!some) return fail("iii'", u1, "no answering input");
            }
            return std::nullopt;
        case Flavor::StrongAltSim:
        case Flavor::StrongAltBisim: {
            for (InputId u : s1.enabled_inputs(a)) {
                auto post2 = s2.post(b, u);
                if (post2.empty()) return fail("iii''", u, "input not enabled on the second system");
                auto post1 = s1.post(a, u);
                for (StateId b2 : post2)
                    if (!std::any_of(post1.begin(), post1.end(), [&](StateId a2) { return in(a2, b2); }))
                        return fail("iii''", u, fmt::format("successor {} of the second system unmatched", b2));
            }
            if (f == Flavor::StrongAltSim) return std::nullopt;
            for (InputId u : s2.enabled_inputs(b)) {
                auto post1 = s1.post(a, u);
                if (post1.empty()) return fail("inverse iii''", u, "input not enabled on the first system");
                auto post2 = s2.post(b, u);
                for (StateId a2 : post1)
                    if (!std::any_of(post2.begin(), post2.end(), [&](StateId b2) { return in(a2, b2); }))
                        return fail("inverse iii''", u, fmt::format("successor {} of the first system unmatched", a2));
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::uint64_t pack(StateId a, StateId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

std::vector<StateId> uncovered(const FiniteSystem& s1, const FiniteSystem& s2,
                               const std::function<bool(StateId, StateId)>& in) {
    std::vector<StateId> out;
    for (StateId a : s1.initial_states())
        if (!std::any_of(s2.initial_states().begin(), s2.initial_states().end(), [&](StateId b) { return in(a, b); }))
            out.push_back(a);
    return out;
}

}  // namespace

RelationResult largest_relation(const FiniteSystem& s1, const FiniteSystem& s2, double eps, Flavor flavor) {
    RelationResult res;
    std::unordered_set<std::uint64_t> rel;
    std::deque<StatePair> work;
    for (StateId a = 0; a < s1.num_states(); ++a)
        for (StateId b = 0; b < s2.num_states(); ++b)
            if (within(burst_distance(s1.output(a), s2.output(b)), eps)) {
                rel.insert(pack(a, b));
                work.emplace_back(a, b);
            }
    auto in = [&](StateId a, StateId b) { return rel.count(pack(a, b)) > 0; };
    bool same_label = flavor == Flavor::StrongAltSim || flavor == Flavor::StrongAltBisim;
    const auto& rev1 = s1.reverse();
    const auto& rev2 = s2.reverse();
    while (!work.empty()) {
        auto [a, b] = work.front();
        work.pop_front();
        if (!in(a, b)) continue;
        if (!transfer(s1, s2, a, b, flavor, in)) continue;
        rel.erase(pack(a, b));
        ++res.deletions;
        for (const auto& p1 : rev1[a])
            for (const auto& p2 : rev2[b])
                if ((!same_label || p1.input == p2.input) && in(p1.dst, p2.dst)) work.emplace_back(p1.dst, p2.dst);
    }
    std::vector<StatePair> pairs;
    pairs.reserve(rel.size());
    for (auto k : rel) pairs.emplace_back(static_cast<StateId>(k >> 32), static_cast<StateId>(k & 0xffffffffu));
    res.fixpoint = PairRelation(std::move(pairs), eps, flavor);
    const PairRelation& fp = res.fixpoint;
    res.uncovered_first = uncovered(s1, s2, [&](StateId a, StateId b) { return fp.contains(a, b); });
    if (flavor == Flavor::StrongAltBisim)
        res.uncovered_second = uncovered(s2, s1, [&](StateId b, StateId a) { return fp.contains(a, b); });
    if (res.absent()) {
        std::string d = "ABSENT:";
        if (!res.uncovered_first.empty()) {
            d += " initial states of the first system without a partner:";
            for (StateId x : res.uncovered_first) d += " " + std::to_string(x);
        }
        if (!res.uncovered_second.empty()) {
            d += " initial states of the second system without a partner:";
            for (StateId x : res.uncovered_second) d += " " + std::to_string(x);
        }
        res.diagnostic = d;
    }
    return res;
}

RelationCheck check_relation(const FiniteSystem& s1, const FiniteSystem& s2, const PairRelation& rel,
                             const CheckOptions& opt) {
    return check_relation(s1, s2, rel, rel.flavor(), opt);
}

RelationCheck check_relation(const FiniteSystem& s1, const FiniteSystem& s2, const PairRelation& rel, Flavor as,
                             const CheckOptions& opt) {
    RelationCheck rc;
    auto add = [&](Violation v) {
        if (rc.violations.size() < opt.max_violations) rc.violations.push_back(std::move(v));
    };
    auto in = [&](StateId a, StateId b) { return rel.contains(a, b); };
    for (auto [a, b] : rel.pairs()) {
        if (a >= s1.num_states() || b >= s2.num_states()) {
            add({"ii", a, b, 0, "pair refers to a missing state"});
            continue;
        }
        ++rc.pairs_checked;
        auto d = burst_distance(s1.output(a), s2.output(b));
        if (!within(d, rel.epsilon()))
            add({"ii", a, b, 0, d ? fmt::format("output distance {} > {}", *d, rel.epsilon()) : "incomparable outputs"});
        if (opt.skip_unexpanded && (!s1.is_expanded(a) || !s2.is_expanded(b))) {
            ++rc.frontier_pairs;
            continue;
        }
        if (auto v = transfer(s1, s2, a, b, as, in)) add(std::move(*v));
    }
    if (opt.check_initial) {
        for (StateId a : uncovered(s1, s2, in)) add({"i", a, 0, 0, "initial state without an initial partner"});
        if (as == Flavor::StrongAltBisim)
            for (StateId b : uncovered(s2, s1, [&](StateId y, StateId x) { return in(x, y); }))
                add({"inverse i", 0, b, 0, "initial state without an initial partner"});
    }
    return rc;
}

static bool alternating(Flavor f) { return f != Flavor::ApproxSim; }

PairRelation compose(const PairRelation& rab, const PairRelation& rbc) {
    if (alternating(rab.flavor()) != alternating(rbc.flavor()))
        throw RelationFlavorMismatch(fmt::format("cannot compose {} with {}", flavor_name(rab.flavor()),
                                                 flavor_name(rbc.flavor())));
    Flavor f = std::min(rab.flavor(), rbc.flavor());
    if (alternating(f) && (rab.flavor() == Flavor::AltApproxSim || rbc.flavor() == Flavor::AltApproxSim))
        f = Flavor::AltApproxSim;
    std::map<StateId, std::vector<StateId>> next;
    for (auto [b, c] : rbc.pairs()) next[b].push_back(c);
    std::vector<StatePair> out;
    for (auto [a, b] : rab.pairs())
        if (auto it = next.find(b); it != next.end())
            for (StateId c : it->second) out.emplace_back(a, c);
    return {std::move(out), rab.epsilon() + rbc.epsilon(), f};
}

static std::string product_key(const std::string& k1, const std::string& k2) {
    std::string k = std::to_string(k1.size());
    k.push_back(':');
    k += k1;
    k += k2;
    return k;
}

FeedbackSystem feedback_compose(const FiniteSystem& s_plant, const FiniteSystem& s_ctrl, const PairRelation& rel,
                                double eps) {
    if (rel.flavor() != Flavor::StrongAltSim && rel.flavor() != Flavor::StrongAltBisim)
        throw RelationFlavorMismatch(fmt::format("feedback composition needs a strong alternating relation, got {}",
                                                 flavor_name(rel.flavor())));
    if (rel.epsilon() > eps + kMetricTol)
        throw InvalidArgument(fmt::format("relation precision {} exceeds composition precision {}", rel.epsilon(), eps));
    FeedbackSystem fs;
    fs.degenerate = rel.empty();
    std::vector<StatePair> comps;
    for (auto [c, p] : rel.pairs()) comps.emplace_back(p, c);
    std::sort(comps.begin(), comps.end());
    std::map<StatePair, StateId> index;
    for (InputId u : s_plant.inputs()) fs.system.add_input(u);
    for (auto [p, c] : comps) {
        StateId id = fs.system.add_state(product_key(s_plant.key(p), s_ctrl.key(c)), s_plant.output(p));
        index[{p, c}] = id;
        fs.components.emplace_back(p, c);
        if (s_plant.is_initial(p) && s_ctrl.is_initial(c)) fs.system.set_initial(id);
    }
    for (auto [pc, id] : index) {
        auto [p, c] = pc;
        for (const auto& e1 : s_plant.edges(p))
            for (StateId c2 : s_ctrl.post(c, e1.input))
                if (auto it = index.find({e1.dst, c2}); it != index.end())
                    fs.system.add_transition(id, e1.input, it->second);
    }
    return fs;
}

void write_relation(std::ostream& os, const PairRelation& r) {
    os << "# ncs-relation v1\n";
    os << "flavor " << flavor_name(r.flavor()) << " epsilon " << fmt::format("{}", r.epsilon()) << " pairs "
       << r.size() << "\n";
    for (auto [a, b] : r.pairs()) os << a << ' ' << b << "\n";
}

PairRelation read_relation(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "# ncs-relation v1") throw FormatError("missing relation header");
    std::getline(is, line);
    std::istringstream ls(line);
    std::string w1, f, w2, w3;
    double eps;
    std::size_t n;
    if (!(ls >> w1 >> f >> w2 >> eps >> w3 >> n) || w1 != "flavor") throw FormatError("bad relation header line");
    std::vector<StatePair> pairs(n);
    for (auto& p : pairs)
        if (!(is >> p.first >> p.second)) throw FormatError("truncated relation");
    return {std::move(pairs), eps, parse_flavor(f)};
}

}  // namespace ncs
