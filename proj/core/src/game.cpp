#include <fmt/format.h>
#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "ncs/error.hpp"
#include "ncs/synthesis.hpp"

namespace ncs {

namespace {

using SpecSet = std::vector<std::uint32_t>;
using InputSet = std::vector<InputId>;

InputSet intersect(const InputSet& a, const InputSet& b) {
    InputSet r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

std::string coord_key(const Coord& c) {
    std::string k;
    for (auto v : c) {
        auto x = static_cast<std::int32_t>(v);
        k.append(reinterpret_cast<const char*>(&x), 4);
    }
    return k;
}

// Successor burst end reached from a core: last element plus spec points reachable along
// a matching path from the core's spec successors (pred) and from anywhere (all).
struct Target {
    Coord last;
    SpecSet pred;
    SpecSet all;
    auto operator<=>(const Target&) const = default;
};

struct CoreEval {
    bool dead = false;
    std::vector<Target> targets;
};

class Game {
public:
    Game(const Abstraction& abs, const Specification& q, double mu_x, const GameOptions& opt)
        : abs_(abs), q_(q), mu_(mu_x), opt_(opt), succ_(q.successors()) {
        q_.validate();
        if (q_.points.front().size() != abs_.plant().dim_x) throw InvalidArgument("spec dimension differs from the plant");
        is_initial_.assign(q_.size(), false);
        for (auto i : q_.initial) is_initial_[i] = true;
        n_inputs_ = static_cast<InputId>(abs_.plant().inputs.size());
    }

    ControllerResult run();

private:
    struct Core {
        Coord anchor;
        InputId held;
        std::uint32_t spec;
    };

    const SpecSet& matches(const Coord& c) {
        std::string k = coord_key(c);
        {
            std::lock_guard lock(match_mutex_);
            if (auto it = match_cache_.find(k); it != match_cache_.end()) return it->second;
        }
        Vec p = abs_.lattice().point(c);
        SpecSet m;
        for (std::uint32_t s = 0; s < q_.size(); ++s)
            if (inf_dist(p, q_.points[s]) <= mu_ + kMetricTol) m.push_back(s);
        std::lock_guard lock(match_mutex_);
        return match_cache_.emplace(std::move(k), std::move(m)).first->second;
    }

    SpecSet step(const SpecSet& from, const SpecSet& allowed) const {
        SpecSet out;
        for (auto s : from)
            for (auto t : succ_[s])
                if (std::binary_search(allowed.begin(), allowed.end(), t)) out.push_back(t);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Contexts of a burst: spec points ending a matching lifted state.
    SpecSet burst_contexts(const SymbolicState& s) {
        const auto& first = matches(s.burst.front());
        if (s.initial_form) {
            if (abs_.config().bounds.n_min == 1) return first;
            SpecSet r;
            for (auto t : first)
                if (is_initial_[t]) r.push_back(t);
            return r;
        }
        SpecSet cur = first;
        for (std::size_t i = 1; i < s.burst.size(); ++i) cur = step(cur, matches(s.burst[i]));
        return cur;
    }

    CoreEval evaluate(const Core& core) {
        CoreEval ev;
        auto first = abs_.quantized_image(core.anchor, core.held);
        const auto& bounds = abs_.config().bounds;
        if (!first) {
            ev.dead = true;
            return ev;
        }
        SpecSet start{core.spec};
        std::function<bool(const Coord&, const SpecSet&, const SpecSet&, std::uint32_t)> dfs =
            [&](const Coord& img, const SpecSet& pred, const SpecSet& all, std::uint32_t depth) -> bool {
            for (const auto& c : abs_.link_candidates(img)) {
                const auto& m = matches(c);
                SpecSet p2 = step(pred, m);
                SpecSet a2 = depth == 0 ? m : step(all, m);
                std::uint32_t d = depth + 1;
                if (d >= bounds.n_min) {
                    if (p2.empty()) return false;
                    ev.targets.push_back(Target{c, p2, a2});
                }
                if (d < bounds.n_max)
                    if (auto nxt = abs_.quantized_image(c, core.held))
                        if (!dfs(*nxt, p2, a2, d)) return false;
            }
            return true;
        };
        if (!dfs(*first, start, {}, 0) || ev.targets.empty()) {
            ev.dead = true;
            ev.targets.clear();
            return ev;
        }
        std::sort(ev.targets.begin(), ev.targets.end());
        ev.targets.erase(std::unique(ev.targets.begin(), ev.targets.end()), ev.targets.end());
        return ev;
    }

    std::uint32_t intern(const Coord& anchor, InputId held, std::uint32_t spec, bool& fresh) {
        std::string k = coord_key(anchor);
        k.append(reinterpret_cast<const char*>(&held), 4);
        k.append(reinterpret_cast<const char*>(&spec), 4);
        if (auto it = index_.find(k); it != index_.end()) {
            fresh = false;
            return it->second;
        }
        fresh = true;
        auto id = static_cast<std::uint32_t>(cores_.size());
        cores_.push_back({anchor, held, spec});
        index_.emplace(std::move(k), id);
        return id;
    }

    std::optional<std::uint32_t> find(const Coord& anchor, InputId held, std::uint32_t spec) const {
        std::string k = coord_key(anchor);
        k.append(reinterpret_cast<const char*>(&held), 4);
        k.append(reinterpret_cast<const char*>(&spec), 4);
        if (auto it = index_.find(k); it != index_.end()) return it->second;
        return std::nullopt;
    }

    InputSet allowed(const Coord& last, InputId held, const SpecSet& ctx) const {
        std::optional<InputSet> acc;
        for (auto s : ctx) {
            auto id = find(last, held, s);
            if (!id || win_[*id].empty()) continue;
            acc = acc ? intersect(*acc, win_[*id]) : win_[*id];
        }
        return acc.value_or(InputSet{});
    }

    bool alive(const Coord& last, InputId held, std::uint32_t s) const {
        auto id = find(last, held, s);
        return id && !win_[*id].empty();
    }

    std::string describe(std::uint32_t id) const {
        const auto& c = cores_[id];
        return fmt::format("core anchor=({}) held={} spec={}", fmt::join(c.anchor, ","), c.held,
                           q_.names.empty() || q_.names[c.spec].empty() ? std::to_string(c.spec) : q_.names[c.spec]);
    }

    void discover(const std::vector<std::uint32_t>& seeds);
    void solve(ControllerResult& res);
    void materialize(ControllerResult& res, const std::vector<SymbolicState>& roots);

    const Abstraction& abs_;
    Specification q_;
    double mu_;
    GameOptions opt_;
    std::vector<std::vector<std::uint32_t>> succ_;
    std::vector<bool> is_initial_;
    InputId n_inputs_ = 0;

    std::mutex match_mutex_;
    std::unordered_map<std::string, SpecSet> match_cache_;
    std::vector<Core> cores_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<CoreEval> evals_;
    std::vector<bool> evaluated_;
    std::vector<InputSet> win_;
    bool truncated_ = false;
};

void Game::discover(const std::vector<std::uint32_t>& seeds) {
    std::vector<std::uint32_t> frontier = seeds;
    unsigned jobs = std::max(1u, opt_.jobs);
    while (!frontier.empty()) {
        std::vector<CoreEval> results(frontier.size());
        std::vector<Core> snapshot;
        snapshot.reserve(frontier.size());
        for (auto id : frontier) snapshot.push_back(cores_[id]);
        auto work = [&](std::size_t begin, std::size_t stride) {
            for (std::size_t i = begin; i < frontier.size(); i += stride) results[i] = evaluate(snapshot[i]);
        };
        if (jobs == 1 || frontier.size() < 2) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            unsigned n = std::min<std::size_t>(jobs, frontier.size());
            for (unsigned t = 0; t < n; ++t) pool.emplace_back(work, t, n);
            for (auto& t : pool) t.join();
        }
        std::vector<std::uint32_t> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            auto id = frontier[i];
            if (evals_.size() < cores_.size()) {
                evals_.resize(cores_.size());
                evaluated_.resize(cores_.size(), false);
            }
            evals_[id] = std::move(results[i]);
            evaluated_[id] = true;
            for (const auto& t : evals_[id].targets)
                for (InputId u = 0; u < n_inputs_; ++u)
                    for (auto s : t.all) {
                        if (cores_.size() >= opt_.budget && !find(t.last, u, s)) {
                            truncated_ = true;
                            continue;
                        }
                        bool fresh = false;
                        auto nid = intern(t.last, u, s, fresh);
                        if (fresh) next.push_back(nid);
                    }
        }
        frontier = std::move(next);
    }
    evals_.resize(cores_.size());
    evaluated_.resize(cores_.size(), false);
}

void Game::solve(ControllerResult& res) {
    std::size_t n = cores_.size();
    InputSet all(n_inputs_);
    for (InputId u = 0; u < n_inputs_; ++u) all[u] = u;
    win_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i)
        if (evaluated_[i] && !evals_[i].dead) win_[i] = all;
        else if (res.stats.first_removed.size() < 10)
            res.stats.first_removed.push_back(describe(static_cast<std::uint32_t>(i)) +
                                              (evaluated_[i] ? " (a successor burst has no spec match)" : " (not explored)"));
    bool changed = true;
    while (changed) {
        changed = false;
        ++res.stats.iterations;
        auto next = win_;
        for (std::size_t i = 0; i < n; ++i) {
            if (win_[i].empty()) continue;
            InputSet keep;
            for (InputId u : win_[i]) {
                bool good = true;
                for (const auto& t : evals_[i].targets) {
                    bool some = std::any_of(t.pred.begin(), t.pred.end(), [&](auto s) { return alive(t.last, u, s); });
                    if (!some || allowed(t.last, u, t.all).empty()) {
                        good = false;
                        break;
                    }
                }
                if (good) keep.push_back(u);
            }
            if (keep.size() != win_[i].size()) {
                changed = true;
                if (keep.empty() && res.stats.iterations == 1 && res.stats.first_removed.size() < 10)
                    res.stats.first_removed.push_back(describe(static_cast<std::uint32_t>(i)));
                next[i] = std::move(keep);
            }
        }
        win_ = std::move(next);
    }
    for (const auto& w : win_) res.stats.surviving += !w.empty();
    res.stats.candidates = n;
}

void Game::materialize(ControllerResult& res, const std::vector<SymbolicState>& roots) {
    FiniteSystem& c = res.controller;
    FiniteSystem& star = res.star_part;
    for (InputId u = 0; u < n_inputs_; ++u) {
        c.add_input(u);
        star.add_input(u);
    }
    std::deque<StateId> queue;
    auto visit = [&](const SymbolicState& s) {
        std::string k = state_key(s);
        if (auto id = c.find(k)) return *id;
        StateId id = c.add_state(k, abs_.output(s));
        res.states.push_back(s);
        queue.push_back(id);
        return id;
    };
    for (const auto& r : roots) c.set_initial(visit(r));
    while (!queue.empty()) {
        StateId x = queue.front();
        queue.pop_front();
        const SymbolicState s = res.states[x];
        InputSet uc = allowed(s.last(), s.held, burst_contexts(s));
        if (uc.empty()) throw EmptyController("controller state without admissible inputs during refinement of the fixpoint");
        for (InputId u : uc) {
            auto succ = abs_.successors(s, u);
            if (c.num_states() + succ.size() > opt_.state_budget)
                throw CapacityExceeded(fmt::format("controller exceeds {} states", opt_.state_budget));
            for (const auto& s2 : succ) c.add_transition(x, u, visit(s2));
        }
    }
    // Symbolic-model fragment: controller states with every input expanded.
    std::vector<StateId> star_id(c.num_states());
    for (StateId x = 0; x < c.num_states(); ++x) {
        star_id[x] = star.add_state(c.key(x), c.output(x));
        if (c.is_initial(x)) star.set_initial(star_id[x]);
    }
    for (StateId x = 0; x < c.num_states(); ++x)
        for (InputId u = 0; u < n_inputs_; ++u)
            for (const auto& s2 : abs_.successors(res.states[x], u)) {
                std::string k = state_key(s2);
                auto id = star.find(k);
                if (!id) {
                    id = star.add_state(k, abs_.output(s2));
                    star.set_expanded(*id, false);
                }
                star.add_transition(star_id[x], u, *id);
            }
    std::vector<StatePair> star_pairs;
    for (StateId x = 0; x < c.num_states(); ++x) star_pairs.emplace_back(x, star_id[x]);
    res.star_relation = PairRelation(std::move(star_pairs), 0.0, Flavor::StrongAltSim);

    // Lifted-spec fragment: matching lifted states whose core survives.
    FiniteSystem& sp = res.spec_part;
    sp.add_input(kSpecInput);
    std::vector<std::vector<std::uint32_t>> paths;
    std::vector<bool> bare;
    std::vector<StatePair> pairs;
    auto add_lifted = [&](const std::vector<std::uint32_t>& path, bool is_bare) {
        std::string k = lifted_key(path, is_bare);
        if (auto id = sp.find(k)) return *id;
        Burst b;
        for (auto i : path) b.push_back(q_.points[i]);
        StateId id = sp.add_state(k, std::move(b));
        if (is_bare) sp.set_initial(id);
        paths.push_back(path);
        bare.push_back(is_bare);
        return id;
    };
    const auto& bounds = abs_.config().bounds;
    for (StateId x = 0; x < c.num_states(); ++x) {
        const auto& s = res.states[x];
        std::size_t len = s.burst.size();
        if (len == 1)
            for (auto t : matches(s.burst[0]))
                if (is_initial_[t] && alive(s.last(), s.held, t)) pairs.emplace_back(x, add_lifted({t}, true));
        if (len < bounds.n_min) continue;
        std::vector<std::uint32_t> path;
        std::function<void(std::size_t)> dfs = [&](std::size_t i) {
            if (i == len) {
                if (alive(s.last(), s.held, path.back())) pairs.emplace_back(x, add_lifted(path, false));
                return;
            }
            for (auto t : matches(s.burst[i])) {
                if (i > 0 && !std::binary_search(succ_[path.back()].begin(), succ_[path.back()].end(), t)) continue;
                path.push_back(t);
                dfs(i + 1);
                path.pop_back();
            }
        };
        dfs(0);
    }
    for (StateId a = 0; a < sp.num_states(); ++a)
        for (StateId b = 0; b < sp.num_states(); ++b)
            if (!bare[b] && std::binary_search(succ_[paths[a].back()].begin(), succ_[paths[a].back()].end(), paths[b].front()))
                sp.add_transition(a, kSpecInput, b);
    res.spec_relation = PairRelation(std::move(pairs), mu_, Flavor::ApproxSim);
}

ControllerResult Game::run() {
    ControllerResult res;
    res.stats.engine = "lazy";
    const auto& lat = abs_.lattice();
    Lattice init(abs_.plant().init_box, lat.step());
    std::set<Coord> x0s;
    for (auto q0 : q_.initial) {
        Coord center = lat.quantize_coord(q_.points[q0]);
        lat.for_each_in_ball(center, mu_ + lat.max_step(), [&](const Coord& c) {
            Vec p = lat.point(c);
            if (inf_dist(p, q_.points[q0]) <= mu_ + kMetricTol && abs_.plant().init_box.contains(p)) x0s.insert(c);
        });
    }
    std::vector<SymbolicState> candidates;
    std::vector<std::uint32_t> seeds;
    for (const auto& c : x0s) {
        SymbolicState s = abs_.initial_symbolic(c);
        for (auto t : burst_contexts(s)) {
            bool fresh = false;
            auto id = intern(c, s.held, t, fresh);
            if (fresh) seeds.push_back(id);
        }
        candidates.push_back(std::move(s));
    }
    discover(seeds);
    solve(res);
    std::vector<SymbolicState> roots;
    for (const auto& s : candidates) {
        auto ctx = burst_contexts(s);
        bool init_ctx = std::any_of(ctx.begin(), ctx.end(), [&](auto t) { return is_initial_[t] && alive(s.last(), s.held, t); });
        if (init_ctx) ++res.stats.initial_candidates;
        if (init_ctx && !allowed(s.last(), s.held, ctx).empty()) roots.push_back(s);
    }
    if (roots.empty()) {
        std::string msg = fmt::format("no initial state survives the fixpoint ({} cores explored{})", cores_.size(),
                                      truncated_ ? ", budget exhausted" : "");
        for (const auto& s : res.stats.first_removed) msg += "; first removed: " + s;
        throw EmptyController(msg);
    }
    materialize(res, roots);
    return res;
}

}  // namespace

ControllerResult synthesize_lazy(const Abstraction& abs, const Specification& q, double mu_x, const GameOptions& opt) {
    Game g(abs, q, mu_x, opt);
    return g.run();
}

}  // namespace ncs
