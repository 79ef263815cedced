#include "ncs/synthesis.hpp"

#include <fmt/format.h>
#include <algorithm>
#include <cstring>
#include <deque>
#include <functional>
#include <set>

#include "ncs/error.hpp"

namespace ncs {

void Specification::validate() const {
    if (points.empty()) throw InvalidArgument("specification has no states");
    if (initial.empty()) throw InvalidArgument("specification has no initial states");
    std::size_t dim = points.front().size();
    for (const auto& p : points)
        if (p.size() != dim) throw InvalidArgument("specification states differ in dimension");
    for (auto [a, b] : transitions)
        if (a >= points.size() || b >= points.size()) throw InvalidArgument("specification transition endpoint out of range");
    for (auto q : initial)
        if (q >= points.size()) throw InvalidArgument("specification initial state out of range");
    if (!names.empty() && names.size() != points.size()) throw InvalidArgument("specification names do not match states");
}

std::vector<std::vector<std::uint32_t>> Specification::successors() const {
    std::vector<std::vector<std::uint32_t>> s(points.size());
    for (auto [a, b] : transitions) s[a].push_back(b);
    for (auto& v : s) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return s;
}

bool Specification::has_transition(std::uint32_t a, std::uint32_t b) const {
    return std::find(transitions.begin(), transitions.end(), std::pair{a, b}) != transitions.end();
}

std::string lifted_key(const std::vector<std::uint32_t>& path, bool bare) {
    std::string k(1, bare ? 'B' : 'P');
    for (auto v : path) {
        char b[4];
        std::memcpy(b, &v, 4);
        k.append(b, 4);
    }
    return k;
}

LiftedSpec lift_spec(const Specification& q, std::uint32_t n_min, std::uint32_t n_max, std::uint64_t budget) {
    q.validate();
    if (n_min < 1 || n_max < n_min) throw InvalidArgument("require 1 <= n_min <= n_max");
    LiftedSpec ls;
    auto succ = q.successors();
    auto output = [&](const std::vector<std::uint32_t>& path) {
        Burst b;
        for (auto i : path) b.push_back(q.points[i]);
        return b;
    };
    auto add = [&](std::vector<std::uint32_t> path, bool bare) {
        if (ls.system.num_states() >= budget) throw CapacityExceeded(fmt::format("lifted specification exceeds {} states", budget));
        StateId id = ls.system.add_state(lifted_key(path, bare), output(path));
        if (id == ls.paths.size()) {
            ls.paths.push_back(std::move(path));
            ls.bare.push_back(bare);
        }
        return id;
    };
    std::vector<std::uint32_t> init = q.initial;
    std::sort(init.begin(), init.end());
    init.erase(std::unique(init.begin(), init.end()), init.end());
    for (auto q0 : init) ls.system.set_initial(add({q0}, true));

    std::vector<std::vector<std::vector<std::uint32_t>>> by_len(n_max + 1);
    std::uint64_t count = 0;
    std::vector<std::uint32_t> path;
    std::function<void()> dfs = [&]() {
        if (path.size() >= n_min) {
            if (++count > budget) throw CapacityExceeded(fmt::format("lifted specification exceeds {} paths", budget));
            by_len[path.size()].push_back(path);
        }
        if (path.size() == n_max) return;
        for (auto nxt : succ[path.back()]) {
            path.push_back(nxt);
            dfs();
            path.pop_back();
        }
    };
    for (std::uint32_t s = 0; s < q.size(); ++s) {
        path = {s};
        dfs();
    }
    std::vector<std::vector<StateId>> by_first(q.size());
    for (auto& level : by_len)
        for (auto& p : level) {
            std::uint32_t first = p.front();
            by_first[first].push_back(add(std::move(p), false));
        }
    ls.system.add_input(kSpecInput);
    for (StateId x = 0; x < ls.system.num_states(); ++x)
        for (auto nxt : succ[ls.paths[x].back()])
            for (StateId y : by_first[nxt]) ls.system.add_transition(x, kSpecInput, y);
    return ls;
}

ParameterReport check_parameters(double mu_x, double theta, double eps, double mu_hat, Variant variant,
                                 const LyapunovCertificate& cert, double tau) {
    ParameterReport r;
    auto leq = [&](std::string name, std::string formula, double lhs, double rhs) {
        r.checks.push_back({std::move(name), std::move(formula), lhs, rhs, lhs <= rhs + 1e-12});
    };
    leq("composition_budget", "mu_x + theta <= epsilon", mu_x + theta, eps);
    leq("controller_quantization", "mu_x <= min(mu_hat_X, theta)", mu_x, std::min(mu_hat, theta));
    if (variant == Variant::GAS) {
        r.checks.push_back({"gas_contraction", "lambda < 0", cert.lambda, 0.0, cert.lambda < 0.0});
        double g = std::exp(cert.lambda * tau);
        double need = g < 1.0 ? mu_x + cert.alpha_lower.inverse((2.0 + g) / (1.0 - g) * cert.gamma(mu_x)) : INFINITY;
        leq("gas_precision", "mu_x + alpha_lower^-1((2+e^(lambda tau))/(1-e^(lambda tau)) gamma(mu_x)) <= theta", need,
            theta);
    }
    return r;
}

namespace {

using InputSet = std::vector<InputId>;

InputSet intersect(const InputSet& a, const InputSet& b) {
    InputSet r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

}  // namespace

ControllerResult synthesize_explicit(const FiniteSystem& s_star, const LiftedSpec& sq, double mu_x) {
    const FiniteSystem& spec = sq.system;
    ControllerResult res;
    res.stats.engine = "explicit";
    std::size_t n = s_star.num_states();
    // ctx[x]: spec states within mu_x of x, sorted; win[x][k] matches ctx[x][k].
    std::vector<std::vector<StateId>> ctx(n);
    std::vector<std::vector<InputSet>> win(n);
    for (StateId x = 0; x < n; ++x) {
        for (StateId q = 0; q < spec.num_states(); ++q)
            if (within(burst_distance(s_star.output(x), spec.output(q)), mu_x)) ctx[x].push_back(q);
        InputSet all = s_star.is_expanded(x) ? s_star.enabled_inputs(x) : InputSet{};
        win[x].assign(ctx[x].size(), all);
        res.stats.candidates += ctx[x].size();
    }
    auto alive = [&](StateId x, StateId q) {
        auto it = std::lower_bound(ctx[x].begin(), ctx[x].end(), q);
        return it != ctx[x].end() && *it == q && !win[x][it - ctx[x].begin()].empty();
    };
    auto allowed = [&](StateId x) {
        std::optional<InputSet> acc;
        for (std::size_t k = 0; k < ctx[x].size(); ++k)
            if (!win[x][k].empty()) acc = acc ? intersect(*acc, win[x][k]) : win[x][k];
        return acc.value_or(InputSet{});
    };
    bool changed = true;
    while (changed) {
        changed = false;
        ++res.stats.iterations;
        std::vector<InputSet> uc(n);
        for (StateId x = 0; x < n; ++x) uc[x] = allowed(x);
        auto next = win;
        for (StateId x = 0; x < n; ++x)
            for (std::size_t k = 0; k < ctx[x].size(); ++k) {
                if (win[x][k].empty()) continue;
                StateId q = ctx[x][k];
                auto qpost = spec.post(q, kSpecInput);
                InputSet keep;
                for (InputId u : win[x][k]) {
                    auto post = s_star.post(x, u);
                    bool good = !post.empty();
                    for (StateId x2 : post) {
                        if (!good) break;
                        good = !uc[x2].empty() &&
                               std::any_of(qpost.begin(), qpost.end(), [&](StateId q2) { return alive(x2, q2); });
                    }
                    if (good) keep.push_back(u);
                }
                if (keep.size() != win[x][k].size()) {
                    changed = true;
                    if (keep.empty() && res.stats.iterations == 1 && res.stats.first_removed.size() < 10)
                        res.stats.first_removed.push_back(fmt::format("symbolic state {} against spec state {}", x, q));
                    next[x][k] = std::move(keep);
                }
            }
        win = std::move(next);
    }
    for (StateId x = 0; x < n; ++x)
        for (auto& w : win[x]) res.stats.surviving += !w.empty();

    std::vector<StateId> roots;
    for (StateId x : s_star.initial_states()) {
        bool init_ctx = std::any_of(ctx[x].begin(), ctx[x].end(), [&](StateId q) { return spec.is_initial(q) && alive(x, q); });
        if (init_ctx) ++res.stats.initial_candidates;
        if (init_ctx && !allowed(x).empty()) roots.push_back(x);
    }
    if (roots.empty()) {
        std::string msg = "no initial state of the symbolic model survives the fixpoint";
        for (const auto& s : res.stats.first_removed) msg += "; first removed: " + s;
        throw EmptyController(msg);
    }
    std::vector<StateId> cid(n, UINT32_MAX);
    std::vector<StateId> order;
    std::deque<StateId> queue;
    auto visit = [&](StateId x) {
        if (cid[x] != UINT32_MAX) return cid[x];
        cid[x] = res.controller.add_state(s_star.key(x), s_star.output(x));
        order.push_back(x);
        queue.push_back(x);
        return cid[x];
    };
    for (StateId x : roots) res.controller.set_initial(visit(x));
    for (InputId u : s_star.inputs()) res.controller.add_input(u);
    while (!queue.empty()) {
        StateId x = queue.front();
        queue.pop_front();
        for (InputId u : allowed(x))
            for (StateId x2 : s_star.post(x, u)) res.controller.add_transition(cid[x], u, visit(x2));
    }
    std::vector<StatePair> spec_pairs, star_pairs;
    for (StateId x : order) {
        for (std::size_t k = 0; k < ctx[x].size(); ++k)
            if (!win[x][k].empty()) spec_pairs.emplace_back(cid[x], ctx[x][k]);
        star_pairs.emplace_back(cid[x], x);
        auto decoded = decode_state_key(s_star.key(x));
        res.states.push_back(decoded.value_or(SymbolicState{}));
    }
    res.spec_part = spec;
    res.spec_relation = PairRelation(std::move(spec_pairs), mu_x, Flavor::ApproxSim);
    res.star_part = s_star;
    res.star_relation = PairRelation(std::move(star_pairs), 0.0, Flavor::StrongAltSim);
    return res;
}

WitnessCheck verify_witnesses(const ControllerResult& r) {
    WitnessCheck w;
    w.subsystem = is_subsystem(r.controller, r.star_part);
    w.nonblocking = is_nonblocking(r.controller);
    CheckOptions opt;
    opt.skip_unexpanded = false;
    w.spec = check_relation(r.controller, r.spec_part, r.spec_relation, Flavor::ApproxSim, opt);
    w.star = check_relation(r.controller, r.star_part, r.star_relation, Flavor::StrongAltSim, opt);
    return w;
}

}  // namespace ncs
