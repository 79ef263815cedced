#include "ncs/abstraction.hpp"

#include <fmt/format.h>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "ncs/error.hpp"

namespace ncs {

const char* variant_name(Variant v) { return v == Variant::FC ? "fc" : "gas"; }

Variant parse_variant(const std::string& s) {
    if (s == "fc" || s == "FC" || s == "delta-fc") return Variant::FC;
    if (s == "gas" || s == "GAS" || s == "delta-gas") return Variant::GAS;
    throw ConfigError("unknown abstraction variant '" + s + "' (expected fc or gas)");
}

bool ParameterReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.ok; });
}

const ConditionCheck* ParameterReport::first_failure() const {
    for (const auto& c : checks)
        if (!c.ok) return &c;
    return nullptr;
}

static ConditionCheck leq(std::string name, std::string formula, double lhs, double rhs) {
    return {std::move(name), std::move(formula), lhs, rhs, lhs <= rhs + 1e-12};
}

static double region_diameter(const BoxUnion& region) {
    Box h = region.hull();
    double d = 0.0;
    for (std::size_t i = 0; i < h.dim(); ++i) d = std::max(d, h.hi[i] - h.lo[i]);
    return d;
}

ParameterReport check_abstraction(const AbstractionConfig& cfg, const LyapunovCertificate& cert, double tau) {
    ParameterReport r;
    const Lattice& l = cfg.lattice;
    r.checks.push_back(leq("quantizer_accuracy", "lattice worst-case error <= mu_x", l.accuracy(), cfg.mu_x));
    r.checks.push_back(leq("lattice_step", "max lattice step <= mu_hat_X", l.max_step(), l.mu_hat()));
    if (cfg.variant == Variant::FC) {
        r.checks.push_back(leq("fc_quantization", "mu_x <= min(mu_hat_X, epsilon)", cfg.mu_x,
                               std::min(l.mu_hat(), cfg.epsilon)));
    } else {
        ConditionCheck c{"gas_contraction", "lambda < 0", cert.lambda, 0.0, cert.lambda < 0.0};
        r.checks.push_back(c);
        double g = std::exp(cert.lambda * tau);
        double need = cfg.mu_x;
        if (g < 1.0)
            need += cert.alpha_lower.inverse((2.0 + g) / (1.0 - g) * cert.gamma(cfg.mu_x), region_diameter(l.region()));
        else
            need = INFINITY;
        r.checks.push_back(leq("gas_precision",
                               "mu_x + alpha_lower^-1((2+e^(lambda tau))/(1-e^(lambda tau)) gamma(mu_x)) <= epsilon",
                               need, cfg.epsilon));
        r.checks.push_back(leq("gas_quantization", "mu_x <= mu_hat_X", cfg.mu_x, l.mu_hat()));
    }
    return r;
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    s.append(b, 4);
}

}  // namespace

std::string state_key(const SymbolicState& s) {
    std::string k;
    k.reserve(8 + s.burst.size() * (s.burst.empty() ? 0 : s.burst[0].size()) * 4);
    k.push_back('S');
    k.push_back(s.initial_form ? 1 : 0);
    put_u32(k, s.held);
    k.push_back(static_cast<char>(s.burst.size()));
    for (const auto& c : s.burst)
        for (auto v : c) {
            if (v < INT32_MIN || v > INT32_MAX) throw CapacityExceeded("lattice coordinate exceeds 32 bits");
            put_u32(k, static_cast<std::uint32_t>(static_cast<std::int32_t>(v)));
        }
    return k;
}

std::string state_key(const ConcreteState& s) {
    std::string k;
    k.push_back('C');
    k.push_back(s.initial_form ? 1 : 0);
    put_u32(k, s.held);
    k.push_back(static_cast<char>(s.burst.size()));
    for (const auto& x : s.burst)
        for (double v : x) {
            char b[8];
            std::memcpy(b, &v, 8);
            k.append(b, 8);
        }
    return k;
}

std::optional<SymbolicState> decode_state_key(const std::string& key) {
    if (key.size() < 7 || key[0] != 'S') return std::nullopt;
    SymbolicState s;
    s.initial_form = key[1] != 0;
    std::memcpy(&s.held, key.data() + 2, 4);
    auto n = static_cast<unsigned char>(key[6]);
    std::size_t body = key.size() - 7;
    if (n == 0 || body % (4 * n)) return std::nullopt;
    std::size_t dim = body / (4 * n);
    const char* p = key.data() + 7;
    s.burst.assign(n, Coord(dim));
    for (auto& c : s.burst)
        for (auto& v : c) {
            std::int32_t x;
            std::memcpy(&x, p, 4);
            p += 4;
            v = x;
        }
    return s;
}

struct Abstraction::Cache {
    mutable std::shared_mutex mutex;
    std::unordered_map<std::string, std::optional<Coord>> images;
};

Abstraction::Abstraction(const PlantModel& plant, const LyapunovCertificate& cert, AbstractionConfig cfg)
    : plant_(plant), cert_(cert), cfg_(std::move(cfg)), cache_(std::make_shared<Cache>()) {
    if (cfg_.lattice.dim() != plant_.dim_x) throw InvalidArgument("lattice dimension differs from the plant");
    if (cfg_.bounds.n_min < 1 || cfg_.bounds.n_max < cfg_.bounds.n_min)
        throw InvalidArgument("delay bounds must satisfy 1 <= n_min <= n_max");
    if (cfg_.bounds.n_max > 255) throw CapacityExceeded("burst length above 255");
    growth_ = std::exp(cert_.lambda * plant_.tau);
    link_bound_ = (growth_ + 2.0) * cert_.gamma(cfg_.mu_x);
    radius_ = cert_.alpha_lower.inverse(link_bound_, region_diameter(cfg_.lattice.region()));
}

std::optional<Coord> Abstraction::quantized_image(const Coord& x, InputId u) const {
    std::string key;
    key.reserve(4 + x.size() * 8);
    put_u32(key, u);
    for (auto v : x) {
        char b[8];
        std::memcpy(b, &v, 8);
        key.append(b, 8);
    }
    {
        std::shared_lock lock(cache_->mutex);
        if (auto it = cache_->images.find(key); it != cache_->images.end()) return it->second;
    }
    Vec y = step_map(plant_, lattice().point(x), plant_.inputs.at(u));
    std::optional<Coord> img;
    if (lattice().region().contains(y))
        img = lattice().quantize_coord(y);
    else if (cfg_.variant == Variant::FC)
        img = boundary_image(y);
    std::unique_lock lock(cache_->mutex);
    cache_->images.emplace(std::move(key), img);
    return img;
}

// An image just outside X may still have concrete neighbours inside: project it onto the
// nearest box and keep it while that projection is within the link radius.
std::optional<Coord> Abstraction::boundary_image(const Vec& y) const {
    std::optional<Vec> best;
    double best_d = radius_ + kMetricTol;
    for (const Box& b : lattice().region().boxes()) {
        Vec c(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) c[i] = std::clamp(y[i], b.lo[i], b.hi[i]);
        double d = inf_dist(c, y);
        if (d <= best_d && (!best || d < inf_dist(*best, y))) best = std::move(c);
    }
    if (!best) return std::nullopt;
    return lattice().quantize_coord(*best);
}

std::size_t Abstraction::cached_images() const {
    std::shared_lock lock(cache_->mutex);
    return cache_->images.size();
}

bool Abstraction::admissible_link(const Coord& img, const Coord& next) const {
    if (cfg_.variant == Variant::GAS) return img == next;
    if (!lattice().contains_coord(next)) return false;
    return cert_.v(lattice().point(img), lattice().point(next)) <= link_bound_ + kMetricTol;
}

std::vector<Coord> Abstraction::link_candidates(const Coord& img) const {
    if (cfg_.variant == Variant::GAS) return {img};
    std::vector<Coord> out;
    Vec p = lattice().point(img);
    lattice().for_each_in_ball(img, radius_ + kMetricTol, [&](const Coord& c) {
        if (cert_.v(p, lattice().point(c)) <= link_bound_ + kMetricTol) out.push_back(c);
    });
    return out;
}

SymbolicState Abstraction::initial_symbolic(const Coord& x0) const {
    return SymbolicState{{x0}, static_cast<InputId>(plant_.u_ref), true};
}

std::vector<SymbolicState> Abstraction::initial_symbolic_states() const {
    std::vector<SymbolicState> out;
    Lattice init(plant_.init_box, lattice().step());
    for (const auto& c : init.enumerate_coords())
        if (lattice().contains_coord(c)) out.push_back(initial_symbolic(c));
    return out;
}

ConcreteState Abstraction::initial_concrete(const Vec& x0) const {
    return ConcreteState{{x0}, static_cast<InputId>(plant_.u_ref), true};
}

void Abstraction::expand_fc(const SymbolicState& s, InputId u, std::uint32_t n_lo, std::uint32_t n_hi,
                            std::vector<SymbolicState>& out) const {
    auto first = quantized_image(s.last(), s.held);
    if (!first) return;
    std::vector<std::vector<SymbolicState>> by_len(n_hi + 1);
    std::vector<Coord> prefix;
    std::function<void(const Coord&)> dfs = [&](const Coord& img) {
        for (auto& c : link_candidates(img)) {
            prefix.push_back(c);
            auto depth = static_cast<std::uint32_t>(prefix.size());
            if (depth >= n_lo) by_len[depth].push_back(SymbolicState{prefix, u, false});
            if (depth < n_hi)
                if (auto next = quantized_image(c, s.held)) dfs(*next);
            prefix.pop_back();
        }
    };
    dfs(*first);
    for (auto& v : by_len)
        for (auto& st : v) out.push_back(std::move(st));
}

void Abstraction::expand_gas(const SymbolicState& s, InputId u, std::uint32_t n_lo, std::uint32_t n_hi,
                             std::vector<SymbolicState>& out) const {
    std::vector<Coord> chain;
    auto img = quantized_image(s.last(), s.held);
    while (img && chain.size() < n_hi) {
        chain.push_back(*img);
        if (chain.size() >= n_lo) out.push_back(SymbolicState{chain, u, false});
        if (chain.size() < n_hi) img = quantized_image(chain.back(), s.held);
    }
}

std::vector<SymbolicState> Abstraction::successors(const SymbolicState& s, InputId u) const {
    return successors(s, u, 0);
}

std::vector<SymbolicState> Abstraction::successors(const SymbolicState& s, InputId u, std::uint32_t n) const {
    if (u >= plant_.inputs.size()) throw InvalidArgument("input id out of range");
    std::uint32_t lo = cfg_.bounds.n_min, hi = cfg_.bounds.n_max;
    if (n != 0) {
        if (n < lo || n > hi) return {};
        lo = hi = n;
    }
    std::vector<SymbolicState> out;
    if (cfg_.variant == Variant::FC)
        expand_fc(s, u, lo, hi, out);
    else
        expand_gas(s, u, lo, hi, out);
    return out;
}

bool Abstraction::is_transition(const SymbolicState& from, InputId u, const SymbolicState& to) const {
    if (to.initial_form || to.held != u) return false;
    auto n = static_cast<std::uint32_t>(to.burst.size());
    if (n < cfg_.bounds.n_min || n > cfg_.bounds.n_max) return false;
    auto img = quantized_image(from.last(), from.held);
    for (std::size_t i = 0; i < to.burst.size(); ++i) {
        if (!img || !admissible_link(*img, to.burst[i])) return false;
        if (i + 1 < to.burst.size()) img = quantized_image(to.burst[i], from.held);
    }
    return true;
}

std::optional<ConcreteState> Abstraction::concrete_successor(const ConcreteState& s, InputId u,
                                                            std::uint32_t n) const {
    if (n < cfg_.bounds.n_min || n > cfg_.bounds.n_max) throw InvalidArgument("burst length outside [n_min; n_max]");
    ConcreteState next{{}, u, false};
    next.burst.reserve(n);
    Vec x = s.last();
    const Vec& held = plant_.inputs.at(s.held);
    for (std::uint32_t i = 0; i < n; ++i) {
        x = step_map(plant_, x, held);
        if (!plant_.in_state_space(x)) return std::nullopt;
        next.burst.push_back(x);
    }
    return next;
}

SymbolicState Abstraction::quantize_state(const ConcreteState& s) const {
    SymbolicState q{{}, s.held, s.initial_form};
    for (const auto& x : s.burst) q.burst.push_back(lattice().quantize_coord(x));
    return q;
}

Burst Abstraction::output(const SymbolicState& s) const {
    Burst b;
    b.reserve(s.burst.size());
    for (const auto& c : s.burst) b.push_back(lattice().point(c));
    return b;
}

namespace {

template <class P, class Succ, class Out>
BuiltSystem<P> build(const std::vector<AggregateState<P>>& seeds, std::size_t n_inputs, const BuildOptions& opt,
                     Succ succ, Out output) {
    if (seeds.empty()) throw InvalidArgument("reachability needs at least one seed");
    BuiltSystem<P> r;
    FiniteSystem& sys = r.system;
    for (InputId u = 0; u < n_inputs; ++u) sys.add_input(u);
    auto intern = [&](const AggregateState<P>& s) -> std::optional<StateId> {
        std::string k = state_key(s);
        if (auto id = sys.find(k)) return id;
        if (sys.num_states() >= opt.budget) return std::nullopt;
        StateId id = sys.add_state(k, output(s));
        r.states.push_back(s);
        return id;
    };
    std::vector<StateId> frontier;
    for (const auto& s : seeds) {
        auto id = intern(s);
        if (!id) {
            sys.set_truncated(true);
            if (opt.require_complete) throw CapacityExceeded("state budget exhausted by the seeds");
            break;
        }
        sys.set_initial(*id);
        frontier.push_back(*id);
    }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());

    unsigned jobs = std::max(1u, opt.jobs);
    std::uint32_t depth = 0;
    bool budget_hit = false;
    while (!frontier.empty()) {
        if (depth >= opt.max_depth) {
            for (StateId s : frontier) sys.set_expanded(s, false);
            sys.set_truncated(true);
            break;
        }
        std::vector<std::vector<std::vector<AggregateState<P>>>> results(frontier.size());
        auto work = [&](std::size_t begin, std::size_t step) {
            for (std::size_t i = begin; i < frontier.size(); i += step) {
                results[i].resize(n_inputs);
                const auto state = r.states[frontier[i]];
                for (InputId u = 0; u < n_inputs; ++u) results[i][u] = succ(state, u);
            }
        };
        if (jobs == 1 || frontier.size() < 2) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            unsigned n = std::min<std::size_t>(jobs, frontier.size());
            for (unsigned t = 0; t < n; ++t) pool.emplace_back(work, t, n);
            for (auto& t : pool) t.join();
        }
        std::vector<StateId> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            StateId src = frontier[i];
            for (InputId u = 0; u < n_inputs; ++u)
                for (const auto& s : results[i][u]) {
                    std::size_t before = sys.num_states();
                    auto id = intern(s);
                    if (!id) {
                        budget_hit = true;
                        sys.set_expanded(src, false);
                        continue;
                    }
                    if (sys.num_states() > before) next.push_back(*id);
                    sys.add_transition(src, u, *id);
                }
        }
        if (budget_hit) {
            sys.set_truncated(true);
            if (opt.require_complete)
                throw CapacityExceeded(fmt::format("state budget of {} exhausted at depth {}", opt.budget, depth + 1));
        }
        frontier = std::move(next);
        ++depth;
    }
    r.depth_reached = depth;
    return r;
}

}  // namespace

BuiltSystem<Coord> build_symbolic(const Abstraction& abs, const std::vector<SymbolicState>& seeds,
                                  const BuildOptions& opt) {
    return build<Coord>(
        seeds, abs.plant().inputs.size(), opt, [&](const SymbolicState& s, InputId u) { return abs.successors(s, u); },
        [&](const SymbolicState& s) { return abs.output(s); });
}

BuiltSystem<Vec> build_concrete(const Abstraction& abs, const std::vector<ConcreteState>& seeds,
                                const BuildOptions& opt) {
    const auto& b = abs.config().bounds;
    return build<Vec>(
        seeds, abs.plant().inputs.size(), opt,
        [&](const ConcreteState& s, InputId u) {
            std::vector<ConcreteState> out;
            for (std::uint32_t n = b.n_min; n <= b.n_max; ++n)
                if (auto next = abs.concrete_successor(s, u, n)) out.push_back(std::move(*next));
            return out;
        },
        [](const ConcreteState& s) { return s.burst; });
}

SystemStats system_stats(const FiniteSystem& s) {
    SystemStats st;
    st.states = s.num_states();
    st.transitions = s.num_transitions();
    st.initial = s.initial_states().size();
    for (StateId x = 0; x < s.num_states(); ++x) {
        if (!s.is_expanded(x)) ++st.unexpanded;
        const auto& e = s.edges(x);
        for (std::size_t i = 0; i < e.size();) {
            std::size_t j = i;
            while (j < e.size() && e[j].input == e[i].input) ++j;
            ++st.branching[j - i];
            i = j;
        }
    }
    return st;
}

}  // namespace ncs
