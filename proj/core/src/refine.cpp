#include "ncs/refine.hpp"

#include <fmt/format.h>
#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "ncs/error.hpp"

namespace ncs {

std::string Selection::describe() const {
    switch (kind) {
        case Kind::FirstCanonical: return "first";
        case Kind::Random: return "random:" + std::to_string(seed);
        case Kind::Priority: return fmt::format("priority:{}", fmt::join(priority, ","));
    }
    return "?";
}

Selection Selection::parse(const std::string& text) {
    Selection s;
    auto colon = text.find(':');
    std::string head = text.substr(0, colon);
    std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (head == "first" || head == "first-canonical") return s;
        if (head == "random") {
            s.kind = Kind::Random;
            s.seed = tail.empty() ? 0 : std::stoull(tail);
            return s;
        }
        if (head == "priority") {
            s.kind = Kind::Priority;
            std::stringstream ss(tail);
            std::string item;
            while (std::getline(ss, item, ',')) s.priority.push_back(static_cast<InputId>(std::stoul(item)));
            return s;
        }
    } catch (const std::logic_error&) {
        throw ConfigError("malformed selection policy '" + text + "'");
    }
    throw ConfigError("unknown selection policy '" + text + "'");
}

MealyController MealyController::refine(const FiniteSystem& sc, const Lattice& lattice, const std::vector<Vec>& inputs,
                                        const DelayBounds& bounds, double mu_x, const Selection& sel) {
    MealyController c;
    c.lattice_ = lattice;
    c.inputs_ = inputs;
    c.bounds_ = bounds;
    c.mu_x_ = mu_x;
    c.selection_ = sel.describe();
    std::mt19937_64 rng(sel.seed);
    for (StateId x = 0; x < sc.num_states(); ++x) {
        auto s = decode_state_key(sc.key(x));
        if (!s) throw FormatError("controller state key does not encode a lattice state");
        auto enabled = sc.enabled_inputs(x);
        if (enabled.empty()) throw BlockingController(fmt::format("controller state {} has no admissible input", x));
        InputId pick = enabled.front();
        if (sel.kind == Selection::Kind::Random) {
            pick = enabled[rng() % enabled.size()];
        } else if (sel.kind == Selection::Kind::Priority) {
            for (InputId u : sel.priority)
                if (std::binary_search(enabled.begin(), enabled.end(), u)) {
                    pick = u;
                    break;
                }
        }
        Node n{std::move(s->burst), s->held, sc.is_initial(x), pick, sc.post(x, pick)};
        if (n.next.empty()) throw BlockingController(fmt::format("controller state {} blocks under input {}", x, pick));
        c.nodes_.push_back(std::move(n));
    }
    return c;
}

MealyController::Step MealyController::step(StateId xi, const Coord& w) const {
    const Node& n = node(xi);
    if (n.burst.back() != w)
        throw OutsideDomain(fmt::format("measurement ({}) does not match the last element ({}) of controller state {}",
                                        fmt::join(w, ","), fmt::join(n.burst.back(), ","), xi));
    return {n.select, &n.next};
}

std::optional<StateId> MealyController::initial_state(const Coord& w) const {
    for (StateId x = 0; x < nodes_.size(); ++x)
        if (nodes_[x].initial && nodes_[x].burst.size() == 1 && nodes_[x].burst[0] == w) return x;
    return std::nullopt;
}

std::optional<StateId> MealyController::resolve(const std::vector<StateId>& next, std::uint32_t n,
                                                const Coord& w_next) const {
    std::optional<StateId> best;
    for (StateId x : next) {
        const Node& nd = nodes_[x];
        if (nd.burst.size() == n && nd.burst.back() == w_next && (!best || x < *best)) best = x;
    }
    return best;
}

bool MealyController::operator==(const MealyController& o) const {
    return lattice_.step() == o.lattice_.step() && inputs_ == o.inputs_ && bounds_.n_min == o.bounds_.n_min &&
           bounds_.n_max == o.bounds_.n_max && mu_x_ == o.mu_x_ && selection_ == o.selection_ && nodes_ == o.nodes_;
}

void MealyController::write(std::ostream& os) const {
    os << "# ncs-controller v1\n";
    std::size_t dim = lattice_.dim();
    os << fmt::format("dim {} inputs {} n_min {} n_max {} mu_x {} selection {}\n", dim, inputs_.size(), bounds_.n_min,
                      bounds_.n_max, mu_x_, selection_);
    os << fmt::format("step {}\n", fmt::join(lattice_.step(), " "));
    os << "boxes " << lattice_.region().size() << "\n";
    for (const auto& b : lattice_.region().boxes())
        os << fmt::format("box {} {}\n", fmt::join(b.lo, " "), fmt::join(b.hi, " "));
    for (std::size_t u = 0; u < inputs_.size(); ++u) os << fmt::format("input {} {}\n", u, fmt::join(inputs_[u], " "));
    os << "states " << nodes_.size() << "\n";
    for (StateId x = 0; x < nodes_.size(); ++x) {
        const Node& n = nodes_[x];
        os << fmt::format("state {} {} {} {} {}", x, n.initial ? 1 : 0, n.held, n.select, n.burst.size());
        for (const auto& c : n.burst) os << ' ' << fmt::format("{}", fmt::join(c, " "));
        os << " next " << n.next.size();
        for (StateId y : n.next) os << ' ' << y;
        os << "\n";
    }
}

MealyController MealyController::read(std::istream& is) {
    std::string line, w;
    if (!std::getline(is, line) || line != "# ncs-controller v1") throw FormatError("missing controller header");
    MealyController c;
    std::size_t dim, n_inputs, n_boxes, n_states;
    {
        std::getline(is, line);
        std::istringstream ls(line);
        std::string a, b, d, e, f, g;
        if (!(ls >> a >> dim >> b >> n_inputs >> d >> c.bounds_.n_min >> e >> c.bounds_.n_max >> f >> c.mu_x_ >> g >>
              c.selection_) ||
            a != "dim")
            throw FormatError("bad controller parameter line");
    }
    Vec step(dim);
    if (!(is >> w) || w != "step") throw FormatError("missing step line");
    for (double& s : step) is >> s;
    if (!(is >> w >> n_boxes) || w != "boxes") throw FormatError("missing boxes line");
    std::vector<Box> boxes;
    for (std::size_t i = 0; i < n_boxes; ++i) {
        Box b{Vec(dim), Vec(dim)};
        if (!(is >> w) || w != "box") throw FormatError("bad box line");
        for (double& v : b.lo) is >> v;
        for (double& v : b.hi) is >> v;
        boxes.push_back(std::move(b));
    }
    c.lattice_ = Lattice(BoxUnion(std::move(boxes)), step);
    for (std::size_t u = 0; u < n_inputs; ++u) {
        std::size_t id;
        if (!(is >> w >> id) || w != "input" || id != u) throw FormatError("bad input line");
        std::getline(is, line);
        std::istringstream ls(line);
        Vec v;
        double x;
        while (ls >> x) v.push_back(x);
        c.inputs_.push_back(std::move(v));
    }
    if (!(is >> w >> n_states) || w != "states") throw FormatError("missing states line");
    for (std::size_t i = 0; i < n_states; ++i) {
        Node n;
        StateId id;
        int init;
        std::size_t len, k;
        if (!(is >> w >> id >> init >> n.held >> n.select >> len) || w != "state" || id != i)
            throw FormatError("bad state line " + std::to_string(i));
        n.initial = init != 0;
        n.burst.assign(len, Coord(dim));
        for (auto& co : n.burst)
            for (auto& v : co) is >> v;
        if (!(is >> w >> k) || w != "next") throw FormatError("bad successor list");
        n.next.resize(k);
        for (auto& y : n.next) is >> y;
        if (!is) throw FormatError("truncated controller");
        c.nodes_.push_back(std::move(n));
    }
    return c;
}

}  // namespace ncs
