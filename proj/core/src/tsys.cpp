#include "ncs/tsys.hpp"

#include <fmt/format.h>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "ncs/error.hpp"

namespace ncs {

BurstDistance burst_distance(const Burst& a, const Burst& b) {
    if (a.size() != b.size()) return kIncomparable;
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return kIncomparable;
        d = std::max(d, inf_dist(a[i], b[i]));
    }
    return d;
}

StateId FiniteSystem::add_state(const std::string& key, Burst output) {
    if (auto it = index_.find(key); it != index_.end()) {
        if (outputs_[it->second] != output) throw OutputClash("state re-added with a different output");
        return it->second;
    }
    auto id = static_cast<StateId>(keys_.size());
    keys_.push_back(key);
    index_.emplace(key, id);
    outputs_.push_back(std::move(output));
    initial_flag_.push_back(false);
    expanded_.push_back(true);
    out_.emplace_back();
    reverse_valid_ = false;
    return id;
}

std::optional<StateId> FiniteSystem::find(const std::string& key) const {
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    return std::nullopt;
}

void FiniteSystem::set_initial(StateId s) {
    if (initial_flag_.at(s)) return;
    initial_flag_[s] = true;
    initial_.insert(std::lower_bound(initial_.begin(), initial_.end(), s), s);
}

void FiniteSystem::add_input(InputId u) {
    auto it = std::lower_bound(inputs_.begin(), inputs_.end(), u);
    if (it == inputs_.end() || *it != u) inputs_.insert(it, u);
}

bool FiniteSystem::has_input(InputId u) const { return std::binary_search(inputs_.begin(), inputs_.end(), u); }

void FiniteSystem::add_transition(StateId src, InputId u, StateId dst) {
    if (src >= num_states() || dst >= num_states()) throw InvalidArgument("transition endpoint is not a state");
    add_input(u);
    auto& adj = out_[src];
    Edge e{u, dst};
    auto it = std::lower_bound(adj.begin(), adj.end(), e);
    if (it != adj.end() && *it == e) return;
    adj.insert(it, e);
    ++num_transitions_;
    reverse_valid_ = false;
}

std::vector<StateId> FiniteSystem::post(StateId s, InputId u) const {
    std::vector<StateId> r;
    const auto& adj = out_.at(s);
    auto it = std::lower_bound(adj.begin(), adj.end(), Edge{u, 0});
    for (; it != adj.end() && it->input == u; ++it) r.push_back(it->dst);
    return r;
}

std::vector<InputId> FiniteSystem::enabled_inputs(StateId s) const {
    std::vector<InputId> r;
    for (const auto& e : out_.at(s))
        if (r.empty() || r.back() != e.input) r.push_back(e.input);
    return r;
}

bool FiniteSystem::has_transition(StateId src, InputId u, StateId dst) const {
    const auto& adj = out_.at(src);
    return std::binary_search(adj.begin(), adj.end(), Edge{u, dst});
}

const std::vector<std::vector<Edge>>& FiniteSystem::reverse() const {
    if (!reverse_valid_) {
        reverse_.assign(num_states(), {});
        for (StateId s = 0; s < num_states(); ++s)
            for (const auto& e : out_[s]) reverse_[e.dst].push_back({e.input, s});
        for (auto& r : reverse_) std::sort(r.begin(), r.end());
        reverse_valid_ = true;
    }
    return reverse_;
}

bool is_subsystem(const FiniteSystem& s1, const FiniteSystem& s2) {
    std::vector<StateId> map(s1.num_states());
    for (StateId s = 0; s < s1.num_states(); ++s) {
        auto t = s2.find(s1.key(s));
        if (!t || s2.output(*t) != s1.output(s)) return false;
        if (s1.is_initial(s) && !s2.is_initial(*t)) return false;
        map[s] = *t;
    }
    for (InputId u : s1.inputs())
        if (!s2.has_input(u)) return false;
    for (StateId s = 0; s < s1.num_states(); ++s)
        for (const auto& e : s1.edges(s))
            if (!s2.has_transition(map[s], e.input, map[e.dst])) return false;
    return true;
}

FiniteSystem system_union(const FiniteSystem& s1, const FiniteSystem& s2) {
    FiniteSystem r;
    for (const FiniteSystem* s : {&s1, &s2}) {
        std::vector<StateId> map(s->num_states());
        for (StateId x = 0; x < s->num_states(); ++x) {
            map[x] = r.add_state(s->key(x), s->output(x));
            if (s->is_initial(x)) r.set_initial(map[x]);
        }
        for (InputId u : s->inputs()) r.add_input(u);
        for (StateId x = 0; x < s->num_states(); ++x)
            for (const auto& e : s->edges(x)) r.add_transition(map[x], e.input, map[e.dst]);
    }
    return r;
}

bool is_nonblocking(const FiniteSystem& s) {
    for (StateId x = 0; x < s.num_states(); ++x)
        if (s.edges(x).empty()) return false;
    return true;
}

bool same_system(const FiniteSystem& a, const FiniteSystem& b) {
    return a.num_states() == b.num_states() && a.num_transitions() == b.num_transitions() &&
           is_subsystem(a, b) && is_subsystem(b, a);
}

std::string hex_encode(const std::string& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 15]);
    }
    return out;
}

std::string hex_decode(const std::string& hex) {
    if (hex.size() % 2) throw FormatError("odd-length hex string");
    auto val = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw FormatError("bad hex digit");
    };
    std::string out;
    for (std::size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<char>(val(hex[i]) * 16 + val(hex[i + 1])));
    return out;
}

void write_system(std::ostream& os, const FiniteSystem& s) {
    os << "# ncs-system v1\n";
    os << "states " << s.num_states() << " transitions " << s.num_transitions() << " truncated "
       << (s.truncated() ? 1 : 0) << "\n";
    os << "inputs";
    for (InputId u : s.inputs()) os << ' ' << u;
    os << "\n";
    for (StateId x = 0; x < s.num_states(); ++x) {
        const Burst& b = s.output(x);
        std::size_t dim = b.empty() ? 0 : b.front().size();
        os << "state " << x << ' ' << (s.is_initial(x) ? 1 : 0) << ' ' << (s.is_expanded(x) ? 1 : 0) << ' '
           << (s.key(x).empty() ? "-" : hex_encode(s.key(x))) << ' ' << b.size() << ' ' << dim;
        for (const auto& v : b)
            for (double c : v) os << ' ' << fmt::format("{}", c);
        os << "\n";
    }
    for (StateId x = 0; x < s.num_states(); ++x)
        for (const auto& e : s.edges(x)) os << x << ' ' << e.input << ' ' << e.dst << "\n";
}

FiniteSystem read_system(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "# ncs-system v1") throw FormatError("missing system header");
    FiniteSystem s;
    std::size_t n = 0, m = 0;
    int truncated = 0;
    {
        std::getline(is, line);
        std::istringstream ls(line);
        std::string w1, w2, w3;
        if (!(ls >> w1 >> n >> w2 >> m >> w3 >> truncated) || w1 != "states") throw FormatError("bad counts line");
    }
    {
        std::getline(is, line);
        std::istringstream ls(line);
        std::string w;
        ls >> w;
        if (w != "inputs") throw FormatError("bad inputs line");
        InputId u;
        while (ls >> u) s.add_input(u);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw FormatError("truncated state table");
        std::istringstream ls(line);
        std::string w, key;
        StateId id;
        int init, expanded;
        std::size_t len, dim;
        if (!(ls >> w >> id >> init >> expanded >> key >> len >> dim) || w != "state" || id != i)
            throw FormatError("bad state line " + std::to_string(i));
        Burst b(len, Vec(dim));
        for (auto& v : b)
            for (double& c : v)
                if (!(ls >> c)) throw FormatError("bad state output");
        StateId got = s.add_state(key == "-" ? std::string() : hex_decode(key), std::move(b));
        if (got != id) throw FormatError("duplicate state key");
        if (init) s.set_initial(id);
        s.set_expanded(id, expanded != 0);
    }
    for (std::size_t i = 0; i < m; ++i) {
        StateId a, b;
        InputId u;
        if (!(is >> a >> u >> b)) throw FormatError("truncated transition list");
        s.add_transition(a, u, b);
    }
    s.set_truncated(truncated != 0);
    return s;
}

}  // namespace ncs
