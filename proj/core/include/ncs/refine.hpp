#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncs/abstraction.hpp"
#include "ncs/tsys.hpp"

namespace ncs {

struct Selection {
    enum class Kind { FirstCanonical, Random, Priority };
    Kind kind = Kind::FirstCanonical;
    std::uint64_t seed = 0;
    std::vector<InputId> priority;

    std::string describe() const;
    // "first", "random:SEED", "priority:3,1,0".
    static Selection parse(const std::string& text);
};

class MealyController {
public:
    struct Node {
        std::vector<Coord> burst;
        InputId held = 0;
        bool initial = false;
        InputId select = 0;            // h_C
        std::vector<StateId> next;     // f_C = Post_{h_C}
        bool operator==(const Node&) const = default;
    };

    struct Step {
        InputId v;
        const std::vector<StateId>* next;
    };

    // sc: a non-blocking sub-system of the symbolic model whose keys decode to lattice states.
    static MealyController refine(const FiniteSystem& sc, const Lattice& lattice, const std::vector<Vec>& inputs,
                                  const DelayBounds& bounds, double mu_x, const Selection& sel = {});

    std::size_t size() const { return nodes_.size(); }
    const Node& node(StateId xi) const { return nodes_.at(xi); }
    const Lattice& lattice() const { return lattice_; }
    const std::vector<Vec>& inputs() const { return inputs_; }
    const DelayBounds& bounds() const { return bounds_; }
    double mu_x() const { return mu_x_; }

    bool in_domain(StateId xi, const Coord& w) const { return node(xi).burst.back() == w; }
    // Throws OutsideDomain when w differs from the last burst element of xi.
    Step step(StateId xi, const Coord& w) const;
    // Initial-form state whose single element is w.
    std::optional<StateId> initial_state(const Coord& w) const;
    // Element of next with burst length n and last element w_next; lowest id on ties.
    std::optional<StateId> resolve(const std::vector<StateId>& next, std::uint32_t n, const Coord& w_next) const;

    bool operator==(const MealyController& o) const;

    void write(std::ostream& os) const;
    static MealyController read(std::istream& is);

private:
    Lattice lattice_;
    std::vector<Vec> inputs_;
    DelayBounds bounds_;
    double mu_x_ = 0.0;
    std::string selection_;
    std::vector<Node> nodes_;
};

}  // namespace ncs
