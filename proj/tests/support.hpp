#pragma once

#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "ncs/tsys.hpp"

namespace ncs::testing {

// Small system over scalar outputs; state i gets key "s<i>".
inline FiniteSystem make_system(const std::vector<double>& outputs, const std::vector<StateId>& initial,
                                const std::vector<std::tuple<StateId, InputId, StateId>>& edges,
                                const std::vector<InputId>& inputs = {0}) {
    FiniteSystem s;
    for (std::size_t i = 0; i < outputs.size(); ++i) s.add_state("s" + std::to_string(i), {{outputs[i]}});
    for (auto q : initial) s.set_initial(q);
    for (auto u : inputs) s.add_input(u);
    for (auto [a, u, b] : edges) s.add_transition(a, u, b);
    return s;
}

// Random system with up to max_states states, outputs on a coarse grid, inputs {0, 1}.
inline FiniteSystem random_system(std::mt19937_64& rng, std::size_t max_states, const std::string& prefix = "s") {
    std::uniform_int_distribution<std::size_t> n_dist(1, max_states);
    std::size_t n = n_dist(rng);
    std::uniform_int_distribution<int> out(0, 4);
    std::bernoulli_distribution edge(0.3), init(0.4);
    FiniteSystem s;
    for (std::size_t i = 0; i < n; ++i) s.add_state(prefix + std::to_string(i), {{0.25 * out(rng)}});
    s.add_input(0);
    s.add_input(1);
    bool any = false;
    for (StateId i = 0; i < n; ++i)
        if (init(rng)) s.set_initial(i), any = true;
    if (!any) s.set_initial(0);
    for (StateId a = 0; a < n; ++a)
        for (InputId u = 0; u < 2; ++u)
            for (StateId b = 0; b < n; ++b)
                if (edge(rng)) s.add_transition(a, u, b);
    return s;
}

}  // namespace ncs::testing
