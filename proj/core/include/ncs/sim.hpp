#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncs/network.hpp"
#include "ncs/plant.hpp"
#include "ncs/refine.hpp"
#include "ncs/synthesis.hpp"

namespace ncs {

struct LoopTrace {
    double tau = 1.0;
    std::vector<Vec> y_tilde;          // per sampling index s = 0..S
    std::vector<Vec> y;                // quantized samples
    std::vector<InputId> applied;      // input held on [s, s+1), s = 0..S-1
    std::vector<Vec> w;                // per iteration k = 1..K (index k-1)
    std::vector<InputId> v;            // v_0 = reference input, then v_1..v_K
    std::vector<std::uint32_t> n_seq;  // N_k, k = 1..K (the last may be truncated by the horizon)
    std::vector<std::uint32_t> m_seq;  // M_k, M_1 = 0
    std::vector<StateId> xi_seq;       // controller state per iteration

    std::size_t iterations() const { return m_seq.size(); }
    std::size_t samples() const { return y_tilde.size(); }
};

// Runs the networked loop for `horizon` sampling intervals. Throws OutsideDomain when the
// controller cannot follow a measurement and LeftStateSpace when the plant leaves X.
LoopTrace run_loop(const PlantModel& p, const MealyController& c, const Vec& x0, DelaySampler& delays,
                   std::uint32_t horizon);

// Loop without quantization coarsening or delay: one iteration per sample, with a given
// per-sample input sequence.
LoopTrace run_open_loop(const PlantModel& p, const Vec& x0, const std::vector<InputId>& inputs);

struct Verdict {
    bool ok = false;
    std::optional<std::size_t> first_failure;  // sampling index where the consistent set emptied
    std::vector<std::uint32_t> witness;        // spec state per sampling index
};

// Decides whether some spec run stays within eps of every sample.
Verdict verify_trace(const LoopTrace& t, const Specification& q, double eps);

// Structural checks of the loop laws; returns a description of the first violation.
std::optional<std::string> check_trace_laws(const LoopTrace& t, const Lattice& lattice);

// Per-sample and per-iteration CSVs with a versioned header line.
void export_samples(std::ostream& os, const LoopTrace& t, const std::vector<Vec>& inputs);
void export_iterations(std::ostream& os, const LoopTrace& t, const std::vector<Vec>& inputs);
LoopTrace import_trace(std::istream& samples, std::istream& iterations);

}  // namespace ncs
