#include "ncs/sim.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "ncs/error.hpp"

namespace ncs {

namespace {

void sample(LoopTrace& t, const Lattice& lattice, const Vec& x) {
    t.y_tilde.push_back(x);
    t.y.push_back(lattice.quantize(x));
}

Vec advance(const PlantModel& p, const Vec& x, const Vec& u, std::size_t s) {
    Vec next = step_map(p, x, u);
    if (!p.in_state_space(next))
        throw LeftStateSpace(fmt::format("plant state ({:.6g}) left X at sampling index {}", fmt::join(next, ", "), s));
    return next;
}

}  // namespace

LoopTrace run_loop(const PlantModel& p, const MealyController& c, const Vec& x0, DelaySampler& delays,
                   std::uint32_t horizon) {
    if (horizon < 1) throw InvalidArgument("horizon must be at least one sampling interval");
    if (!p.in_state_space(x0)) throw LeftStateSpace("initial state outside X");
    const Lattice& lat = c.lattice();
    LoopTrace t;
    t.tau = p.tau;
    sample(t, lat, x0);
    t.v.push_back(static_cast<InputId>(p.u_ref));

    Coord w = lat.quantize_coord(x0);
    auto xi0 = c.initial_state(w);
    if (!xi0) throw OutsideDomain(fmt::format("no initial controller state for [x0] = ({})", fmt::join(w, ",")));
    StateId xi = *xi0;
    std::uint32_t m = 0;
    Vec x = x0;
    while (m < horizon) {
        t.m_seq.push_back(m);
        t.w.push_back(lat.point(w));
        t.xi_seq.push_back(xi);
        auto step = c.step(xi, w);
        t.v.push_back(step.v);
        std::uint32_t n = delays.next();
        t.n_seq.push_back(n);
        const Vec& held = p.inputs.at(t.v[t.v.size() - 2]);
        std::uint32_t end = std::min(m + n, horizon);
        for (std::uint32_t s = m; s < end; ++s) {
            t.applied.push_back(t.v[t.v.size() - 2]);
            x = advance(p, x, held, s + 1);
            sample(t, lat, x);
        }
        if (m + n > horizon) break;
        m += n;
        w = lat.quantize_coord(x);
        auto next = c.resolve(*step.next, n, w);
        if (!next)
            throw OutsideDomain(fmt::format("iteration {}: no successor of controller state {} with N = {} ends at ({})",
                                            t.m_seq.size(), xi, n, fmt::join(w, ",")));
        xi = *next;
    }
    return t;
}

LoopTrace run_open_loop(const PlantModel& p, const Vec& x0, const std::vector<InputId>& inputs) {
    LoopTrace t;
    t.tau = p.tau;
    t.y_tilde.push_back(x0);
    t.y.push_back(x0);
    t.v.push_back(static_cast<InputId>(p.u_ref));
    Vec x = x0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        t.m_seq.push_back(static_cast<std::uint32_t>(s));
        t.n_seq.push_back(1);
        t.w.push_back(x);
        t.xi_seq.push_back(0);
        t.v.push_back(inputs[s]);
        t.applied.push_back(t.v[s]);
        x = advance(p, x, p.inputs.at(t.v[s]), s + 1);
        t.y_tilde.push_back(x);
        t.y.push_back(x);
    }
    return t;
}

Verdict verify_trace(const LoopTrace& t, const Specification& q, double eps) {
    q.validate();
    Verdict v;
    std::size_t len = t.y_tilde.size();
    if (len == 0) {
        v.ok = true;
        return v;
    }
    auto succ = q.successors();
    auto near = [&](std::size_t s, std::uint32_t i) { return inf_dist(t.y_tilde[s], q.points[i]) <= eps + kMetricTol; };
    // back[s][i]: predecessor of spec state i at index s, or -1 if i is inconsistent there.
    std::vector<std::vector<std::int64_t>> back(len, std::vector<std::int64_t>(q.size(), -1));
    bool any = false;
    for (auto i : q.initial)
        if (near(0, i)) back[0][i] = i, any = true;
    for (std::size_t s = 0; any && s + 1 < len; ++s) {
        any = false;
        for (std::uint32_t i = 0; i < q.size(); ++i) {
            if (back[s][i] < 0) continue;
            for (auto j : succ[i])
                if (back[s + 1][j] < 0 && near(s + 1, j)) back[s + 1][j] = i, any = true;
        }
        if (!any) v.first_failure = s + 1;
    }
    if (!any) {
        if (!v.first_failure) v.first_failure = 0;
        return v;
    }
    v.ok = true;
    v.witness.assign(len, 0);
    std::uint32_t cur = 0;
    while (back[len - 1][cur] < 0) ++cur;
    for (std::size_t s = len; s-- > 0;) {
        v.witness[s] = cur;
        cur = static_cast<std::uint32_t>(back[s][cur]);
    }
    return v;
}

std::optional<std::string> check_trace_laws(const LoopTrace& t, const Lattice& lattice) {
    constexpr double tol = 1e-9;
    auto same = [&](const Vec& a, const Vec& b) { return a.size() == b.size() && inf_dist(a, b) <= tol; };
    std::size_t k_count = t.m_seq.size();
    if (t.y.size() != t.y_tilde.size()) return "sample sequences differ in length";
    if (t.applied.size() + 1 != t.y_tilde.size()) return "one held input per sampling interval expected";
    if (t.n_seq.size() != k_count || t.w.size() != k_count || t.xi_seq.size() != k_count || t.v.size() != k_count + 1)
        return "per-iteration sequences differ in length";
    for (std::size_t s = 0; s < t.y.size(); ++s)
        if (!same(t.y[s], lattice.quantize(t.y_tilde[s]))) return fmt::format("quantizer law broken at s = {}", s);
    if (k_count && t.m_seq[0] != 0) return "first holding time must be 0";
    for (std::size_t k = 0; k < k_count; ++k) {
        std::uint32_t m = t.m_seq[k];
        if (k + 1 < k_count && t.m_seq[k + 1] != m + t.n_seq[k]) return fmt::format("M_(k+1) = M_k + N_k broken at k = {}", k + 1);
        if (m >= t.y.size() || !same(t.w[k], t.y[m])) return fmt::format("switch law w_k = y_(M_k) broken at k = {}", k + 1);
        std::size_t end = std::min<std::size_t>(m + t.n_seq[k], t.applied.size());
        for (std::size_t s = m; s < end; ++s)
            if (t.applied[s] != t.v[k]) return fmt::format("hold law broken at s = {} (k = {})", s, k + 1);
    }
    return std::nullopt;
}

namespace {

constexpr const char* kSamplesHeader = "# ncs-trace v1 samples";
constexpr const char* kIterationsHeader = "# ncs-trace v1 iterations";

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::string join_num(const Vec& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += num(v[i]);
    }
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string columns(const char* prefix, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += fmt::format(",{}{}", prefix, i);
    return out;
}

}  // namespace

void export_samples(std::ostream& os, const LoopTrace& t, const std::vector<Vec>& inputs) {
    std::size_t nx = t.y_tilde.empty() ? 0 : t.y_tilde[0].size();
    std::size_t nu = inputs.empty() ? 0 : inputs[0].size();
    os << kSamplesHeader << " tau=" << num(t.tau) << " dim_x=" << nx << " dim_u=" << nu << "\n";
    os << "s,t" << columns("y_tilde", nx) << columns("y", nx) << ",u_id" << columns("u", nu) << ",k,N\n";
    std::size_t k = 0;
    for (std::size_t s = 0; s < t.y_tilde.size(); ++s) {
        os << s << ',' << num(s * t.tau) << ',' << join_num(t.y_tilde[s]) << ',' << join_num(t.y[s]);
        if (s < t.applied.size())
            os << ',' << t.applied[s] << ',' << join_num(inputs.at(t.applied[s]));
        else
            os << ',' << std::string(nu, ',');
        if (k < t.m_seq.size() && t.m_seq[k] == s) {
            os << ',' << k + 1 << ',' << t.n_seq[k];
            ++k;
        } else {
            os << ",,";
        }
        os << '\n';
    }
}

void export_iterations(std::ostream& os, const LoopTrace& t, const std::vector<Vec>& inputs) {
    std::size_t nx = t.w.empty() ? 0 : t.w[0].size();
    std::size_t nu = inputs.empty() ? 0 : inputs[0].size();
    os << kIterationsHeader << " v0=" << (t.v.empty() ? 0 : t.v[0]) << " dim_x=" << nx << " dim_u=" << nu << "\n";
    os << "k,M,N,xi" << columns("w", nx) << ",v_id" << columns("v", nu) << "\n";
    for (std::size_t k = 0; k < t.m_seq.size(); ++k)
        os << k + 1 << ',' << t.m_seq[k] << ',' << t.n_seq[k] << ',' << t.xi_seq[k] << ',' << join_num(t.w[k]) << ','
           << t.v[k + 1] << ',' << join_num(inputs.at(t.v[k + 1])) << '\n';
}

LoopTrace import_trace(std::istream& samples, std::istream& iterations) {
    LoopTrace t;
    std::string line;
    auto header_field = [](const std::string& header, const std::string& key) {
        auto pos = header.find(key + "=");
        if (pos == std::string::npos) throw FormatError("trace header lacks " + key);
        return header.substr(pos + key.size() + 1, header.find(' ', pos) - pos - key.size() - 1);
    };
    if (!std::getline(samples, line) || line.rfind(kSamplesHeader, 0) != 0) throw FormatError("missing samples header");
    t.tau = std::stod(header_field(line, "tau"));
    std::size_t nx = std::stoul(header_field(line, "dim_x"));
    std::size_t nu = std::stoul(header_field(line, "dim_u"));
    std::getline(samples, line);
    auto vec_at = [](const std::vector<std::string>& cells, std::size_t from, std::size_t n) {
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::stod(cells.at(from + i));
        return v;
    };
    while (std::getline(samples, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != 2 + 2 * nx + 1 + nu + 2) throw FormatError("malformed sample row: " + line);
        t.y_tilde.push_back(vec_at(cells, 2, nx));
        t.y.push_back(vec_at(cells, 2 + nx, nx));
        const std::string& uid = cells[2 + 2 * nx];
        if (!uid.empty()) t.applied.push_back(static_cast<InputId>(std::stoul(uid)));
    }
    if (!std::getline(iterations, line) || line.rfind(kIterationsHeader, 0) != 0)
        throw FormatError("missing iterations header");
    t.v.push_back(static_cast<InputId>(std::stoul(header_field(line, "v0"))));
    std::size_t wx = std::stoul(header_field(line, "dim_x"));
    std::getline(iterations, line);
    while (std::getline(iterations, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != 4 + wx + 1 + nu) throw FormatError("malformed iteration row: " + line);
        t.m_seq.push_back(static_cast<std::uint32_t>(std::stoul(cells[1])));
        t.n_seq.push_back(static_cast<std::uint32_t>(std::stoul(cells[2])));
        t.xi_seq.push_back(static_cast<StateId>(std::stoul(cells[3])));
        t.w.push_back(vec_at(cells, 4, wx));
        t.v.push_back(static_cast<InputId>(std::stoul(cells[4 + wx])));
    }
    return t;
}

}  // namespace ncs
