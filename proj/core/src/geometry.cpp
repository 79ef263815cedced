#include "ncs/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "ncs/error.hpp"

namespace ncs {

double inf_norm(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double inf_dist(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double euclid_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

bool Box::contains(const Vec& x, double tol) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= lo[i] - tol && x[i] <= hi[i] + tol)) return false;
    return true;
}

double Box::min_side() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lo.size(); ++i) m = std::min(m, hi[i] - lo[i]);
    return m;
}

BoxUnion::BoxUnion(std::vector<Box> boxes) : boxes_(std::move(boxes)) {
    for (const auto& b : boxes_) {
        if (b.lo.size() != b.hi.size() || b.lo.size() != boxes_.front().lo.size())
            throw InvalidArgument("box dimensions disagree");
        for (std::size_t i = 0; i < b.lo.size(); ++i)
            if (!(b.lo[i] <= b.hi[i])) throw InvalidArgument("box lower bound exceeds upper bound");
    }
}

BoxUnion::BoxUnion(Box box) : BoxUnion(std::vector<Box>{std::move(box)}) {}

std::size_t BoxUnion::dim() const { return boxes_.empty() ? 0 : boxes_.front().dim(); }

std::optional<std::size_t> BoxUnion::locate(const Vec& x, double tol) const {
    for (std::size_t j = 0; j < boxes_.size(); ++j)
        if (boxes_[j].contains(x, tol)) return j;
    return std::nullopt;
}

bool BoxUnion::contains(const BoxUnion& other) const {
    // Corner test per box; exact for boxes nested in a single member, conservative otherwise.
    for (const auto& b : other.boxes()) {
        bool inside = false;
        for (const auto& a : boxes_) {
            if (a.contains(b.lo) && a.contains(b.hi)) {
                inside = true;
                break;
            }
        }
        if (!inside) return false;
    }
    return true;
}

double BoxUnion::mu_hat() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes_) m = std::min(m, b.min_side());
    return m;
}

Box BoxUnion::hull() const {
    Box h = boxes_.at(0);
    for (const auto& b : boxes_)
        for (std::size_t i = 0; i < h.dim(); ++i) {
            h.lo[i] = std::min(h.lo[i], b.lo[i]);
            h.hi[i] = std::max(h.hi[i], b.hi[i]);
        }
    return h;
}

Lattice::Lattice(BoxUnion region, Vec step) : region_(std::move(region)), step_(std::move(step)) {
    if (region_.empty()) throw InvalidArgument("lattice over an empty region");
    if (step_.size() != region_.dim()) throw InvalidArgument("lattice step has wrong dimension");
    for (double s : step_)
        if (!(s > 0.0)) throw InvalidArgument("lattice step must be positive");
    ranges_.resize(region_.size());
    for (std::size_t b = 0; b < region_.size(); ++b) {
        for (std::size_t i = 0; i < dim(); ++i) {
            AxisRange r;
            r.lo = static_cast<std::int64_t>(std::ceil(region_[b].lo[i] / step_[i] - 1e-9));
            r.hi = static_cast<std::int64_t>(std::floor(region_[b].hi[i] / step_[i] + 1e-9));
            ranges_[b].push_back(r);
        }
    }
}

Lattice::Lattice(BoxUnion region, double step)
    : Lattice(region, Vec(region.dim(), step)) {}

double Lattice::max_step() const { return *std::max_element(step_.begin(), step_.end()); }

double Lattice::accuracy() const {
    auto aligned = [](double v, double s) {
        double q = v / s;
        return std::abs(q - std::round(q)) <= 1e-9;
    };
    double acc = 0.0;
    for (const auto& b : region_.boxes())
        for (std::size_t i = 0; i < dim(); ++i) {
            bool on_grid = aligned(b.lo[i], step_[i]) && aligned(b.hi[i], step_[i]);
            acc = std::max(acc, on_grid ? 0.5 * step_[i] : step_[i]);
        }
    return acc;
}

AxisRange Lattice::axis_range(std::size_t box, std::size_t axis) const { return ranges_.at(box).at(axis); }

Coord Lattice::quantize_coord(const Vec& a) const {
    if (a.size() != dim()) throw InvalidArgument("point has wrong dimension");
    auto box = region_.locate(a);
    if (!box) throw OutsideBox("point lies outside the quantized region");
    Coord k(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        const AxisRange& r = ranges_[*box][i];
        if (r.count() == 0) throw InvalidArgument("box side shorter than the lattice step");
        auto v = static_cast<std::int64_t>(std::floor(a[i] / step_[i] + 0.5));
        k[i] = std::clamp(v, r.lo, r.hi);
    }
    return k;
}

Vec Lattice::point(const Coord& k) const {
    Vec p(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) p[i] = static_cast<double>(k[i]) * step_[i];
    return p;
}

bool Lattice::contains_coord(const Coord& k) const {
    for (const auto& box : ranges_) {
        bool in = true;
        for (std::size_t i = 0; i < k.size() && in; ++i) in = k[i] >= box[i].lo && k[i] <= box[i].hi;
        if (in) return true;
    }
    return false;
}

std::vector<std::uint64_t> Lattice::axis_counts(std::size_t box) const {
    std::vector<std::uint64_t> c;
    for (const auto& r : ranges_.at(box)) c.push_back(static_cast<std::uint64_t>(r.count()));
    return c;
}

std::uint64_t Lattice::count() const {
    const std::size_t nb = ranges_.size();
    if (nb > 20) throw CapacityExceeded("too many boxes for exact lattice counting");
    // Inclusion-exclusion over box intersections.
    long double total = 0;
    for (std::uint32_t mask = 1; mask < (1u << nb); ++mask) {
        long double prod = 1;
        for (std::size_t i = 0; i < dim(); ++i) {
            std::int64_t lo = std::numeric_limits<std::int64_t>::min();
            std::int64_t hi = std::numeric_limits<std::int64_t>::max();
            for (std::size_t b = 0; b < nb; ++b)
                if (mask & (1u << b)) {
                    lo = std::max(lo, ranges_[b][i].lo);
                    hi = std::min(hi, ranges_[b][i].hi);
                }
            prod *= hi >= lo ? static_cast<long double>(hi - lo + 1) : 0;
        }
        total += (std::popcount(mask) % 2 == 1) ? prod : -prod;
    }
    return static_cast<std::uint64_t>(total + 0.5L);
}

namespace {

template <class Visit>
void odometer(const std::vector<AxisRange>& ranges, Visit&& visit) {
    for (const auto& r : ranges)
        if (r.count() == 0) return;
    Coord k(ranges.size());
    for (std::size_t i = 0; i < ranges.size(); ++i) k[i] = ranges[i].lo;
    while (true) {
        visit(k);
        std::size_t i = ranges.size();
        while (i > 0) {
            --i;
            if (k[i] < ranges[i].hi) {
                ++k[i];
                break;
            }
            k[i] = ranges[i].lo;
            if (i == 0) return;
        }
        if (ranges.empty()) return;
    }
}

}  // namespace

std::vector<Coord> Lattice::enumerate_coords(std::uint64_t budget) const {
    std::uint64_t n = count();
    if (n > budget)
        throw CapacityExceeded("lattice has " + std::to_string(n) + " points, budget " + std::to_string(budget));
    std::vector<Coord> out;
    out.reserve(n);
    for (const auto& box : ranges_) odometer(box, [&](const Coord& k) { out.push_back(k); });
    if (ranges_.size() > 1) {
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

std::vector<Vec> Lattice::enumerate(std::uint64_t budget) const {
    std::vector<Vec> out;
    for (const auto& k : enumerate_coords(budget)) out.push_back(point(k));
    return out;
}

void Lattice::for_each_in_ball(const Coord& center, double radius,
                               const std::function<void(const Coord&)>& visit) const {
    std::vector<AxisRange> window(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        auto reach = static_cast<std::int64_t>(std::floor(radius / step_[i] + 1e-9));
        window[i] = {center[i] - reach, center[i] + reach};
    }
    odometer(window, [&](const Coord& k) {
        if (contains_coord(k)) visit(k);
    });
}

}  // namespace ncs
