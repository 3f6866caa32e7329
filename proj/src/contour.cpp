#include "kronlyap/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace kronlyap::sim {

namespace {

constexpr long kNone = -1;

// Grid of samples plus the edge numbering shared by neighbouring cells:
// horizontal edges (i,j)-(i+1,j) first, then vertical edges (i,j)-(i,j+1).
class Grid {
public:
    Grid(const PlaneFunction& f, double level, const BoundingBox& box, int resolution)
        : level_(level), box_(box), res_(resolution), nx_(resolution + 1),
          values_(static_cast<std::size_t>(nx_) * nx_) {
        for (long j = 0; j < nx_; ++j) {
            for (long i = 0; i < nx_; ++i) values_[index(i, j)] = f(point(i, j));
        }
    }

    [[nodiscard]] long nx() const noexcept { return nx_; }
    [[nodiscard]] long edge_count() const noexcept { return 2 * nx_ * res_; }
    [[nodiscard]] double value(long i, long j) const { return values_[index(i, j)]; }
    [[nodiscard]] bool inside(long i, long j) const { return value(i, j) < level_; }

    [[nodiscard]] Eigen::Vector2d point(long i, long j) const {
        return {box_.x_min + (box_.x_max - box_.x_min) * static_cast<double>(i) / static_cast<double>(res_),
                box_.y_min + (box_.y_max - box_.y_min) * static_cast<double>(j) / static_cast<double>(res_)};
    }

    [[nodiscard]] long horizontal(long i, long j) const { return j * res_ + i; }
    [[nodiscard]] long vertical(long i, long j) const { return nx_ * res_ + j * nx_ + i; }

    // Crossing on an edge, always interpolated from its lower endpoint so
    // both cells sharing the edge get the same point.
    [[nodiscard]] Eigen::Vector2d crossing(long key) const {
        long i0 = 0, j0 = 0, i1 = 0, j1 = 0;
        if (key < nx_ * res_) {
            j0 = j1 = key / res_;
            i0 = key % res_;
            i1 = i0 + 1;
        } else {
            const long k = key - nx_ * res_;
            i0 = i1 = k % nx_;
            j0 = k / nx_;
            j1 = j0 + 1;
        }
        const double f0 = value(i0, j0);
        const double f1 = value(i1, j1);
        double t = 0.5;
        if (std::isfinite(f0) && std::isfinite(f1) && f1 != f0) t = std::clamp((level_ - f0) / (f1 - f0), 0.0, 1.0);
        return point(i0, j0) + t * (point(i1, j1) - point(i0, j0));
    }

private:
    [[nodiscard]] std::size_t index(long i, long j) const { return static_cast<std::size_t>(j * nx_ + i); }

    double level_;
    BoundingBox box_;
    long res_;
    long nx_;
    std::vector<double> values_;
};

} // namespace

std::vector<Polyline> contour_2d(const PlaneFunction& f, double level, const BoundingBox& box, int resolution) {
    if (resolution < 1) throw std::invalid_argument("contour resolution must be >= 1");
    if (!(box.x_max > box.x_min) || !(box.y_max > box.y_min)) throw std::invalid_argument("empty bounding box");
    if (!std::isfinite(level)) throw std::invalid_argument("contour level must be finite");
    const Grid g(f, level, box, resolution);

    std::vector<long> next(static_cast<std::size_t>(g.edge_count()), kNone);
    std::vector<bool> has_incoming(next.size(), false);
    auto link = [&](long from, long to) {
        next[static_cast<std::size_t>(from)] = to;
        has_incoming[static_cast<std::size_t>(to)] = true;
    };

    for (long j = 0; j < resolution; ++j) {
        for (long i = 0; i < resolution; ++i) {
            // corners and edges counter-clockwise from the lower left
            const std::array<bool, 4> in = {g.inside(i, j), g.inside(i + 1, j), g.inside(i + 1, j + 1),
                                            g.inside(i, j + 1)};
            const std::array<long, 4> edge = {g.horizontal(i, j), g.vertical(i + 1, j), g.horizontal(i, j + 1),
                                              g.vertical(i, j)};
            std::array<long, 4> keys{};
            std::array<bool, 4> exits{};
            int count = 0;
            for (int e = 0; e < 4; ++e) {
                if (in[e] != in[(e + 1) % 4]) {
                    keys[count] = edge[e];
                    exits[count] = in[e]; // leaving {f < level} when walking counter-clockwise
                    ++count;
                }
            }
            if (count == 2) {
                if (exits[0]) link(keys[0], keys[1]);
                else link(keys[1], keys[0]);
            } else if (count == 4) {
                // saddle: the centre decides which corners are joined.
                // Exits pair with the following entry when the centre is
                // inside, with the preceding one otherwise.
                const double centre = 0.25 * (g.value(i, j) + g.value(i + 1, j) + g.value(i + 1, j + 1) +
                                              g.value(i, j + 1));
                const bool centre_inside = centre < level;
                for (int c = 0; c < 4; ++c) {
                    if (!exits[c]) continue;
                    link(keys[c], keys[centre_inside ? (c + 1) % 4 : (c + 3) % 4]);
                }
            }
        }
    }

    std::vector<Polyline> out;
    std::vector<bool> used(next.size(), false);
    auto walk = [&](long start) {
        Polyline line;
        long k = start;
        while (k != kNone && !used[static_cast<std::size_t>(k)]) {
            used[static_cast<std::size_t>(k)] = true;
            line.points.push_back(g.crossing(k));
            k = next[static_cast<std::size_t>(k)];
        }
        if (k == start) {
            line.closed = true;
            line.points.push_back(line.points.front());
        }
        out.push_back(std::move(line));
    };
    // open curves end on the box boundary; start them where nothing enters
    for (long k = 0; k < g.edge_count(); ++k) {
        const auto s = static_cast<std::size_t>(k);
        if (next[s] != kNone && !has_incoming[s] && !used[s]) walk(k);
    }
    for (long k = 0; k < g.edge_count(); ++k) {
        const auto s = static_cast<std::size_t>(k);
        if (next[s] != kNone && !used[s]) walk(k);
    }
    return out;
}

std::vector<Polyline> contour_2d(const analysis::LevelFunction& v, double level, const BoundingBox& box,
                                 int resolution) {
    if (v.lift().n() != 2) throw std::invalid_argument("contours are only available for planar systems (n = 2)");
    return contour_2d([&v](const Eigen::Vector2d& p) { return v(Vector(p)); }, level, box, resolution);
}

std::optional<BoundingBox> enclosing_box(const PlaneFunction& f, double level, const Eigen::Vector2d& centre,
                                         double half_width, int max_doublings, int samples_per_side) {
    if (!(half_width > 0.0) || samples_per_side < 1) throw std::invalid_argument("enclosing_box: bad arguments");
    for (int d = 0; d <= max_doublings; ++d, half_width *= 2.0) {
        const BoundingBox box{centre.x() - half_width, centre.x() + half_width, centre.y() - half_width,
                              centre.y() + half_width};
        bool outside = true;
        for (int k = 0; k < samples_per_side && outside; ++k) {
            const double s = -half_width + 2.0 * half_width * k / samples_per_side;
            // one sample per side, walking counter-clockwise
            for (const Eigen::Vector2d& p :
                 {Eigen::Vector2d(s, -half_width), Eigen::Vector2d(half_width, s), Eigen::Vector2d(-s, half_width),
                  Eigen::Vector2d(-half_width, -s)}) {
                if (!(f(centre + p) > level)) {
                    outside = false;
                    break;
                }
            }
        }
        if (outside) return box;
    }
    return std::nullopt;
}

double signed_area(const std::vector<Eigen::Vector2d>& points) {
    double twice = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& a = points[k];
        const auto& b = points[(k + 1) % points.size()];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * twice;
}

double enclosed_area(const std::vector<Polyline>& curves) {
    double area = 0.0;
    for (const auto& c : curves) {
        if (c.closed) area += signed_area(c.points);
    }
    return area;
}

} // namespace kronlyap::sim
