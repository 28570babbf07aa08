#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "supervisor/geometry.hpp"
#include "supervisor/text.hpp"

namespace supervisor {

/// Track-relative coordinates: arc length s along the reference line,
/// signed lateral offset n (left of driving direction positive).
struct FrenetPosition {
    double s{0.0};
    double n{0.0};
};

class OutOfCorridorError : public std::runtime_error {
  public:
    explicit OutOfCorridorError(const std::string& what) : std::runtime_error(what) {}
};

class TrackFormatError : public std::runtime_error {
  public:
    explicit TrackFormatError(const std::string& what) : std::runtime_error(what) {}
};

/// One reference-line sample with lateral corridor widths.
struct TrackStation {
    double s{0.0};       ///< cumulative arc length [m]
    Vec2 center;         ///< reference-line point
    double n_left{0.0};  ///< distance to left bound [m], > 0
    double n_right{0.0}; ///< distance to right bound [m], > 0
    double heading{0.0}; ///< reference tangent [rad], derived
};

/// Reference line plus lateral bounds, sampled at stations of increasing arc
/// length. A circuit is represented by a duplicated closing sample: the last
/// station carries the same coordinates as the first, and s wraps at the last
/// station's arc length.
class TrackMap {
  public:
    static constexpr double kDefaultCorridor = 50.0;  // [m]

    TrackMap() = default;

    /// Builds a map from samples (headings are derived). Throws
    /// TrackFormatError on malformed input.
    static TrackMap from_stations(std::vector<TrackStation> stations) {
        TrackMap map;
        if (stations.size() < 2) {
            throw TrackFormatError("track needs at least 2 stations");
        }
        for (std::size_t i = 0; i < stations.size(); ++i) {
            const TrackStation& st = stations[i];
            if (!std::isfinite(st.s) || !std::isfinite(st.center.x) || !std::isfinite(st.center.y) ||
                !std::isfinite(st.n_left) || !std::isfinite(st.n_right)) {
                throw TrackFormatError("non-finite track sample at row " + std::to_string(i));
            }
            if (i > 0 && !(st.s > stations[i - 1].s)) {
                throw TrackFormatError("arc length not strictly increasing at row " + std::to_string(i));
            }
            if (st.n_left + st.n_right <= 0.0) {
                throw TrackFormatError("degenerate corridor width at row " + std::to_string(i));
            }
        }
        map.stations_ = std::move(stations);
        map.closed_ = distance(map.stations_.front().center, map.stations_.back().center) < 1e-9;
        map.length_ = map.stations_.back().s;
        map.derive_headings();
        map.build_grid();
        return map;
    }

    /// Track CSV: header row `s;x;y;n_left;n_right`, one sample per row,
    /// semicolon separated, SI units, `.` decimal point. A closed circuit
    /// repeats the first sample coordinates in its last row.
    static TrackMap parse_csv(std::istream& in) {
        std::string line;
        if (!std::getline(in, line)) {
            throw TrackFormatError("empty track file");
        }
        if (detail::trim(line) != "s;x;y;n_left;n_right") {
            throw TrackFormatError("bad track header row: " + line);
        }
        std::vector<TrackStation> stations;
        int row = 1;
        while (std::getline(in, line)) {
            ++row;
            const std::string trimmed = detail::trim(line);
            if (trimmed.empty()) {
                continue;
            }
            const std::vector<std::string> cols = detail::split(trimmed, ';');
            if (cols.size() != 5) {
                throw TrackFormatError("row " + std::to_string(row) + ": expected 5 columns");
            }
            TrackStation st;
            st.s = detail::parse_double(cols[0], "track row " + std::to_string(row));
            st.center.x = detail::parse_double(cols[1], "track row " + std::to_string(row));
            st.center.y = detail::parse_double(cols[2], "track row " + std::to_string(row));
            st.n_left = detail::parse_double(cols[3], "track row " + std::to_string(row));
            st.n_right = detail::parse_double(cols[4], "track row " + std::to_string(row));
            stations.push_back(st);
        }
        return from_stations(std::move(stations));
    }

    static TrackMap load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw TrackFormatError("cannot open track file: " + path);
        }
        return parse_csv(in);
    }

    void write_csv(std::ostream& out) const {
        out << "s;x;y;n_left;n_right\n";
        for (const TrackStation& st : stations_) {
            out << detail::format_double(st.s) << ';' << detail::format_double(st.center.x) << ';'
                << detail::format_double(st.center.y) << ';' << detail::format_double(st.n_left) << ';'
                << detail::format_double(st.n_right) << '\n';
        }
    }

    void save_csv(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw TrackFormatError("cannot write track file: " + path);
        }
        write_csv(out);
    }

    const std::vector<TrackStation>& stations() const { return stations_; }
    bool closed() const { return closed_; }
    double total_length() const { return length_; }

    /// Wraps s into [0, total_length) on circuits; clamps are left to callers.
    double wrap_s(double s) const {
        if (!closed_) {
            return s;
        }
        s = std::fmod(s, length_);
        if (s < 0.0) {
            s += length_;
        }
        return s;
    }

    /// Signed arc-length delta from `from` to `to`, forward positive. On a
    /// circuit the result is wrapped to (-L/2, L/2].
    double delta_s(double from, double to) const {
        double d = to - from;
        if (closed_) {
            d = std::fmod(d, length_);
            if (d <= -0.5 * length_) {
                d += length_;
            } else if (d > 0.5 * length_) {
                d -= length_;
            }
        }
        return d;
    }

    /// Projects a point onto the reference line: closest segment, linear
    /// interpolation. Throws OutOfCorridorError when the closest reference
    /// point is farther than `corridor`. Candidate segments come from a
    /// uniform spatial grid built at construction, so a lookup touches a few
    /// cells instead of the whole polyline.
    FrenetPosition project(const Vec2& p, double corridor = kDefaultCorridor) const {
        double best_d2 = 1e300;
        std::size_t best_i = 0;
        double best_t = 0.0;
        const auto consider = [&](std::size_t i) {
            const Vec2& a = stations_[i].center;
            const Vec2& b = stations_[i + 1].center;
            const double t = closest_point_param(p, a, b);
            const Vec2 q = a + (b - a) * t;
            const Vec2 d = p - q;
            const double d2 = dot(d, d);
            if (d2 < best_d2) {
                best_d2 = d2;
                best_i = i;
                best_t = t;
            }
        };

        const int cx = cell_of(p.x, grid_x0_, grid_nx_);
        const int cy = cell_of(p.y, grid_y0_, grid_ny_);
        const double d0 = std::sqrt(cell_distance2(p, cx, cy));  // 0 when p is on the grid
        const auto visit = [&](int ix, int iy) {
            if (ix < 0 || iy < 0 || ix >= grid_nx_ || iy >= grid_ny_) {
                return;
            }
            if (cell_distance2(p, ix, iy) >= best_d2) {
                return;
            }
            for (const std::uint32_t seg : cells_[static_cast<std::size_t>(iy) * grid_nx_ + ix]) {
                consider(seg);
            }
        };
        const int hard_cap = grid_nx_ + grid_ny_ + 2;
        for (int r = 0; r <= hard_cap; ++r) {
            if (r == 0) {
                visit(cx, cy);
            } else {
                for (int ix = cx - r; ix <= cx + r; ++ix) {
                    visit(ix, cy - r);
                    visit(ix, cy + r);
                }
                for (int iy = cy - r + 1; iy <= cy + r - 1; ++iy) {
                    visit(cx - r, iy);
                    visit(cx + r, iy);
                }
            }
            // every cell beyond ring r is at least r*cell - d0 away from p
            const double beyond = r * cell_ - d0;
            if (best_d2 < 1e300 && beyond > std::sqrt(best_d2)) {
                break;
            }
            if (beyond > corridor + cell_) {
                break;
            }
        }
        const double dist = std::sqrt(best_d2);
        if (dist > corridor) {
            throw OutOfCorridorError("point (" + detail::format_double(p.x) + ", " +
                                     detail::format_double(p.y) + ") is " + detail::format_double(dist) +
                                     " m from the reference line (corridor " +
                                     detail::format_double(corridor) + " m)");
        }
        const TrackStation& a = stations_[best_i];
        const TrackStation& b = stations_[best_i + 1];
        const Vec2 ab = b.center - a.center;
        const Vec2 q = a.center + ab * best_t;
        const double side = cross(ab, p - q);
        FrenetPosition fp;
        fp.s = wrap_s(a.s + best_t * (b.s - a.s));
        fp.n = side >= 0.0 ? dist : -dist;
        return fp;
    }

    /// Inverse of project for on-corridor points: reference point at s plus
    /// n along the left normal.
    Vec2 reconstruct(const FrenetPosition& fp) const {
        const double s = closed_ ? wrap_s(fp.s) : std::clamp(fp.s, 0.0, length_);
        const std::size_t i = station_index(s);
        const TrackStation& a = stations_[i];
        const TrackStation& b = stations_[i + 1];
        const double span = b.s - a.s;
        const double w = span > 0.0 ? (s - a.s) / span : 0.0;
        const Vec2 base = a.center + (b.center - a.center) * w;
        const double h = interp_heading(a.heading, b.heading, w);
        const Vec2 left{-std::sin(h), std::cos(h)};
        return base + left * fp.n;
    }

    double heading_at(double s) const {
        const double sc = closed_ ? wrap_s(s) : std::clamp(s, 0.0, length_);
        const std::size_t i = station_index(sc);
        const TrackStation& a = stations_[i];
        const TrackStation& b = stations_[i + 1];
        const double span = b.s - a.s;
        const double w = span > 0.0 ? (sc - a.s) / span : 0.0;
        return interp_heading(a.heading, b.heading, w);
    }

    double width_left_at(double s) const { return interp_width(s, true); }
    double width_right_at(double s) const { return interp_width(s, false); }

    Vec2 left_bound_point(std::size_t i) const {
        const TrackStation& st = stations_[i];
        const Vec2 left{-std::sin(st.heading), std::cos(st.heading)};
        return st.center + left * st.n_left;
    }

    Vec2 right_bound_point(std::size_t i) const {
        const TrackStation& st = stations_[i];
        const Vec2 left{-std::sin(st.heading), std::cos(st.heading)};
        return st.center + left * (-st.n_right);
    }

    /// Station index i such that stations[i].s <= s <= stations[i+1].s.
    std::size_t station_index(double s) const {
        if (s <= stations_.front().s) {
            return 0;
        }
        if (s >= stations_.back().s) {
            return stations_.size() - 2;
        }
        auto it = std::upper_bound(stations_.begin(), stations_.end(), s,
                                   [](double v, const TrackStation& st) { return v < st.s; });
        return static_cast<std::size_t>(it - stations_.begin()) - 1;
    }

  private:
    static double interp_heading(double a, double b, double w) {
        return normalize_angle(a + w * normalize_angle(b - a));
    }

    double interp_width(double s, bool left) const {
        const double sc = closed_ ? wrap_s(s) : std::clamp(s, 0.0, length_);
        const std::size_t i = station_index(sc);
        const TrackStation& a = stations_[i];
        const TrackStation& b = stations_[i + 1];
        const double span = b.s - a.s;
        const double w = span > 0.0 ? (sc - a.s) / span : 0.0;
        const double va = left ? a.n_left : a.n_right;
        const double vb = left ? b.n_left : b.n_right;
        return va + w * (vb - va);
    }

    void derive_headings() {
        const std::size_t n = stations_.size();
        for (std::size_t i = 0; i < n; ++i) {
            Vec2 d;
            if (closed_) {
                // last station duplicates the first; wrap across the seam
                const std::size_t prev = i == 0 ? n - 2 : i - 1;
                const std::size_t next = i + 1 >= n ? 1 : i + 1;
                d = stations_[next].center - stations_[prev].center;
            } else if (i == 0) {
                d = stations_[1].center - stations_[0].center;
            } else if (i + 1 == n) {
                d = stations_[n - 1].center - stations_[n - 2].center;
            } else {
                d = stations_[i + 1].center - stations_[i - 1].center;
            }
            stations_[i].heading = std::atan2(d.y, d.x);
        }
        if (closed_) {
            stations_.back().heading = stations_.front().heading;
        }
    }

    int cell_of(double v, double origin, int n) const {
        const int i = static_cast<int>(std::floor((v - origin) / cell_));
        return std::min(std::max(i, 0), n - 1);
    }

    double cell_distance2(const Vec2& p, int ix, int iy) const {
        const double x_lo = grid_x0_ + ix * cell_;
        const double y_lo = grid_y0_ + iy * cell_;
        const double dx = std::max({x_lo - p.x, 0.0, p.x - (x_lo + cell_)});
        const double dy = std::max({y_lo - p.y, 0.0, p.y - (y_lo + cell_)});
        return dx * dx + dy * dy;
    }

    void build_grid() {
        double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
        double span_sum = 0.0;
        for (const TrackStation& st : stations_) {
            x_min = std::min(x_min, st.center.x);
            x_max = std::max(x_max, st.center.x);
            y_min = std::min(y_min, st.center.y);
            y_max = std::max(y_max, st.center.y);
        }
        for (std::size_t i = 0; i + 1 < stations_.size(); ++i) {
            span_sum += distance(stations_[i].center, stations_[i + 1].center);
        }
        const double mean_spacing = span_sum / static_cast<double>(stations_.size() - 1);
        cell_ = std::max(4.0 * mean_spacing, 4.0);
        // cap the grid size for pathological inputs
        while ((x_max - x_min) / cell_ * ((y_max - y_min) / cell_) > 4e6) {
            cell_ *= 2.0;
        }
        grid_x0_ = x_min - cell_;
        grid_y0_ = y_min - cell_;
        grid_nx_ = static_cast<int>((x_max - grid_x0_) / cell_) + 2;
        grid_ny_ = static_cast<int>((y_max - grid_y0_) / cell_) + 2;
        cells_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
        for (std::size_t i = 0; i + 1 < stations_.size(); ++i) {
            const Vec2& a = stations_[i].center;
            const Vec2& b = stations_[i + 1].center;
            const int ix0 = static_cast<int>((std::min(a.x, b.x) - grid_x0_) / cell_);
            const int ix1 = static_cast<int>((std::max(a.x, b.x) - grid_x0_) / cell_);
            const int iy0 = static_cast<int>((std::min(a.y, b.y) - grid_y0_) / cell_);
            const int iy1 = static_cast<int>((std::max(a.y, b.y) - grid_y0_) / cell_);
            for (int iy = iy0; iy <= iy1; ++iy) {
                for (int ix = ix0; ix <= ix1; ++ix) {
                    cells_[static_cast<std::size_t>(iy) * grid_nx_ + ix].push_back(
                        static_cast<std::uint32_t>(i));
                }
            }
        }
    }

    std::vector<TrackStation> stations_;
    bool closed_{false};
    double length_{0.0};
    double cell_{8.0};
    double grid_x0_{0.0};
    double grid_y0_{0.0};
    int grid_nx_{0};
    int grid_ny_{0};
    std::vector<std::vector<std::uint32_t>> cells_;
};

/// Minimum clearance of a polygon to either track bound. Negative when the
/// polygon crosses a bound (penetration depth, negated); crossing is judged
/// in the lateral corridor measure, clearance is exact Euclidean distance to
/// the bound polylines.
inline double signed_distance_to_bounds(const ConvexPolygon& poly, const TrackMap& map,
                                        double corridor = TrackMap::kDefaultCorridor) {
    double worst_overrun = -1e300;
    double s_min = 1e300, s_max = -1e300;
    double first_s = 0.0;
    bool have_first = false;
    for (const Vec2& c : poly.corners) {
        const FrenetPosition fp = map.project(c, corridor);
        const double over_left = fp.n - map.width_left_at(fp.s);
        const double over_right = -fp.n - map.width_right_at(fp.s);
        worst_overrun = std::max({worst_overrun, over_left, over_right});
        // track s extent, unwrapped around the first corner for circuits
        double s_rel = fp.s;
        if (!have_first) {
            first_s = fp.s;
            have_first = true;
        } else {
            s_rel = first_s + map.delta_s(first_s, fp.s);
        }
        s_min = std::min(s_min, s_rel);
        s_max = std::max(s_max, s_rel);
    }
    if (worst_overrun >= 0.0) {
        return worst_overrun == 0.0 ? 0.0 : -worst_overrun;
    }

    // Fully inside: exact polygon-to-polyline distance over nearby bound
    // segments (corner-to-segment and bound-vertex-to-edge pairs).
    const std::size_t seg_count = map.stations().size() - 1;
    const double margin = 15.0;
    std::size_t seg_begin, seg_last;
    if (map.closed() && (s_max - s_min) + 2.0 * margin >= map.total_length()) {
        seg_begin = 0;
        seg_last = seg_count - 1;
    } else if (map.closed()) {
        seg_begin = map.station_index(map.wrap_s(s_min - margin));
        seg_last = map.station_index(map.wrap_s(s_max + margin));
    } else {
        seg_begin = map.station_index(std::clamp(s_min - margin, 0.0, map.total_length()));
        seg_last = map.station_index(std::clamp(s_max + margin, 0.0, map.total_length()));
    }

    double best = 1e300;
    const std::size_t corner_count = poly.corners.size();
    for (std::size_t i = seg_begin;; i = (i + 1) % seg_count) {
        for (int side = 0; side < 2; ++side) {
            const Vec2 a = side == 0 ? map.left_bound_point(i) : map.right_bound_point(i);
            const Vec2 b = side == 0 ? map.left_bound_point(i + 1) : map.right_bound_point(i + 1);
            for (const Vec2& c : poly.corners) {
                best = std::min(best, point_segment_distance(c, a, b));
            }
            for (std::size_t k = 0; k < corner_count; ++k) {
                best = std::min(best,
                                point_segment_distance(a, poly.corners[k], poly.corners[(k + 1) % corner_count]));
            }
        }
        if (i == seg_last) {
            break;
        }
    }
    return best;
}

}  // namespace supervisor
