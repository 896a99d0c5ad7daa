#pragma once

#include <limits>
#include <queue>

#include "clk/volume.hpp"

namespace clk {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Precomputed neighbor offsets with physical step lengths.
struct Neighborhood {
    int count = 0;
    std::array<std::array<int, 3>, 26> offset{};
    std::array<double, 26> length_mm{};

    static Neighborhood make(const std::array<double, 3>& spacing, int connectivity = 26) {
        Neighborhood n;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0 && dz == 0) continue;
                    if (connectivity == 6 && std::abs(dx) + std::abs(dy) + std::abs(dz) != 1)
                        continue;
                    n.offset[n.count] = {dx, dy, dz};
                    double ex = dx * spacing[0], ey = dy * spacing[1], ez = dz * spacing[2];
                    n.length_mm[n.count] = std::sqrt(ex * ex + ey * ey + ez * ez);
                    ++n.count;
                }
        return n;
    }
};

/// Distance field over foreground voxels; kInf marks background/unreached.
struct GeodesicField {
    std::vector<double> dist;
    std::vector<std::int64_t> parent;  // flat index of predecessor, -1 at seeds
};

namespace detail {

using HeapEntry = std::pair<double, std::int64_t>;  // (cost, flat index)
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

}  // namespace detail

/// Multi-source geodesic distances within the mask foreground under the
/// 26-neighborhood, edge lengths = voxel-center distances in mm. Seeds carry
/// an initial cost (e.g. the offset between an off-lattice point and the
/// center of its host voxel).
inline GeodesicField geodesic_distance(const Volume3D& mask,
                                       const std::vector<std::pair<VoxelIndex, double>>& seeds) {
    detail::require_mask(mask, "geodesic_distance");
    Neighborhood nb = Neighborhood::make(mask.spacing());
    GeodesicField out;
    out.dist.assign(mask.size(), kInf);
    out.parent.assign(mask.size(), -1);

    detail::MinHeap heap;
    for (const auto& [v, cost] : seeds) {
        if (!mask.in_bounds(v) || !mask.is_foreground(v))
            throw ClkError("geodesic_distance: seed voxel is background or out of bounds");
        std::size_t f = mask.flat(v);
        if (cost < out.dist[f]) {
            out.dist[f] = cost;
            heap.emplace(cost, std::int64_t(f));
        }
    }

    while (!heap.empty()) {
        auto [d, f] = heap.top();
        heap.pop();
        if (d != out.dist[f]) continue;  // stale
        VoxelIndex cur = mask.unflat(std::size_t(f));
        for (int k = 0; k < nb.count; ++k) {
            VoxelIndex n{cur.x + nb.offset[k][0], cur.y + nb.offset[k][1], cur.z + nb.offset[k][2]};
            if (!mask.in_bounds(n)) continue;
            std::size_t nf = mask.flat(n);
            if (mask.data[nf] == 0.0) continue;
            double cand = d + nb.length_mm[k];
            if (cand < out.dist[nf]) {
                out.dist[nf] = cand;
                out.parent[nf] = f;
                heap.emplace(cand, std::int64_t(nf));
            }
        }
    }
    return out;
}

/// Dijkstra over foreground voxels where relaxing an edge (u,v) adds the
/// vertex weight w(v); the source additionally pays w(s). Optionally scales
/// the added weight by step length / min spacing. Equal-cost predecessors are
/// resolved toward the smaller row-major index so paths are reproducible.
inline GeodesicField vertex_weight_dijkstra(const Volume3D& mask, const std::vector<double>& weight,
                                            const VoxelIndex& source, bool euclidean_edge_scale) {
    if (!mask.in_bounds(source) || !mask.is_foreground(source))
        throw ClkError("vertex_weight_dijkstra: source voxel is background or out of bounds");
    Neighborhood nb = Neighborhood::make(mask.spacing());
    double min_sp = mask.min_spacing();

    GeodesicField out;
    out.dist.assign(mask.size(), kInf);
    out.parent.assign(mask.size(), -1);

    std::size_t sf = mask.flat(source);
    out.dist[sf] = weight[sf];
    detail::MinHeap heap;
    heap.emplace(out.dist[sf], std::int64_t(sf));

    while (!heap.empty()) {
        auto [d, f] = heap.top();
        heap.pop();
        if (d != out.dist[f]) continue;
        VoxelIndex cur = mask.unflat(std::size_t(f));
        for (int k = 0; k < nb.count; ++k) {
            VoxelIndex n{cur.x + nb.offset[k][0], cur.y + nb.offset[k][1], cur.z + nb.offset[k][2]};
            if (!mask.in_bounds(n)) continue;
            std::size_t nf = mask.flat(n);
            if (mask.data[nf] == 0.0) continue;
            double step = euclidean_edge_scale ? nb.length_mm[k] / min_sp : 1.0;
            double cand = d + weight[nf] * step;
            if (cand < out.dist[nf]) {
                out.dist[nf] = cand;
                out.parent[nf] = f;
                heap.emplace(cand, std::int64_t(nf));
            } else if (cand == out.dist[nf] && f < out.parent[nf]) {
                out.parent[nf] = f;  // deterministic tie-break
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Nearest-point lookup over a fixed cloud (bucket grid with ring search).
// ---------------------------------------------------------------------------

class PointLocator {
public:
    /// Builds buckets covering the axis-aligned box [lo, hi].
    PointLocator(const std::vector<PointMM>& points, PointMM lo, PointMM hi, double cell_size)
        : points_(points), lo_(lo), cell_(cell_size) {
        if (points.empty()) throw ClkError("PointLocator: empty point set");
        nx_ = std::max(1, int(std::ceil((hi.x - lo.x) / cell_)) + 1);
        ny_ = std::max(1, int(std::ceil((hi.y - lo.y) / cell_)) + 1);
        nz_ = std::max(1, int(std::ceil((hi.z - lo.z) / cell_)) + 1);
        buckets_.assign(std::size_t(nx_) * ny_ * nz_, {});
        for (std::size_t i = 0; i < points.size(); ++i)
            buckets_[bucket_of(points[i])].push_back(int(i));
    }

    struct Hit {
        int index = -1;
        double dist = kInf;
    };

    /// Exact nearest point; ties resolved toward the lowest point index.
    /// Query must lie inside (or near) the box the locator was built over.
    Hit nearest(const PointMM& q) const {
        int cx, cy, cz;
        cell_coords(q, cx, cy, cz);
        Hit best;
        int max_ring = std::max({nx_, ny_, nz_});
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (best.index >= 0 && double(ring - 1) * cell_ > best.dist) break;
            scan_ring(q, cx, cy, cz, ring, best);
        }
        return best;
    }

private:
    std::size_t bucket_of(const PointMM& p) const {
        int x, y, z;
        cell_coords(p, x, y, z);
        return (std::size_t(z) * ny_ + y) * nx_ + x;
    }

    void cell_coords(const PointMM& p, int& x, int& y, int& z) const {
        x = std::clamp(int((p.x - lo_.x) / cell_), 0, nx_ - 1);
        y = std::clamp(int((p.y - lo_.y) / cell_), 0, ny_ - 1);
        z = std::clamp(int((p.z - lo_.z) / cell_), 0, nz_ - 1);
    }

    void scan_cell(const PointMM& q, int x, int y, int z, Hit& best) const {
        if (x < 0 || x >= nx_ || y < 0 || y >= ny_ || z < 0 || z >= nz_) return;
        for (int idx : buckets_[(std::size_t(z) * ny_ + y) * nx_ + x]) {
            double d = distance(points_[idx], q);
            if (d < best.dist || (d == best.dist && idx < best.index)) {
                best.dist = d;
                best.index = idx;
            }
        }
    }

    void scan_ring(const PointMM& q, int cx, int cy, int cz, int ring, Hit& best) const {
        if (ring == 0) {
            scan_cell(q, cx, cy, cz, best);
            return;
        }
        for (int z = cz - ring; z <= cz + ring; ++z)
            for (int y = cy - ring; y <= cy + ring; ++y)
                for (int x = cx - ring; x <= cx + ring; ++x) {
                    int cheb = std::max({std::abs(x - cx), std::abs(y - cy), std::abs(z - cz)});
                    if (cheb != ring) continue;
                    scan_cell(q, x, y, z, best);
                }
    }

    const std::vector<PointMM>& points_;
    PointMM lo_;
    double cell_;
    int nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<std::vector<int>> buckets_;
};

/// Locator over an owned copy of the points.
class OwningPointLocator {
public:
    OwningPointLocator(std::vector<PointMM> points, PointMM lo, PointMM hi, double cell_size)
        : points_(std::move(points)), locator_(points_, lo, hi, cell_size) {}

    PointLocator::Hit nearest(const PointMM& q) const { return locator_.nearest(q); }
    const std::vector<PointMM>& points() const { return points_; }

private:
    std::vector<PointMM> points_;
    PointLocator locator_;
};

}  // namespace clk
