#pragma once

#include "clk/centerline.hpp"
#include "clk/graph.hpp"
#include "clk/volume.hpp"

namespace clk {

// ---------------------------------------------------------------------------
// Exact Euclidean distance transform (separable lower-envelope passes).
// ---------------------------------------------------------------------------

namespace detail {

/// 1-D squared distance transform along one axis: out[i] = min_j (f[j] +
/// ((i-j)*h)^2). Sites with f = inf are skipped.
inline void edt_pass_1d(const double* f, double* out, int n, double h) {
    static thread_local std::vector<int> site;
    static thread_local std::vector<double> boundary;
    site.assign(std::size_t(n) + 1, 0);
    boundary.assign(std::size_t(n) + 1, 0.0);

    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        double xq = q * h;
        while (k >= 0) {
            double xp = site[k] * h;
            double s = ((f[q] + xq * xq) - (f[site[k]] + xp * xp)) / (2.0 * (xq - xp));
            if (k >= 1 && s <= boundary[k]) {
                --k;
            } else {
                ++k;
                site[k] = q;
                boundary[k] = s;
                break;
            }
        }
        if (k < 0) {
            k = 0;
            site[0] = q;
            boundary[0] = -kInf;
        }
    }
    if (k < 0) {
        for (int i = 0; i < n; ++i) out[i] = kInf;
        return;
    }
    int j = 0;
    for (int i = 0; i < n; ++i) {
        double xi = i * h;
        while (j < k && boundary[j + 1] < xi) ++j;
        double d = xi - site[j] * h;
        out[i] = f[site[j]] + d * d;
    }
}

}  // namespace detail

/// Exact EDT of a mask: for every foreground voxel the distance in mm to the
/// nearest background voxel center; 0 on background. Throws when the mask has
/// no background voxel at all.
inline Volume3D edt_exact(const Volume3D& mask, int threads = 1) {
    detail::require_mask(mask, "edt_exact");
    std::size_t bg = mask.size() - mask.count_foreground();
    if (bg == 0) throw ClkError("edt_exact: mask is all foreground, no background reference");

    const int nx = mask.nx(), ny = mask.ny(), nz = mask.nz();
    const auto sp = mask.spacing();
    Volume3D sq(nx, ny, nz, sp, mask.origin(), VolumeRole::Map, 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i) sq.data[i] = mask.data[i] != 0.0 ? kInf : 0.0;

    // x pass
    parallel_for(std::size_t(ny) * nz, threads, [&](std::size_t row) {
        int y = int(row % ny), z = int(row / ny);
        std::vector<double> in(nx), out(nx);
        for (int x = 0; x < nx; ++x) in[x] = sq.at(x, y, z);
        detail::edt_pass_1d(in.data(), out.data(), nx, sp[0]);
        for (int x = 0; x < nx; ++x) sq.at(x, y, z) = out[x];
    });
    // y pass
    parallel_for(std::size_t(nx) * nz, threads, [&](std::size_t row) {
        int x = int(row % nx), z = int(row / nx);
        std::vector<double> in(ny), out(ny);
        for (int y = 0; y < ny; ++y) in[y] = sq.at(x, y, z);
        detail::edt_pass_1d(in.data(), out.data(), ny, sp[1]);
        for (int y = 0; y < ny; ++y) sq.at(x, y, z) = out[y];
    });
    // z pass
    parallel_for(std::size_t(nx) * ny, threads, [&](std::size_t row) {
        int x = int(row % nx), y = int(row / nx);
        std::vector<double> in(nz), out(nz);
        for (int z = 0; z < nz; ++z) in[z] = sq.at(x, y, z);
        detail::edt_pass_1d(in.data(), out.data(), nz, sp[2]);
        for (int z = 0; z < nz; ++z) sq.at(x, y, z) = out[z];
    });

    for (double& v : sq.data) v = std::sqrt(v);
    return sq;
}

// ---------------------------------------------------------------------------
// Locally normalized centerline distance map and its log transform.
// ---------------------------------------------------------------------------

struct DistanceMaps {
    Volume3D edt;      // mm, distance to nearest background voxel center
    Volume3D cl_dist;  // dimensionless, distance to centerline / local radius
    Volume3D cl_log;   // log(cl_dist + delta)
};

/// Builds the reference centerline distance maps. Each foreground voxel is
/// assigned to its nearest centerline sample p; the normalizer is the EDT
/// value of the voxel containing p (the local tube radius). Nearest-sample
/// ties resolve to the lowest segment id, then the earliest sample. On the
/// background cl_dist carries 1.0 and cl_log its neutral ceiling log(1+delta).
inline DistanceMaps reference_cl_distance(const Volume3D& mask, const Centerline& centerline,
                                          double delta) {
    detail::require_mask(mask, "reference_cl_distance");
    if (!(delta > 0.0)) throw ClkError("reference_cl_distance: delta must be > 0");
    if (centerline.empty()) throw ClkError("reference_cl_distance: empty centerline");

    std::vector<PointMM> samples;
    std::vector<std::size_t> host_voxel;
    for (std::size_t si = 0; si < centerline.segments.size(); ++si) {
        for (const auto& p : centerline.segments[si].points) {
            VoxelIndex v = mask.containing_voxel(p);
            PointMM c = mask.index_to_mm(v);
            if (distance(c, p) > 0.5 * mask.voxel_diagonal() + 1e-9 || !mask.is_foreground(v))
                throw ClkError("reference_cl_distance: centerline sample (" + std::to_string(p.x) +
                               "," + std::to_string(p.y) + "," + std::to_string(p.z) +
                               ") in segment " + std::to_string(si) + " lies outside the mask foreground");
            samples.push_back(p);
            host_voxel.push_back(mask.flat(v));
        }
    }

    DistanceMaps out;
    out.edt = edt_exact(mask);
    out.cl_dist = Volume3D(mask.nx(), mask.ny(), mask.nz(), mask.spacing(), mask.origin(),
                           VolumeRole::Map, 1.0);
    out.cl_log = Volume3D(mask.nx(), mask.ny(), mask.nz(), mask.spacing(), mask.origin(),
                          VolumeRole::Map, std::log(1.0 + delta));

    PointMM lo = mask.index_to_mm({0, 0, 0});
    PointMM hi = mask.index_to_mm({mask.nx() - 1, mask.ny() - 1, mask.nz() - 1});
    PointLocator locator(samples, lo, hi, 2.0 * mask.max_spacing());

    for (std::size_t f = 0; f < mask.size(); ++f) {
        if (mask.data[f] == 0.0) continue;
        PointMM c = mask.index_to_mm(mask.unflat(f));
        auto hit = locator.nearest(c);
        double local_radius = out.edt.data[host_voxel[hit.index]];
        double d = hit.dist / local_radius;
        out.cl_dist.data[f] = d;
        out.cl_log.data[f] = std::log(d + delta);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Baseline cost map: sum of three sigmoid contrast windows over the EDT.
// ---------------------------------------------------------------------------

struct SigmoidParams {
    // (alpha, beta) = width and level of each contrast window, mm.
    std::array<std::pair<double, double>, 3> windows{
        {{0.15, 0.3}, {0.3, 0.8}, {0.6, 1.8}}};

    void validate() const {
        for (const auto& [a, b] : windows)
            if (!(a > 0.0)) throw ClkError("SigmoidParams: alpha must be > 0");
        if (!(windows[0].second < windows[1].second && windows[1].second < windows[2].second))
            throw ClkError("SigmoidParams: betas must be strictly increasing");
    }
};

inline Volume3D baseline_sigmoid_map(const Volume3D& edt, const SigmoidParams& params) {
    params.validate();
    Volume3D out(edt.nx(), edt.ny(), edt.nz(), edt.spacing(), edt.origin(), VolumeRole::Map, 0.0);
    for (std::size_t i = 0; i < edt.size(); ++i) {
        double e = edt.data[i];
        double v = 0.0;
        for (const auto& [alpha, beta] : params.windows) v += 1.0 / (1.0 + std::exp(-(e - beta) / alpha));
        out.data[i] = v;
    }
    return out;
}

}  // namespace clk
