#pragma once

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "clk/common.hpp"

namespace clk {

enum class VolumeRole { Mask, Map };

inline const char* role_name(VolumeRole r) { return r == VolumeRole::Mask ? "mask" : "map"; }

enum class IoCode {
    FileOpen,
    MalformedHeader,
    InvalidDims,
    PayloadLengthMismatch,
    NonFiniteValue,
    BadMaskValue,
};

class VolumeIoError : public ClkError {
public:
    VolumeIoError(IoCode code, const std::string& what) : ClkError(what), code_(code) {}
    IoCode code() const { return code_; }

private:
    IoCode code_;
};

/// Dense scalar field over an axis-aligned voxel grid. data is row-major
/// with x fastest, z slowest. Physical positions refer to voxel centers:
/// center(i) = origin + i * spacing. Treated as immutable once built.
class Volume3D {
public:
    Volume3D() = default;

    Volume3D(int nx, int ny, int nz, std::array<double, 3> spacing,
             std::array<double, 3> origin, VolumeRole role, double fill = 0.0)
        : nx_(nx), ny_(ny), nz_(nz), spacing_(spacing), origin_(origin), role_(role) {
        if (nx <= 0 || ny <= 0 || nz <= 0)
            throw VolumeIoError(IoCode::InvalidDims, "volume dims must be positive");
        for (double s : spacing)
            if (!(s > 0.0)) throw VolumeIoError(IoCode::InvalidDims, "volume spacing must be positive");
        data.assign(std::size_t(nx) * ny * nz, fill);
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    std::size_t size() const { return data.size(); }
    const std::array<double, 3>& spacing() const { return spacing_; }
    const std::array<double, 3>& origin() const { return origin_; }
    VolumeRole role() const { return role_; }
    void set_role(VolumeRole r) { role_ = r; }

    double min_spacing() const { return std::min({spacing_[0], spacing_[1], spacing_[2]}); }
    double max_spacing() const { return std::max({spacing_[0], spacing_[1], spacing_[2]}); }
    /// Length of a full voxel body diagonal.
    double voxel_diagonal() const {
        return std::sqrt(spacing_[0] * spacing_[0] + spacing_[1] * spacing_[1] +
                         spacing_[2] * spacing_[2]);
    }

    std::size_t flat(int x, int y, int z) const {
        return (std::size_t(z) * ny_ + y) * nx_ + x;
    }
    std::size_t flat(const VoxelIndex& i) const { return flat(i.x, i.y, i.z); }

    VoxelIndex unflat(std::size_t f) const {
        int x = int(f % nx_);
        int y = int((f / nx_) % ny_);
        int z = int(f / (std::size_t(nx_) * ny_));
        return {x, y, z};
    }

    bool in_bounds(const VoxelIndex& i) const {
        return i.x >= 0 && i.x < nx_ && i.y >= 0 && i.y < ny_ && i.z >= 0 && i.z < nz_;
    }

    double& at(int x, int y, int z) { return data[flat(x, y, z)]; }
    double at(int x, int y, int z) const { return data[flat(x, y, z)]; }
    double& at(const VoxelIndex& i) { return data[flat(i)]; }
    double at(const VoxelIndex& i) const { return data[flat(i)]; }

    bool same_grid(const Volume3D& o) const {
        return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_ && spacing_ == o.spacing_ &&
               origin_ == o.origin_;
    }

    PointMM index_to_mm(const VoxelIndex& i) const {
        if (!in_bounds(i))
            throw ClkError("index_to_mm: voxel (" + std::to_string(i.x) + "," +
                           std::to_string(i.y) + "," + std::to_string(i.z) + ") out of bounds");
        return {origin_[0] + i.x * spacing_[0], origin_[1] + i.y * spacing_[1],
                origin_[2] + i.z * spacing_[2]};
    }

    /// Voxel whose center is nearest to p (round to grid, then clamp).
    VoxelIndex containing_voxel(const PointMM& p) const {
        auto snap = [](double v, double o, double s, int n) {
            int i = int(std::lround((v - o) / s));
            return std::clamp(i, 0, n - 1);
        };
        return {snap(p.x, origin_[0], spacing_[0], nx_), snap(p.y, origin_[1], spacing_[1], ny_),
                snap(p.z, origin_[2], spacing_[2], nz_)};
    }

    bool is_foreground(const VoxelIndex& i) const { return at(i) != 0.0; }

    std::size_t count_foreground() const {
        std::size_t n = 0;
        for (double v : data) n += (v != 0.0);
        return n;
    }

    std::vector<double> data;

private:
    int nx_ = 0, ny_ = 0, nz_ = 0;
    std::array<double, 3> spacing_{1.0, 1.0, 1.0};
    std::array<double, 3> origin_{0.0, 0.0, 0.0};
    VolumeRole role_ = VolumeRole::Map;
};

inline PointMM index_to_mm(const Volume3D& v, const VoxelIndex& i) { return v.index_to_mm(i); }

namespace detail {

inline void require_mask(const Volume3D& v, const char* who) {
    if (v.role() != VolumeRole::Mask)
        throw ClkError(std::string(who) + ": expected a mask-role volume");
    for (double d : v.data)
        if (d != 0.0 && d != 1.0)
            throw VolumeIoError(IoCode::BadMaskValue,
                                std::string(who) + ": mask contains values outside {0,1}");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// .v3j file format: one UTF-8 JSON header line terminated by '\n', followed
// by nx*ny*nz little-endian IEEE-754 float64 values, row-major (x fastest).
// ---------------------------------------------------------------------------

inline void write_volume(const Volume3D& v, const std::string& path) {
    nlohmann::ordered_json header;
    header["dims"] = {v.nx(), v.ny(), v.nz()};
    header["spacing"] = {v.spacing()[0], v.spacing()[1], v.spacing()[2]};
    header["origin"] = {v.origin()[0], v.origin()[1], v.origin()[2]};
    header["role"] = role_name(v.role());
    if (v.role() == VolumeRole::Map) {
        for (double d : v.data)
            if (!std::isfinite(d))
                throw VolumeIoError(IoCode::NonFiniteValue, path + ": refusing to write non-finite map value");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw VolumeIoError(IoCode::FileOpen, "cannot open for write: " + path);
    std::string line = header.dump();
    line.push_back('\n');
    out.write(line.data(), std::streamsize(line.size()));
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(v.data.data()),
              std::streamsize(v.data.size() * sizeof(double)));
    if (!out) throw VolumeIoError(IoCode::FileOpen, "write failed: " + path);
}

inline Volume3D read_volume(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw VolumeIoError(IoCode::FileOpen, "cannot open for read: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw VolumeIoError(IoCode::MalformedHeader, path + ": missing header line");

    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object() || !header.contains("dims") ||
        !header.contains("spacing") || !header.contains("origin") || !header.contains("role"))
        throw VolumeIoError(IoCode::MalformedHeader, path + ": malformed header");

    auto dims = header["dims"];
    auto spc = header["spacing"];
    auto org = header["origin"];
    if (!dims.is_array() || dims.size() != 3 || !spc.is_array() || spc.size() != 3 ||
        !org.is_array() || org.size() != 3 || !header["role"].is_string())
        throw VolumeIoError(IoCode::MalformedHeader, path + ": malformed header fields");

    long nx = dims[0].get<long>(), ny = dims[1].get<long>(), nz = dims[2].get<long>();
    if (nx <= 0 || ny <= 0 || nz <= 0)
        throw VolumeIoError(IoCode::InvalidDims, path + ": non-positive dims in header");
    std::array<double, 3> spacing{spc[0].get<double>(), spc[1].get<double>(), spc[2].get<double>()};
    for (double s : spacing)
        if (!(s > 0.0)) throw VolumeIoError(IoCode::InvalidDims, path + ": non-positive spacing");
    std::array<double, 3> origin{org[0].get<double>(), org[1].get<double>(), org[2].get<double>()};

    std::string role_str = header["role"].get<std::string>();
    VolumeRole role;
    if (role_str == "mask")
        role = VolumeRole::Mask;
    else if (role_str == "map")
        role = VolumeRole::Map;
    else
        throw VolumeIoError(IoCode::MalformedHeader, path + ": unknown role '" + role_str + "'");

    Volume3D v(int(nx), int(ny), int(nz), spacing, origin, role);
    std::size_t bytes = v.size() * sizeof(double);
    in.read(reinterpret_cast<char*>(v.data.data()), std::streamsize(bytes));
    if (std::size_t(in.gcount()) != bytes)
        throw VolumeIoError(IoCode::PayloadLengthMismatch,
                            path + ": payload shorter than dims imply (" +
                                std::to_string(in.gcount()) + " of " + std::to_string(bytes) +
                                " bytes)");

    if (role == VolumeRole::Map) {
        for (double d : v.data)
            if (!std::isfinite(d))
                throw VolumeIoError(IoCode::NonFiniteValue, path + ": non-finite value in map payload");
    } else {
        for (double d : v.data)
            if (d != 0.0 && d != 1.0)
                throw VolumeIoError(IoCode::BadMaskValue, path + ": mask value outside {0,1}");
    }
    return v;
}

// ---------------------------------------------------------------------------
// Connected components
// ---------------------------------------------------------------------------

struct ComponentLabels {
    Volume3D labels;  // map role; 0 = background, components numbered from 1
    int count = 0;
};

/// Labels 26- or 6-connected foreground components. Components are numbered
/// by their smallest row-major voxel index, so labeling is deterministic.
inline ComponentLabels connected_components(const Volume3D& mask, int connectivity) {
    detail::require_mask(mask, "connected_components");
    if (connectivity != 6 && connectivity != 26)
        throw ClkError("connected_components: connectivity must be 6 or 26");

    ComponentLabels out;
    out.labels = Volume3D(mask.nx(), mask.ny(), mask.nz(), mask.spacing(), mask.origin(),
                          VolumeRole::Map, 0.0);

    std::vector<std::array<int, 3>> offs;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                if (connectivity == 6 && std::abs(dx) + std::abs(dy) + std::abs(dz) != 1) continue;
                offs.push_back({dx, dy, dz});
            }

    std::deque<VoxelIndex> queue;
    for (std::size_t f = 0; f < mask.size(); ++f) {
        if (mask.data[f] == 0.0 || out.labels.data[f] != 0.0) continue;
        double label = double(++out.count);
        out.labels.data[f] = label;
        queue.push_back(mask.unflat(f));
        while (!queue.empty()) {
            VoxelIndex cur = queue.front();
            queue.pop_front();
            for (const auto& o : offs) {
                VoxelIndex n{cur.x + o[0], cur.y + o[1], cur.z + o[2]};
                if (!mask.in_bounds(n)) continue;
                std::size_t nf = mask.flat(n);
                if (mask.data[nf] == 0.0 || out.labels.data[nf] != 0.0) continue;
                out.labels.data[nf] = label;
                queue.push_back(n);
            }
        }
    }
    return out;
}

}  // namespace clk
