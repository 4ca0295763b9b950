#include "cosmowave/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cosmowave/report.hpp"

namespace cosmowave {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

namespace {

std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_doubles(const fs::path& path, const std::vector<const std::vector<double>*>& parts, std::uint64_t& sum) {
    std::vector<double> all;
    for (const auto* p : parts) all.insert(all.end(), p->begin(), p->end());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(all.data()), static_cast<std::streamsize>(all.size() * sizeof(double)));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
    sum = checksum(all.data(), all.size() * sizeof(double));
}

json parse_file(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
    }
}

json cosmology_json(const Cosmology& c) {
    return {{"type", c.spatial_type == SpatialType::Type0 ? 0 : -1}, {"gamma", c.gamma}, {"B", c.B}};
}

}  // namespace

Background BackgroundSpec::build() const { return Background::make(cosmology, t_seed, t_max, tol); }

std::uint64_t checksum(const void* data, std::size_t bytes) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_snapshot(const fs::path& stem, const FieldState& s) {
    std::uint64_t sum = 0;
    fs::path bin = stem;
    bin += ".bin";
    write_doubles(bin, {&s.psi.values(), &s.psi_dot.values()}, sum);
    const TorusGrid& g = s.psi.grid();
    json j = {{"t", s.t}, {"n", g.n}, {"L", g.L}, {"checksum", hex(sum)}, {"fields", {"psi", "psi_dot"}}};
    fs::path side = stem;
    side += ".json";
    write_text(side, j.dump(2) + "\n");
}

FieldState read_snapshot(const fs::path& stem, std::shared_ptr<const SpatialMetric> metric, const Background& bg) {
    fs::path side = stem;
    side += ".json";
    const json j = parse_file(side);
    double t = 0.0;
    TorusGrid grid;
    std::string expected;
    try {
        t = j.at("t").get<double>();
        grid = TorusGrid::make(j.at("n").get<int>(), j.at("L").get<double>());
        expected = j.at("checksum").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, side.string() + ": " + e.what());
    }
    fs::path bin = stem;
    bin += ".bin";
    const std::string raw = read_text(bin);
    const std::size_t N = grid.size();
    if (raw.size() != 2 * N * sizeof(double)) throw Error(ErrorCode::IoError, bin.string() + ": unexpected size");
    if (hex(checksum(raw.data(), raw.size())) != expected) {
        throw Error(ErrorCode::IoError, bin.string() + ": checksum mismatch");
    }
    std::vector<double> psi(N), psi_dot(N);
    std::memcpy(psi.data(), raw.data(), N * sizeof(double));
    std::memcpy(psi_dot.data(), raw.data() + N * sizeof(double), N * sizeof(double));
    if (metric) require_same_grid(metric->grid(), grid);
    return FieldState{t, Field(grid, std::move(psi)), Field(grid, std::move(psi_dot)), std::move(metric), bg};
}

void write_trajectory(const fs::path& dir, const std::vector<FieldState>& traj, const BackgroundSpec& spec) {
    if (traj.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    json snaps = json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%04zu", i);
        write_snapshot(dir / name, traj[i]);
        snaps.push_back(name);
    }
    json j;
    j["cosmology"] = cosmology_json(spec.cosmology);
    j["background"] = {{"t_seed", spec.t_seed}, {"t_max", spec.t_max}, {"tol", spec.tol}};
    j["metric"] = json::parse(metric_to_json_text(*traj.front().metric));
    j["snapshots"] = snaps;
    write_text(dir / "trajectory.json", j.dump(2) + "\n");
}

LoadedTrajectory read_trajectory(const fs::path& dir) {
    const json j = parse_file(dir / "trajectory.json");
    LoadedTrajectory out;
    std::shared_ptr<const SpatialMetric> metric;
    try {
        const json& c = j.at("cosmology");
        const int type = c.at("type").get<int>();
        if (type != 0 && type != -1) throw Error(ErrorCode::IoError, "spatial type must be 0 or -1");
        out.spec.cosmology = Cosmology::make(type == 0 ? SpatialType::Type0 : SpatialType::TypeMinus1,
                                             c.at("gamma").get<double>(), c.at("B").get<double>());
        const json& b = j.at("background");
        out.spec.t_seed = b.at("t_seed").get<double>();
        out.spec.t_max = b.at("t_max").get<double>();
        out.spec.tol = b.at("tol").get<double>();
        metric = std::make_shared<const SpatialMetric>(metric_from_json_text(j.at("metric").dump()));
        const Background bg = out.spec.build();
        for (const auto& name : j.at("snapshots")) {
            out.states.push_back(read_snapshot(dir / name.get<std::string>(), metric, bg));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, (dir / "trajectory.json").string() + ": " + e.what());
    }
    if (out.states.empty()) throw Error(ErrorCode::IoError, dir.string() + ": no snapshots");
    return out;
}

void write_profile(const fs::path& stem, const BlowupProfile& p, const SpatialMetric& g) {
    std::vector<const std::vector<double>*> parts;
    for (const auto& f : p.A_laplacians) parts.push_back(&f.values());
    std::uint64_t sum = 0;
    fs::path bin = stem;
    bin += ".bin";
    write_doubles(bin, parts, sum);
    json j = profile_json(p, g);
    j["n"] = p.A.grid().n;
    j["L"] = p.A.grid().L;
    j["checksum"] = hex(sum);
    fs::path side = stem;
    side += ".json";
    write_text(side, j.dump(2) + "\n");
}

}  // namespace cosmowave
