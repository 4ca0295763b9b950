#include "cosmowave/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cosmowave/spectral.hpp"

namespace cosmowave {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fourth-order centred first derivative along `axis`.
void diff4(const TorusGrid& g, const double* f, double* out, int axis) {
    const int n = g.n;
    const double s = 1.0 / (12.0 * g.spacing());
    auto wrap = [n](int i) { return (i % n + n) % n; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                auto at = [&](int d) {
                    int ii = i, jj = j, kk = k;
                    if (axis == 0) ii = wrap(i + d);
                    else if (axis == 1) jj = wrap(j + d);
                    else kk = wrap(k + d);
                    return f[g.index(ii, jj, kk)];
                };
                out[g.index(i, j, k)] = s * (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2));
            }
}

// component index of (i, j) in xx, xy, xz, yy, yz, zz
constexpr int sym(int i, int j) {
    constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return table[i][j];
}

std::vector<FourierTerm> terms_from_json(const json& arr) {
    std::vector<FourierTerm> out;
    for (const auto& e : arr) {
        FourierTerm t;
        const auto& k = e.at("k");
        if (!k.is_array() || k.size() != 3) throw Error(ErrorCode::ConfigInvalid, "Fourier term k must have 3 entries");
        t.k = {k[0].get<int>(), k[1].get<int>(), k[2].get<int>()};
        t.c = e.value("c", 0.0);
        t.s = e.value("s", 0.0);
        out.push_back(t);
    }
    return out;
}

json terms_to_json(const std::vector<FourierTerm>& terms) {
    json arr = json::array();
    for (const auto& t : terms) arr.push_back({{"k", t.k}, {"c", t.c}, {"s", t.s}});
    return arr;
}

}  // namespace

TorusGrid TorusGrid::make(int n, double L) {
    if (n < 4 || (n & (n - 1)) != 0) throw Error(ErrorCode::InvalidArgument, "grid size must be a power of two >= 4");
    if (n > 256) throw Error(ErrorCode::InvalidArgument, "grid size above 256 exceeds the memory budget");
    if (!(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
    return TorusGrid{n, L};
}

double TorusGrid::wave_scale() const noexcept { return (kTwoPi / L) * (kTwoPi / L); }

Field::Field(TorusGrid grid, double value) : grid_(grid), values_(grid.size(), value) {}

Field::Field(TorusGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw Error(ErrorCode::GridMismatch, "value count does not match grid");
}

double Field::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::min_abs() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::min(m, std::abs(v));
    return m;
}

bool Field::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

Field& Field::operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
    if (!(a == b)) {
        throw Error(ErrorCode::GridMismatch, "grids differ (n = " + std::to_string(a.n) + " vs " +
                                                 std::to_string(b.n) + ")");
    }
}

Field fourier_series(const TorusGrid& grid, const std::vector<FourierTerm>& terms) {
    return sample(grid, [&](double x, double y, double z) {
        double v = 0.0;
        for (const auto& t : terms) {
            const double arg = kTwoPi * (t.k[0] * x + t.k[1] * y + t.k[2] * z) / grid.L;
            v += t.c * std::cos(arg) + t.s * std::sin(arg);
        }
        return v;
    });
}

// ---------------------------------------------------------------------------

SpatialMetric SpatialMetric::flat(TorusGrid grid) {
    SpatialMetric m;
    m.kind_ = MetricKind::Flat;
    m.grid_ = grid;
    m.volume_ = grid.flat_volume();
    m.max_inv_eig_ = 1.0;
    return m;
}

SpatialMetric SpatialMetric::conformal(const Field& phi) {
    if (!phi.all_finite()) throw Error(ErrorCode::InvalidArgument, "conformal factor must be finite");
    SpatialMetric m;
    m.kind_ = MetricKind::Conformal;
    m.grid_ = phi.grid();
    const std::size_t N = phi.size();
    m.sqrt_det_.resize(N);
    for (auto& c : m.inv_) c.assign(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        m.sqrt_det_[i] = std::exp(3.0 * phi[i]);
        const double w = std::exp(-2.0 * phi[i]);
        m.inv_[0][i] = m.inv_[3][i] = m.inv_[5][i] = w;
    }
    m.finish();
    return m;
}

SpatialMetric SpatialMetric::general(const std::array<Field, 6>& g) {
    SpatialMetric m;
    m.kind_ = MetricKind::General;
    m.grid_ = g[0].grid();
    for (const auto& c : g) require_same_grid(m.grid_, c.grid());
    const std::size_t N = m.grid_.size();
    m.sqrt_det_.resize(N);
    for (auto& c : m.inv_) c.assign(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const double xx = g[0][i], xy = g[1][i], xz = g[2][i], yy = g[3][i], yz = g[4][i], zz = g[5][i];
        // Sylvester: leading principal minors positive.
        const double m2 = xx * yy - xy * xy;
        const double det = xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz);
        if (!(xx > 0.0 && m2 > 0.0 && det > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "metric is not positive definite at grid point " + std::to_string(i));
        }
        m.sqrt_det_[i] = std::sqrt(det);
        const double inv = 1.0 / det;
        m.inv_[0][i] = (yy * zz - yz * yz) * inv;
        m.inv_[1][i] = (xz * yz - xy * zz) * inv;
        m.inv_[2][i] = (xy * yz - xz * yy) * inv;
        m.inv_[3][i] = (xx * zz - xz * xz) * inv;
        m.inv_[4][i] = (xy * xz - xx * yz) * inv;
        m.inv_[5][i] = (xx * yy - xy * xy) * inv;
    }
    m.finish();
    return m;
}

void SpatialMetric::finish() {
    const double h3 = std::pow(grid_.spacing(), 3);
    volume_ = 0.0;
    max_inv_eig_ = 0.0;
    for (std::size_t i = 0; i < sqrt_det_.size(); ++i) {
        volume_ += sqrt_det_[i] * h3;
        // Gershgorin bound on the largest eigenvalue
        const auto q = inverse(i);
        const double r0 = q[0] + std::abs(q[1]) + std::abs(q[2]);
        const double r1 = q[3] + std::abs(q[1]) + std::abs(q[4]);
        const double r2 = q[5] + std::abs(q[2]) + std::abs(q[4]);
        max_inv_eig_ = std::max({max_inv_eig_, r0, r1, r2});
    }
}

std::array<double, 6> SpatialMetric::inverse(std::size_t i) const noexcept {
    if (kind_ == MetricKind::Flat) return {1.0, 0.0, 0.0, 1.0, 0.0, 1.0};
    return {inv_[0][i], inv_[1][i], inv_[2][i], inv_[3][i], inv_[4][i], inv_[5][i]};
}

// ---------------------------------------------------------------------------

Field laplace_beltrami(const SpatialMetric& g, const Field& f) {
    require_same_grid(g.grid(), f.grid());
    const TorusGrid& grid = f.grid();
    if (g.is_flat()) {
        Spectrum s = Spectrum::forward(f);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] *= -s.eigenvalue(i);
        return s.inverse();
    }
    const std::size_t N = grid.size();
    std::array<std::vector<double>, 3> grad;
    for (int a = 0; a < 3; ++a) {
        grad[a].resize(N);
        diff4(grid, f.data(), grad[a].data(), a);
    }
    std::array<std::vector<double>, 3> flux;
    for (auto& v : flux) v.resize(N);
    for (std::size_t p = 0; p < N; ++p) {
        const auto q = g.inverse(p);
        const double sg = g.sqrt_det(p);
        for (int a = 0; a < 3; ++a) {
            flux[a][p] = sg * (q[sym(a, 0)] * grad[0][p] + q[sym(a, 1)] * grad[1][p] + q[sym(a, 2)] * grad[2][p]);
        }
    }
    Field out(grid);
    std::vector<double> tmp(N);
    for (int a = 0; a < 3; ++a) {
        diff4(grid, flux[a].data(), tmp.data(), a);
        for (std::size_t p = 0; p < N; ++p) out[p] += tmp[p];
    }
    for (std::size_t p = 0; p < N; ++p) out[p] /= g.sqrt_det(p);
    return out;
}

Field laplace_power(const SpatialMetric& g, const Field& f, int N) {
    if (N < 0) throw Error(ErrorCode::InvalidArgument, "Laplacian power must be nonnegative");
    Field out = f;
    for (int i = 0; i < N; ++i) out = laplace_beltrami(g, out);
    return out;
}

double integrate(const SpatialMetric& g, const Field& f) {
    require_same_grid(g.grid(), f.grid());
    double sum = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) sum += f[p] * g.sqrt_det(p);
    return sum * std::pow(f.grid().spacing(), 3);
}

double inner_product(const SpatialMetric& g, const Field& f1, const Field& f2) {
    require_same_grid(f1.grid(), f2.grid());
    require_same_grid(g.grid(), f1.grid());
    double sum = 0.0;
    for (std::size_t p = 0; p < f1.size(); ++p) sum += f1[p] * f2[p] * g.sqrt_det(p);
    return sum * std::pow(f1.grid().spacing(), 3);
}

double gradient_norm_sq(const SpatialMetric& g, const Field& f) {
    require_same_grid(g.grid(), f.grid());
    if (g.is_flat()) {
        return Spectrum::forward(f).weighted_norm_sq([](double lambda) { return lambda; });
    }
    const TorusGrid& grid = f.grid();
    const std::size_t N = grid.size();
    std::array<std::vector<double>, 3> grad;
    for (int a = 0; a < 3; ++a) {
        grad[a].resize(N);
        diff4(grid, f.data(), grad[a].data(), a);
    }
    double sum = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
        const auto q = g.inverse(p);
        double v = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) v += q[sym(a, b)] * grad[a][p] * grad[b][p];
        sum += v * g.sqrt_det(p);
    }
    return sum * std::pow(grid.spacing(), 3);
}

// ---------------------------------------------------------------------------

double sobolev_constant_K(const SpatialMetric& g, const TorusGrid& grid, double radius) {
    if (!g.is_flat()) {
        throw Error(ErrorCode::UnsupportedMetric, "embedding constants are only computed for the flat torus");
    }
    const double R = radius > 0.0 ? radius : std::max(grid.n / 2.0, 256.0);
    const double scale = grid.wave_scale();
    const int kmax = static_cast<int>(std::floor(R));
    const double R2 = R * R;
    // Sum over the positive octant with multiplicities 2^{#nonzero}.
    double sum = 0.0;
    for (int a = 0; a <= kmax; ++a) {
        for (int b = 0; b <= kmax; ++b) {
            const double ab = static_cast<double>(a) * a + static_cast<double>(b) * b;
            if (ab > R2) break;
            const double mult_ab = (a ? 2.0 : 1.0) * (b ? 2.0 : 1.0);
            double row = 0.0;
            for (int c = 0; c <= kmax; ++c) {
                const double k2 = ab + static_cast<double>(c) * c;
                if (k2 > R2) break;
                const double lam = scale * k2;
                row += (c ? 2.0 : 1.0) / (1.0 + lam * lam);
            }
            sum += mult_ab * row;
        }
    }
    // Tail over |k| > R: 1/(1+lambda^2) < lambda^{-2} = (L/2pi)^4 |k|^{-4}, and
    // the lattice cubes of those k lie in |x| > R - sqrt(3)/2 with
    // |k|^{-4} <= (1 + sqrt(3)/(2R))^4 |x|^{-4}.
    const double s3 = std::sqrt(3.0) / 2.0;
    const double tail = std::pow(1.0 / scale, 2) * std::pow(1.0 + s3 / R, 4) * 4.0 * std::numbers::pi / (R - s3);
    return std::sqrt((sum + tail) / grid.flat_volume());
}

double elliptic_constant_C(const SpatialMetric& g, const TorusGrid& grid, double radius) {
    return sobolev_constant_K(g, grid, radius);
}

// ---------------------------------------------------------------------------

SpatialMetric metric_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("metric file: ") + e.what());
    }
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const TorusGrid grid = TorusGrid::make(j.at("n").get<int>(), j.value("L", 1.0));
        if (kind == "flat") return SpatialMetric::flat(grid);
        if (kind == "conformal") {
            auto terms = terms_from_json(j.at("phi_coeffs"));
            SpatialMetric m = SpatialMetric::conformal(fourier_series(grid, terms));
            m.set_phi_terms(std::move(terms));
            return m;
        }
        if (kind == "general") {
            static const char* names[6] = {"xx", "xy", "xz", "yy", "yz", "zz"};
            std::array<Field, 6> comps;
            for (int c = 0; c < 6; ++c) comps[c] = fourier_series(grid, terms_from_json(j.at("g").at(names[c])));
            return SpatialMetric::general(comps);
        }
        throw Error(ErrorCode::ConfigInvalid, "metric kind must be flat, conformal or general, got " + kind);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("metric file: ") + e.what());
    }
}

SpatialMetric load_metric(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open metric file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return metric_from_json_text(ss.str());
}

std::string metric_to_json_text(const SpatialMetric& g) {
    json j;
    j["n"] = g.grid().n;
    j["L"] = g.grid().L;
    switch (g.kind()) {
        case MetricKind::Flat: j["kind"] = "flat"; break;
        case MetricKind::Conformal:
            j["kind"] = "conformal";
            j["phi_coeffs"] = terms_to_json(g.phi_terms());
            break;
        case MetricKind::General:
            throw Error(ErrorCode::UnsupportedMetric, "general metrics are not serialised");
    }
    return j.dump(2);
}

}  // namespace cosmowave
