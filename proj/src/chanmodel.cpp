#include "cmixer/chanmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cmixer::chan {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kUnitNormTol = 1e-12;

void require_unit_direction(const Vec3& p) {
    const double norm = std::sqrt(dot(p, p));
    if (std::abs(norm - 1.0) > kUnitNormTol) {
        throw std::invalid_argument("direction vector must have unit norm, got " +
                                    std::to_string(norm));
    }
}

void require_paths(const std::vector<PathComponent>& paths) {
    if (paths.empty()) {
        throw std::invalid_argument("path list must be non-empty");
    }
}

}  // namespace

void validate(const ScenarioConfig& c) {
    if (c.n_t < 1 || c.n_c < 1) throw std::invalid_argument("n_t and n_c must be positive");
    if (c.path_count_min < 1 || c.path_count_max > 64 || c.path_count_min > c.path_count_max) {
        throw std::invalid_argument("path count range must lie within [1, 64]");
    }
    if (c.bandwidth <= 0.0) throw std::invalid_argument("bandwidth must be positive");
    if (c.f0 <= 0.0) throw std::invalid_argument("f0 must be positive");
    if (c.max_delay < 0.0) throw std::invalid_argument("max_delay must be non-negative");
    if (c.delay_profile_decay <= 0.0) {
        throw std::invalid_argument("delay_profile_decay must be positive");
    }
}

ArrayGeometry make_ula(int n_t, double spacing) {
    if (n_t < 1) throw std::invalid_argument("array needs at least one element");
    ArrayGeometry g;
    g.element_offsets.resize(n_t);
    for (int i = 0; i < n_t; ++i) {
        g.element_offsets[i] = {i * spacing, 0.0, 0.0};
    }
    return g;
}

CarrierGrid make_grid(double f0, double bandwidth, int n_c) {
    if (f0 <= 0.0) throw std::invalid_argument("f0 must be positive");
    if (n_c < 1) throw std::invalid_argument("grid needs at least one subcarrier");
    CarrierGrid grid;
    grid.f0 = f0;
    grid.offsets.resize(n_c);
    for (int i = 0; i < n_c; ++i) {
        grid.offsets[i] = i * (bandwidth / n_c);
    }
    return grid;
}

std::vector<cdouble> array_response(const ArrayGeometry& geometry, const Vec3& direction,
                                    double f) {
    require_unit_direction(direction);
    if (f <= 0.0) throw std::invalid_argument("frequency must be positive");
    if (geometry.element_offsets.empty()) {
        throw std::invalid_argument("array geometry is empty");
    }
    std::vector<cdouble> a(geometry.size());
    for (std::size_t i = 0; i < geometry.size(); ++i) {
        const double shift = dot(geometry.element_offsets[i], direction);
        a[i] = std::polar(1.0, -kTwoPi * f * shift / kSpeedOfLight);
    }
    return a;
}

std::vector<cdouble> channel_vector(const std::vector<PathComponent>& paths,
                                    const ArrayGeometry& geometry, double f) {
    require_paths(paths);
    std::vector<cdouble> h(geometry.size(), cdouble{0.0, 0.0});
    for (const PathComponent& p : paths) {
        const cdouble gain = p.alpha * std::polar(1.0, -kTwoPi * f * p.tau);
        const std::vector<cdouble> a = array_response(geometry, p.direction, f);
        for (std::size_t i = 0; i < h.size(); ++i) {
            h[i] += gain * a[i];
        }
    }
    return h;
}

CsiMatrix assemble_csi(const std::vector<PathComponent>& paths, const ArrayGeometry& geometry,
                       const CarrierGrid& grid) {
    require_paths(paths);
    if (grid.offsets.empty()) throw std::invalid_argument("carrier grid is empty");
    CsiMatrix H(static_cast<int>(geometry.size()), static_cast<int>(grid.size()));
    for (int c = 0; c < H.n_c; ++c) {
        const std::vector<cdouble> h = channel_vector(paths, geometry, grid.f0 + grid.offsets[c]);
        for (int t = 0; t < H.n_t; ++t) {
            H.at(t, c) = h[t];
        }
    }
    return H;
}

cdouble q_h(const std::vector<PathComponent>& paths, double f0, const Vec3& d, double delta_f) {
    require_paths(paths);
    cdouble sum{0.0, 0.0};
    for (const PathComponent& p : paths) {
        const double shift = dot(d, p.direction);
        const double phase = kTwoPi * f0 * shift / kSpeedOfLight + kTwoPi * delta_f * p.tau +
                             kTwoPi * delta_f * shift / kSpeedOfLight;
        sum += p.alpha * std::polar(1.0, -kTwoPi * f0 * p.tau) * std::polar(1.0, -phase);
    }
    return sum;
}

std::vector<PathComponent> sample_scenario(const ScenarioConfig& config, Rng& rng) {
    validate(config);
    const int count = rng.uniform_int(config.path_count_min, config.path_count_max);
    std::vector<PathComponent> paths(count);
    for (PathComponent& p : paths) {
        p.tau = rng.uniform(0.0, config.max_delay);
        const double variance = std::exp(-p.tau / config.delay_profile_decay);
        const double sigma = std::sqrt(variance / 2.0);
        p.alpha = cdouble{sigma * rng.gaussian(), sigma * rng.gaussian()};
        const double azimuth = rng.uniform(0.0, kTwoPi);
        p.direction = {std::cos(azimuth), std::sin(azimuth), 0.0};
    }
    return paths;
}

std::vector<PathComponent> sample_scenario_at(const ScenarioConfig& config, std::uint64_t index) {
    Rng rng(derive_seed(config.rng_seed, index));
    return sample_scenario(config, rng);
}

std::vector<int> uniform_subset(int n, int n0) {
    if (n0 < 1 || n0 > n) {
        throw std::invalid_argument("subset size must satisfy 1 <= n0 <= n");
    }
    const int step = n / n0;
    std::vector<int> idx(n0);
    for (int i = 0; i < n0; ++i) idx[i] = i * step;
    return idx;
}

CsiMatrix extract_known(const CsiMatrix& h, const SubsetSpec& subset) {
    const auto check = [](const std::vector<int>& idx, int limit, const char* what) {
        if (idx.empty()) throw std::invalid_argument(std::string(what) + " subset is empty");
        int prev = -1;
        for (int v : idx) {
            if (v < 0 || v >= limit) {
                throw std::invalid_argument(std::string(what) + " index out of range: " +
                                            std::to_string(v));
            }
            if (v <= prev) {
                throw std::invalid_argument(std::string(what) + " indices must be strictly increasing");
            }
            prev = v;
        }
    };
    check(subset.antenna_indices, h.n_t, "antenna");
    check(subset.subcarrier_indices, h.n_c, "subcarrier");

    CsiMatrix out(static_cast<int>(subset.antenna_indices.size()),
                  static_cast<int>(subset.subcarrier_indices.size()));
    for (int i = 0; i < out.n_t; ++i) {
        for (int j = 0; j < out.n_c; ++j) {
            out.at(i, j) = h.at(subset.antenna_indices[i], subset.subcarrier_indices[j]);
        }
    }
    return out;
}

}  // namespace cmixer::chan
