#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "cmixer/rng.hpp"

namespace cmixer::chan {

using cdouble = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// One propagation path: complex gain, delay and unit departure direction.
struct PathComponent {
    cdouble alpha;
    double tau = 0.0;  // seconds, >= 0
    Vec3 direction{1.0, 0.0, 0.0};
};

/// Antenna element offsets relative to the first element (which sits at the
/// origin by convention).
struct ArrayGeometry {
    std::vector<Vec3> element_offsets;

    std::size_t size() const { return element_offsets.size(); }
};

/// Subcarrier grid: absolute base frequency plus per-subcarrier offsets.
/// offsets[0] == 0, strictly increasing.
struct CarrierGrid {
    double f0 = 0.0;
    std::vector<double> offsets;

    std::size_t size() const { return offsets.size(); }
};

/// Complex channel matrix, rows = antennas, columns = subcarriers.
struct CsiMatrix {
    int n_t = 0;
    int n_c = 0;
    std::vector<cdouble> entries;  // row-major

    CsiMatrix() = default;
    CsiMatrix(int nt, int nc) : n_t(nt), n_c(nc), entries(static_cast<std::size_t>(nt) * nc) {}

    cdouble& at(int t, int c) { return entries[static_cast<std::size_t>(t) * n_c + c]; }
    const cdouble& at(int t, int c) const { return entries[static_cast<std::size_t>(t) * n_c + c]; }
};

/// Index subset for the known sub-channel: Cartesian product A x B.
struct SubsetSpec {
    std::vector<int> antenna_indices;
    std::vector<int> subcarrier_indices;
};

/// Parameters of the synthetic multipath scenario generator.
struct ScenarioConfig {
    int n_t = 32;
    int n_c = 32;
    double antenna_spacing = 0.0;  // meters; 0 = half wavelength of f0
    int path_count_min = 2;
    int path_count_max = 8;
    double max_delay = 300e-9;            // seconds
    double delay_profile_decay = 100e-9;  // seconds, exponential power-delay constant
    double bandwidth = 40e6;              // Hz
    double f0 = 3.5e9;                    // Hz
    std::uint64_t rng_seed = 1;

    double spacing() const { return antenna_spacing > 0.0 ? antenna_spacing : kSpeedOfLight / (2.0 * f0); }
};

void validate(const ScenarioConfig& config);

/// Uniform linear array along the x-axis. element_offsets[i] = (i*spacing, 0, 0).
ArrayGeometry make_ula(int n_t, double spacing);

/// Evenly spaced subcarrier offsets: offsets[i] = i * bandwidth / n_c.
CarrierGrid make_grid(double f0, double bandwidth, int n_c);

/// Per-antenna phase shifts of a plane wave departing in `direction` at
/// frequency f. Element i = exp(-j 2 pi f (d_i . p) / c); element 0 is 1.
std::vector<cdouble> array_response(const ArrayGeometry& geometry, const Vec3& direction, double f);

/// Narrowband channel vector at frequency f: sum over paths of
/// alpha_p exp(-j 2 pi f tau_p) a(p_p).
std::vector<cdouble> channel_vector(const std::vector<PathComponent>& paths,
                                    const ArrayGeometry& geometry, double f);

/// Full channel matrix; column i is channel_vector at f0 + offsets[i].
CsiMatrix assemble_csi(const std::vector<PathComponent>& paths, const ArrayGeometry& geometry,
                       const CarrierGrid& grid);

/// Shared-feature form of a single CSI entry as a function of the antenna
/// offset d and the subcarrier shift delta_f. Serves as an independent
/// oracle for assemble_csi: q_h(paths, f0, d_m, delta_f_n) == H[m][n].
cdouble q_h(const std::vector<PathComponent>& paths, double f0, const Vec3& d, double delta_f);

/// Draws the multipath parameters of one channel sample. Path count uniform
/// in [path_count_min, path_count_max]; delays uniform in [0, max_delay];
/// gains circularly-symmetric complex Gaussian with variance
/// exp(-tau / delay_profile_decay); directions uniform on the azimuth circle.
std::vector<PathComponent> sample_scenario(const ScenarioConfig& config, Rng& rng);

/// Same, with the per-sample generator derived from (config.rng_seed, index)
/// so parallel and serial dataset generation agree.
std::vector<PathComponent> sample_scenario_at(const ScenarioConfig& config, std::uint64_t index);

/// Indices {0, step, ..., (n0-1)*step} with step = floor(n / n0).
std::vector<int> uniform_subset(int n, int n0);

/// Known sub-matrix H0: entry (i, j) = H[A[i], B[j]].
CsiMatrix extract_known(const CsiMatrix& h, const SubsetSpec& subset);

}  // namespace cmixer::chan
