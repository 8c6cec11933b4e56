#pragma once

#include <utility>
#include <vector>

#include "spisim/integrator.hpp"
#include "spisim/slh.hpp"
#include "spisim/types.hpp"

// Stokes-vector trajectory of the light leaving the emitter, conditioned on
// the prepared spin.  Intensities come from the transmit collapse operators
// in the six standard polarization bases; the reduced Stokes components give
// the position on the Poincare sphere and the polar angles trace how the
// outgoing polarization rotates in time.
namespace spisim::pol {

struct StokesSample {
    double t = 0.0;
    double intensity = 0.0; // total outgoing flux
    double eps_x = 0.0;     // (I_H - I_V) / I
    double eps_y = 0.0;     // (I_D - I_A) / I
    double eps_z = 0.0;     // (I_R - I_L) / I
    double theta = 0.0;     // polar angle, [0, pi]
    double phi = 0.0;       // azimuth, continuous along the trajectory
    bool defined = false;   // false below the intensity floor
};

struct TrajectoryConfig {
    slh::CascadeConfig cascade;
    int spin = 0;                   // ops::kUp or ops::kDown
    int samples = 400;
    double t_end = 0.0;             // 0: auto from the pulse and decay scales
    double intensity_floor = 1e-10; // units of gamma
    // Tighter than the engine defaults: Stokes ratios stay meaningful down
    // to the intensity floor only if the state error sits well below it.
    me::IntegratorOptions integrator{1e-10, 1e-13, 1e-6, 0.0};
};

struct Trajectory {
    std::vector<StokesSample> samples;
    std::vector<cplx> amp_r;     // <L_R> at each grid point
    std::vector<cplx> amp_l;     // <L_L>
    std::vector<cplx> projected; // conditional amplitude along the local Jones vector
    double max_truncation = 0.0;
};

Trajectory stokes_trajectory(const TrajectoryConfig& cfg);

// (theta, phi) of a Stokes vector; throws std::invalid_argument when the
// vector has no direction.
std::pair<double, double> polar_angles(double ex, double ey, double ez);
inline std::pair<double, double> polar_angles(const StokesSample& s) {
    return polar_angles(s.eps_x, s.eps_y, s.eps_z);
}

// Conditional field amplitude at the grid point nearest t; throws if the
// polarization is undefined there.
cplx conditional_amplitude(const Trajectory& traj, double t);

} // namespace spisim::pol
