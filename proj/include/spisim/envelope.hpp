#pragma once

#include <span>
#include <vector>

#include "spisim/types.hpp"

namespace spisim {

// Temporal amplitude xi(t) of a single-photon wavepacket, normalized so that
// int |xi|^2 dt = 1.  Either the mono-exponential closed form
// xi(t) = sqrt(Gamma) e^(-Gamma t / 2) or an explicitly sampled waveform on a
// uniform time grid.
class PhotonEnvelope {
  public:
    enum class Shape { ExponentialDecay, Custom };

    static PhotonEnvelope exponential(double bandwidth);
    // Samples must live on a uniform grid starting at t[0] >= 0 and satisfy
    // the unit-norm invariant to 1e-10 (see normalized_samples).
    static PhotonEnvelope custom(std::vector<double> t, std::vector<cplx> xi);
    // Rescales samples to unit norm (helper for building valid inputs).
    static std::vector<cplx> normalized_samples(std::span<const double> t,
                                                std::vector<cplx> xi);

    Shape shape() const { return shape_; }
    bool is_exponential() const { return shape_ == Shape::ExponentialDecay; }
    double bandwidth() const; // Gamma; exponential shape only

    cplx value(double t) const; // xi(t); linear interpolation for Custom
    double norm() const;        // int |xi|^2 dt, quadrature on the stored grid

    std::span<const double> grid() const { return grid_; }
    std::span<const cplx> samples() const { return samples_; }
    double grid_step() const { return dt_; }
    double duration() const; // end of support (Custom) or 40/Gamma

  private:
    PhotonEnvelope() = default;
    Shape shape_ = Shape::ExponentialDecay;
    double gamma_env_ = 1.0; // bandwidth Gamma for the exponential shape
    std::vector<double> grid_;
    std::vector<cplx> samples_;
    double dt_ = 0.0;
};

} // namespace spisim
