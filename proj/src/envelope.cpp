#include "spisim/envelope.hpp"

#include <cmath>

#include "spisim/quadrature.hpp"

namespace spisim {

PhotonEnvelope PhotonEnvelope::exponential(double bandwidth) {
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("PhotonEnvelope: bandwidth must be positive");
    PhotonEnvelope e;
    e.shape_ = Shape::ExponentialDecay;
    e.gamma_env_ = bandwidth;
    return e;
}

PhotonEnvelope PhotonEnvelope::custom(std::vector<double> t, std::vector<cplx> xi) {
    if (t.size() != xi.size() || t.size() < 4)
        throw std::invalid_argument("PhotonEnvelope: need matching grids with >= 4 samples");
    const double dt = t[1] - t[0];
    if (!(dt > 0.0)) throw std::invalid_argument("PhotonEnvelope: grid must be increasing");
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        if (std::abs((t[i + 1] - t[i]) - dt) > 1e-9 * dt)
            throw std::invalid_argument("PhotonEnvelope: grid must be uniform");
    }
    if (t.front() < 0.0) throw std::invalid_argument("PhotonEnvelope: grid must start at t >= 0");
    PhotonEnvelope e;
    e.shape_ = Shape::Custom;
    e.grid_ = std::move(t);
    e.samples_ = std::move(xi);
    e.dt_ = dt;
    const double n = e.norm();
    if (std::abs(n - 1.0) > 1e-10)
        throw std::invalid_argument("PhotonEnvelope: samples are not unit-norm (got " +
                                    std::to_string(n) + ")");
    return e;
}

std::vector<cplx> PhotonEnvelope::normalized_samples(std::span<const double> t,
                                                     std::vector<cplx> xi) {
    if (t.size() != xi.size() || t.size() < 4)
        throw std::invalid_argument("normalized_samples: bad grid");
    const double dt = t[1] - t[0];
    std::vector<double> abs2(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) abs2[i] = std::norm(xi[i]);
    const double total = quad::cumulative_uniform(std::span<const double>(abs2), dt).back();
    if (!(total > 0.0)) throw std::invalid_argument("normalized_samples: zero waveform");
    const double s = 1.0 / std::sqrt(total);
    for (auto& v : xi) v *= s;
    return xi;
}

double PhotonEnvelope::bandwidth() const {
    if (shape_ != Shape::ExponentialDecay)
        throw std::logic_error("PhotonEnvelope: bandwidth defined for exponential shape only");
    return gamma_env_;
}

cplx PhotonEnvelope::value(double t) const {
    if (t < 0.0) return 0.0;
    if (shape_ == Shape::ExponentialDecay)
        return std::sqrt(gamma_env_) * std::exp(-0.5 * gamma_env_ * t);
    if (t <= grid_.front() || t >= grid_.back()) {
        if (t == grid_.front()) return samples_.front();
        if (t == grid_.back()) return samples_.back();
        return 0.0;
    }
    const double s = (t - grid_.front()) / dt_;
    const auto i = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * samples_[i] + w * samples_[i + 1];
}

double PhotonEnvelope::norm() const {
    if (shape_ == Shape::ExponentialDecay) return 1.0;
    std::vector<double> abs2(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) abs2[i] = std::norm(samples_[i]);
    return quad::cumulative_uniform(std::span<const double>(abs2), dt_).back();
}

double PhotonEnvelope::duration() const {
    if (shape_ == Shape::ExponentialDecay) return 40.0 / gamma_env_;
    return grid_.back();
}

} // namespace spisim
