#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>

#include "spisim/types.hpp"

// Sparse operators on the emitter x source Hilbert space and a small algebra
// for operators with an explicit drive-amplitude dependence.
namespace spisim::ops {

using SpMat = Eigen::SparseMatrix<cplx>;

// Emitter levels.  The two ground spins couple to opposite circular
// polarizations through their trion states.
inline constexpr int kUp = 0;        // spin up, drives R
inline constexpr int kDown = 1;      // spin down, drives L
inline constexpr int kTrionUp = 2;   // excited partner of kUp
inline constexpr int kTrionDown = 3; // excited partner of kDown

struct HilbertLayout {
    int n_r = 1; // Fock levels kept for the R source mode
    int n_l = 1;

    int dim() const { return 4 * n_r * n_l; }
    // Basis index with the emitter slowest: (e, m_r, m_l).
    int index(int e, int mr, int ml) const { return (e * n_r + mr) * n_l + ml; }
    void validate() const;
};

SpMat identity(const HilbertLayout& h);
SpMat destroy_r(const HilbertLayout& h);
SpMat destroy_l(const HilbertLayout& h);
SpMat number_r(const HilbertLayout& h);
SpMat number_l(const HilbertLayout& h);

// Emitter-space operator lifted to the full space.
SpMat emitter_matrix(const HilbertLayout& h, const Eigen::Matrix4cd& m);
SpMat sigma_r(const HilbertLayout& h);         // |up><TrionUp|
SpMat sigma_l(const HilbertLayout& h);         // |down><TrionDown|
SpMat spin_coherence(const HilbertLayout& h);  // |up><down|
SpMat trion_r_projector(const HilbertLayout& h);
SpMat trion_l_projector(const HilbertLayout& h);
SpMat excited_projector(const HilbertLayout& h); // both trion levels

// Projector onto the top kept Fock level of each mode with more than one
// level; its population tracks truncation error during integration.
SpMat top_fock_projector(const HilbertLayout& h);

Eigen::VectorXcd basis_state(const HilbertLayout& h, int e, int mr, int ml);

// Operator of the form O(g) = c0 + g c1 + g^2 c2, where g(t) is the shared
// drive amplitude sqrt(Gamma(t)).  Degree is capped at 2, which covers
// every L, H, and L'L that appears in the cascades.
class ShapedOp {
  public:
    ShapedOp() = default;

    static ShapedOp zero(int dim);
    static ShapedOp constant(SpMat m);
    static ShapedOp linear(SpMat m);
    static ShapedOp quadratic(SpMat m);

    bool empty() const { return dim_ == 0; }
    int dim() const { return dim_; }
    int degree() const; // highest power with nonzeros; -1 for the zero op
    const SpMat& coeff(int k) const;

    SpMat at(double g) const;
    bool is_constant() const { return degree() <= 0; }

    ShapedOp adjoint() const;
    ShapedOp& operator+=(const ShapedOp& o);
    friend ShapedOp operator+(ShapedOp a, const ShapedOp& b) { return a += b; }
    friend ShapedOp operator*(const cplx& s, ShapedOp a);

    // Operator product; throws std::invalid_argument if the result would
    // exceed degree 2.
    static ShapedOp product(const ShapedOp& a, const ShapedOp& b);

  private:
    explicit ShapedOp(int dim);
    int dim_ = 0;
    std::array<SpMat, 3> c_;
};

} // namespace spisim::ops
