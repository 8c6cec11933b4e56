#include "spisim/operators.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace spisim::ops {
namespace {

SpMat sparse_identity(int n) {
    SpMat m(n, n);
    m.setIdentity();
    return m;
}

SpMat single_mode_destroy(int n) {
    SpMat m(n, n);
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int k = 1; k < n; ++k) trips.emplace_back(k - 1, k, std::sqrt(double(k)));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SpMat single_mode_number(int n) {
    SpMat m(n, n);
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int k = 1; k < n; ++k) trips.emplace_back(k, k, double(k));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SpMat lift(const SpMat& em, const SpMat& r, const SpMat& l) {
    SpMat rl = Eigen::kroneckerProduct(r, l).eval();
    return Eigen::kroneckerProduct(em, rl).eval();
}

SpMat emitter_dyad(const HilbertLayout& h, int row, int col) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(row, col) = 1.0;
    return emitter_matrix(h, m);
}

} // namespace

void HilbertLayout::validate() const {
    if (n_r < 1 || n_l < 1)
        throw std::invalid_argument("HilbertLayout: each mode needs at least one Fock level");
}

SpMat identity(const HilbertLayout& h) {
    h.validate();
    return sparse_identity(h.dim());
}

SpMat destroy_r(const HilbertLayout& h) {
    h.validate();
    return lift(sparse_identity(4), single_mode_destroy(h.n_r), sparse_identity(h.n_l));
}

SpMat destroy_l(const HilbertLayout& h) {
    h.validate();
    return lift(sparse_identity(4), sparse_identity(h.n_r), single_mode_destroy(h.n_l));
}

SpMat number_r(const HilbertLayout& h) {
    h.validate();
    return lift(sparse_identity(4), single_mode_number(h.n_r), sparse_identity(h.n_l));
}

SpMat number_l(const HilbertLayout& h) {
    h.validate();
    return lift(sparse_identity(4), sparse_identity(h.n_r), single_mode_number(h.n_l));
}

SpMat emitter_matrix(const HilbertLayout& h, const Eigen::Matrix4cd& m) {
    h.validate();
    SpMat em = m.sparseView();
    return lift(em, sparse_identity(h.n_r), sparse_identity(h.n_l));
}

SpMat sigma_r(const HilbertLayout& h) { return emitter_dyad(h, kUp, kTrionUp); }
SpMat sigma_l(const HilbertLayout& h) { return emitter_dyad(h, kDown, kTrionDown); }
SpMat spin_coherence(const HilbertLayout& h) { return emitter_dyad(h, kUp, kDown); }
SpMat trion_r_projector(const HilbertLayout& h) { return emitter_dyad(h, kTrionUp, kTrionUp); }
SpMat trion_l_projector(const HilbertLayout& h) { return emitter_dyad(h, kTrionDown, kTrionDown); }

SpMat excited_projector(const HilbertLayout& h) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(kTrionUp, kTrionUp) = 1.0;
    m(kTrionDown, kTrionDown) = 1.0;
    return emitter_matrix(h, m);
}

SpMat top_fock_projector(const HilbertLayout& h) {
    h.validate();
    SpMat m(h.dim(), h.dim());
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int e = 0; e < 4; ++e)
        for (int mr = 0; mr < h.n_r; ++mr)
            for (int ml = 0; ml < h.n_l; ++ml) {
                const bool top_r = h.n_r > 1 && mr == h.n_r - 1;
                const bool top_l = h.n_l > 1 && ml == h.n_l - 1;
                if (top_r || top_l) {
                    const int i = h.index(e, mr, ml);
                    trips.emplace_back(i, i, 1.0);
                }
            }
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

Eigen::VectorXcd basis_state(const HilbertLayout& h, int e, int mr, int ml) {
    h.validate();
    if (e < 0 || e > 3 || mr < 0 || mr >= h.n_r || ml < 0 || ml >= h.n_l)
        throw std::invalid_argument("basis_state: index out of range");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(h.dim());
    v(h.index(e, mr, ml)) = 1.0;
    return v;
}

ShapedOp::ShapedOp(int dim) : dim_(dim) {
    for (auto& m : c_) m = SpMat(dim, dim);
}

ShapedOp ShapedOp::zero(int dim) { return ShapedOp(dim); }

ShapedOp ShapedOp::constant(SpMat m) {
    ShapedOp o(static_cast<int>(m.rows()));
    o.c_[0] = std::move(m);
    return o;
}

ShapedOp ShapedOp::linear(SpMat m) {
    ShapedOp o(static_cast<int>(m.rows()));
    o.c_[1] = std::move(m);
    return o;
}

ShapedOp ShapedOp::quadratic(SpMat m) {
    ShapedOp o(static_cast<int>(m.rows()));
    o.c_[2] = std::move(m);
    return o;
}

int ShapedOp::degree() const {
    for (int k = 2; k >= 0; --k)
        if (c_[k].nonZeros() > 0) return k;
    return -1;
}

const SpMat& ShapedOp::coeff(int k) const {
    if (k < 0 || k > 2) throw std::invalid_argument("ShapedOp: coefficient index");
    return c_[k];
}

SpMat ShapedOp::at(double g) const {
    if (empty()) throw std::logic_error("ShapedOp: evaluating a default-constructed op");
    SpMat m = c_[0];
    if (c_[1].nonZeros() > 0) m = m + g * c_[1];
    if (c_[2].nonZeros() > 0) m = m + (g * g) * c_[2];
    return m;
}

ShapedOp ShapedOp::adjoint() const {
    ShapedOp o(dim_);
    for (int k = 0; k < 3; ++k) o.c_[k] = SpMat(c_[k].adjoint());
    return o;
}

ShapedOp& ShapedOp::operator+=(const ShapedOp& o) {
    if (empty()) {
        *this = o;
        return *this;
    }
    if (o.empty()) return *this;
    if (dim_ != o.dim_) throw std::invalid_argument("ShapedOp: dimension mismatch");
    for (int k = 0; k < 3; ++k) c_[k] = c_[k] + o.c_[k];
    return *this;
}

ShapedOp operator*(const cplx& s, ShapedOp a) {
    for (auto& m : a.c_) m = s * m;
    return a;
}

ShapedOp ShapedOp::product(const ShapedOp& a, const ShapedOp& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ShapedOp: product of empty op");
    if (a.dim_ != b.dim_) throw std::invalid_argument("ShapedOp: dimension mismatch");
    ShapedOp o(a.dim_);
    for (int i = 0; i < 3; ++i) {
        if (a.c_[i].nonZeros() == 0) continue;
        for (int j = 0; j < 3; ++j) {
            if (b.c_[j].nonZeros() == 0) continue;
            if (i + j > 2)
                throw std::invalid_argument("ShapedOp: product exceeds quadratic drive order");
            o.c_[i + j] = o.c_[i + j] + SpMat(a.c_[i] * b.c_[j]);
        }
    }
    return o;
}

} // namespace spisim::ops
