#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "suzuki/field.hpp"

namespace sz {

struct Vec4 {
    std::array<FieldElem, 4> c;
    FieldElem& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    const FieldElem& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    bool operator==(const Vec4& o) const { return c == o.c; }
    bool is_zero() const;
};

Vec4 zero_vec(const FieldCtx& F);

struct Mat4 {
    std::array<std::array<FieldElem, 4>, 4> a;
    std::array<FieldElem, 4>& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
    const std::array<FieldElem, 4>& operator[](int i) const {
        return a[static_cast<std::size_t>(i)];
    }
    bool operator==(const Mat4& o) const { return a == o.a; }
    bool operator!=(const Mat4& o) const { return !(a == o.a); }
};

Mat4 zero_mat(const FieldCtx& F);
Mat4 identity(const FieldCtx& F);
Mat4 operator*(const Mat4& x, const Mat4& y);
Mat4 operator+(const Mat4& x, const Mat4& y);
Mat4 transpose(const Mat4& x);
Mat4 scalar_mul(FieldElem c, const Mat4& x);
FieldElem det(const Mat4& x);
FieldElem trace(const Mat4& x);
Mat4 inverse(const Mat4& x);                 // via adjugate; throws if singular
Mat4 mat_pow(const Mat4& x, long long e);
Mat4 conj(const Mat4& x, const Mat4& y);     // y^-1 x y
Mat4 commutator(const Mat4& x, const Mat4& y);
Vec4 operator*(const Vec4& v, const Mat4& x);  // row vector action
long long mat_order(const Mat4& x, long long bound);  // smallest k<=bound with x^k=1, or -1

std::string mat_to_hex(const Mat4& x);
Mat4 mat_from_hex(const FieldCtx& F, const std::string& line);

// Projective point of P^3, normalized so the last non-zero coordinate is 1.
struct ProjPoint {
    Vec4 v;
    explicit ProjPoint(const Vec4& raw);  // normalizes; throws on zero vector
    bool operator==(const ProjPoint& o) const { return v == o.v; }
    bool operator!=(const ProjPoint& o) const { return !(v == o.v); }
};
ProjPoint operator*(const ProjPoint& p, const Mat4& g);

// Characteristic polynomial det(xI + A), degree 4, monic.
Poly char_poly(const Mat4& g);

struct EigenPair {
    FieldElem value;
    std::vector<Vec4> space;  // row-reduced basis of the left eigenspace
};
// All eigenvalues in F_q with left eigenspace bases (v g = lambda v).
std::vector<EigenPair> eigen_data(const Mat4& g);

// For a != 1 of order dividing q-1 in a conjugate of the standard copy:
// lambda and invertible x with x^-1 M'(lambda) x = a, eigenvector rows of x
// matched to diagonal positions (lambda^{t+1}, lambda, lambda^-1, lambda^{-t-1}).
// Among the valid candidates for lambda the one with smallest bit pattern is
// taken, and each row of x is scaled to leading coefficient 1.
struct TorusDiag {
    FieldElem lambda;
    Mat4 x;
};
TorusDiag diagonalise_torus(const Mat4& a);

std::optional<Mat4> invariant_symplectic_form(const std::vector<Mat4>& gens);
Mat4 symplectic_basis(const Mat4& M);  // X with X J X^T = M

// Basis of {T : A_i T = T B_i for all i}.
std::vector<Mat4> module_hom_space(const std::vector<Mat4>& gensA,
                                   const std::vector<Mat4>& gensB);

// Basis (row-reduced) of a proper non-zero invariant subspace of the natural
// row module, if one exists. Exact: searches dimensions 1, 3 (via common
// eigenvectors of the action and its dual) and 2 (via the exterior square).
std::optional<std::vector<Vec4>> find_submodule(const std::vector<Mat4>& gens);

bool is_absolutely_irreducible(const std::vector<Mat4>& gens);

// Trace-field criterion; valid for absolutely irreducible inputs.
bool written_over_subfield(const std::vector<Mat4>& gens, int d);

struct SubmoduleChain {
    std::vector<std::vector<Vec4>> spaces;  // dims 1,2,3,4
};
SubmoduleChain composition_series(const std::vector<Mat4>& gens);

// Coordinates of target in the GF(2)-span of basis, or none.
std::optional<std::vector<int>> gf2_solve(const std::vector<FieldElem>& basis,
                                          FieldElem target);

// --- generic small dense matrices over F_q (internal workhorse, also used
// --- by the exterior-square construction in szstd) ---
struct MatN {
    const FieldCtx* F = nullptr;
    int rows = 0, cols = 0;
    std::vector<FieldElem> a;
    MatN() = default;
    MatN(const FieldCtx& f, int r, int c);
    FieldElem& at(int i, int j) { return a[static_cast<std::size_t>(i * cols + j)]; }
    const FieldElem& at(int i, int j) const {
        return a[static_cast<std::size_t>(i * cols + j)];
    }
};
// In-place reduced row echelon form; returns pivot column indices.
std::vector<int> rref(MatN& M);
// Basis of the right nullspace {x : M x = 0}, each a length-cols vector.
std::vector<std::vector<FieldElem>> nullspace(const MatN& M);
int rank(MatN M);

// Exterior square on the ordered basis e12, e13, e14, e23, e24, e34.
MatN ext_square(const Mat4& g);

// Row-reduce a list of row vectors (dimension dim), dropping zero rows.
std::vector<std::vector<FieldElem>> row_reduce(const FieldCtx& F,
                                               std::vector<std::vector<FieldElem>> rows,
                                               int dim);

}  // namespace sz
