#pragma once

#include <vector>

#include "suzuki/field.hpp"
#include "suzuki/linalg.hpp"

namespace sz {

// The standard copy of Sz(q) = <S(a,b), M(c), T>, its ovoid, the symplectic
// form J, and the exceptional automorphism Psi whose fixed points in Sp(4,q)
// are exactly Sz(q).
class StandardCopy {
public:
    explicit StandardCopy(const FieldCtx& F);
    StandardCopy(const StandardCopy&) = delete;
    StandardCopy& operator=(const StandardCopy&) = delete;
    static const StandardCopy& get(int m);

    const FieldCtx& field() const { return F_; }
    const Mat4& J() const { return J_; }

    Mat4 s_mat(FieldElem a, FieldElem b) const;  // lower unitriangular family
    Mat4 u_mat(FieldElem a, FieldElem b) const;  // T s_mat(a,b) T (upper family)
    Mat4 m_mat(FieldElem c) const;               // diag(c^{1+2^m}, c^{2^m}, ..)
    Mat4 mprime(FieldElem lambda) const;         // diag(l^{t+1}, l, l^-1, l^{-t-1})
    Mat4 t_mat() const;

    // Canonical finite generating set {S(1,0), S(0,1), M(c0), T}.
    std::vector<Mat4> std_gens() const;

    ProjPoint p_inf() const;   // (1:0:0:0)
    ProjPoint p_zero() const;  // (0:0:0:1)
    ProjPoint ovoid_point(FieldElem a, FieldElem b) const;
    bool ovoid_contains(const ProjPoint& p) const;

    bool is_symplectic(const Mat4& g) const;  // g J g^T = J
    Mat4 psi(const Mat4& g) const;            // throws if not symplectic
    bool is_member_standard(const Mat4& g) const;

private:
    const FieldCtx& F_;
    Mat4 J_;
    Mat4 Y_, Yinv_;  // calibrated section basis for psi

    // action on the 4-dim section of the exterior square, before the
    // entrywise 2^m power and the basis calibration
    Mat4 section_action(const Mat4& g) const;
};

// Desk-scale oracle: every element of Sz(8) exactly once.
std::vector<Mat4> enumerate_sz8(const StandardCopy& S);

}  // namespace sz
