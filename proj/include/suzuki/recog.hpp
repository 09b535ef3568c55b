#pragma once

#include <optional>
#include <string>
#include <vector>

#include "suzuki/linalg.hpp"
#include "suzuki/random.hpp"
#include "suzuki/szstd.hpp"

namespace sz {

// Reason a generating set was rejected, in test order.
enum class RecogTag {
    none,             // accepted
    not_in_sp,        // determinant or symplectic-form test failed
    not_psi_fixed,    // not fixed by the exceptional automorphism
    reducible,        // natural module not absolutely irreducible
    subfield,         // conjugate to a group over a proper subfield
    metabelian_trap,  // second derived group trivial (torus/Hall normalisers)
    proper_subgroup,  // conjugate copy contained in a maximal subgroup
};
std::string tag_name(RecogTag tag);

struct RecognitionReport {
    bool verdict = false;
    RecogTag tag = RecogTag::none;
    // Offending generator, or the commutator c with [c, c^x] = 1 for all x.
    std::optional<Mat4> witness;
};

// Decide whether <X> is exactly the standard copy: membership of every
// generator, absolute irreducibility, no subfield form, and a commutator
// c = [x_i, x_j] != 1 with [c, c^x] != 1 for some x in X.
RecognitionReport recognise_standard(const std::vector<Mat4>& X);

// Decide whether <X> is a GL(4,q)-conjugate of the standard copy: absolute
// irreducibility, an invariant symplectic form, module isomorphism with the
// twisted module, then the commutator criterion on the rebased generators.
RecognitionReport recognise_conjugate(const std::vector<Mat4>& X);

// A point of the set on which <X> acts doubly transitively (the conjugated
// ovoid): eigenspace of the mu^{t+1} eigenvalue of a torus element. none if
// the retry budget is exhausted.
std::optional<ProjPoint> find_ovoid_point(PrGenerator& prg);

// Both distinguished eigenspaces (for mu^{t+1} and mu^{-t-1}) of one torus
// element; a guaranteed-distinct pair of points of the conjugated ovoid.
std::optional<std::pair<ProjPoint, ProjPoint>> find_ovoid_point_pair(PrGenerator& prg);

// Given generators of two point stabilisers in general position (each with a
// nontrivial unipotent and a nontrivial torus part), build k in GL(4,q) such
// that conjugation by k makes the two stabilisers lower resp. upper
// triangular: rows of k^-1 are U1 = V1^P, U2 = V3^P cap V2^Q,
// U3 = V2^P cap V3^Q, U4 = V1^Q. Throws std::runtime_error("not in general
// position") if an intersection is not a line.
Mat4 conjugate_to_triangular(const std::vector<Mat4>& Yp, const std::vector<Mat4>& Yq);

// For X_k with <X_k>^d standard for some diagonal d: find a diagonal e with
// <X_k>^e standard, from the invariant form K and two ovoid points, solving
// p2^t x + p3^{t+2} y = p1 K14 + p2 p3 K23. Redraws points up to 32 times on
// a singular system; none on budget exhaustion.
std::optional<Mat4> diagonal_adjust(const std::vector<Mat4>& Xk, PrGenerator& prg);

// Single Las Vegas round: g = k e with <X>^g the standard copy, verified by
// membership of every conjugated generator.
std::optional<Mat4> find_conjugator(const std::vector<Mat4>& X, PrGenerator& prg);
std::optional<Mat4> find_conjugator_lv(const std::vector<Mat4>& X, PrGenerator& prg,
                                       double eps);

}  // namespace sz
