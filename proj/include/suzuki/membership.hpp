#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "suzuki/field.hpp"
#include "suzuki/linalg.hpp"
#include "suzuki/random.hpp"
#include "suzuki/slp.hpp"
#include "suzuki/szstd.hpp"

// Constructive membership: the mapping-element solver (double cosets of a
// cyclic torus), stabiliser-element sampling, standard generators for the
// unipotent radicals of the two distinguished point stabilisers, and the
// rewriting of arbitrary group elements as straight-line programs.

namespace sz {

// Truncated bivariate polynomial in (alpha, X) where X formally denotes
// alpha^t. Exponents: 0 <= j <= 80 in alpha, 0 <= k <= 4 in X. All ring
// operations, and the two twist reduction rules valid on F_q^x,
//   (alpha^j X^k)^t     = alpha^(2k) X^j   and
//   (alpha^(2u) X^k)^(t/2) = alpha^k X^u,
// preserve the evaluation semantics eval(a) = sum c_jk a^j (a^t)^k.
class BiPoly {
public:
    static constexpr int kMaxJ = 80;
    static constexpr int kMaxK = 4;

    explicit BiPoly(const FieldCtx& F);
    static BiPoly monomial(const FieldCtx& F, FieldElem c, int j, int k);

    const FieldCtx& field() const { return *F_; }
    FieldElem coeff(int j, int k) const;
    void set_coeff(int j, int k, FieldElem c);
    bool is_zero() const;
    int deg_alpha() const;  // -1 for zero
    int deg_x() const;      // -1 for zero

    BiPoly pow_t() const;       // monomial-wise twist rule
    BiPoly pow_half_t() const;  // requires all alpha-degrees even; throws otherwise
    Poly x_coefficient(int k) const;  // coefficient of X^k as polynomial in alpha

    FieldElem eval(FieldElem a) const;  // a in F_q^x

    friend BiPoly operator+(const BiPoly& a, const BiPoly& b);
    friend BiPoly operator*(const BiPoly& a, const BiPoly& b);  // throws on overflow
    friend BiPoly operator*(FieldElem c, const BiPoly& b);

private:
    const FieldCtx* F_;
    std::vector<FieldElem> c_;  // c_[k * (kMaxJ+1) + j]
};

// One instance of the torus double-coset equation
//   P' M'(alpha) g M'(beta) = Q'
// in the diagonalised frame. K,L,M,N are the four bracketed coordinate forms;
// the cached hat versions are cleared of negative exponents by alpha*X.
struct EquationInstance {
    const FieldCtx* F;
    Mat4 g;  // h conjugated into the frame where the torus is diagonal
    ProjPoint Pp, Qp;
    BiPoly Khat, Lhat, Mhat, Nhat;

    // Throws std::invalid_argument if any coordinate of Qp is zero (the
    // degenerate case; callers redraw instead).
    EquationInstance(const Mat4& g_in, const ProjPoint& Pp_in, const ProjPoint& Qp_in);
};

// Monitor for the non-vanishing of the Cramer determinant across every solve.
struct ConjectureStats {
    long long solves = 0;
    long long delta_identically_zero = 0;  // degenerate frames (rate ~ 1/q^2)
    long long f_identically_zero = 0;      // fallback consistency polynomial used
    int max_deg_f = -1;
};
const ConjectureStats& conjecture_stats();
void reset_conjecture_stats();

// All (gamma, delta) in F_q^x x F_q^x solving the instance, verified by
// substitution. If the Cramer determinant is identically zero (rare
// degenerate frames, counted in conjecture_stats) the candidate set falls
// back to all of F_q^x, so the result is complete in every case.
std::vector<std::pair<FieldElem, FieldElem>> solve_equation(const EquationInstance& inst);

// Single Las Vegas round: draw h and a candidate torus element a, solve the
// double-coset equation, and return g = a^l h a^k with P g = Q, plus its word.
std::optional<std::pair<Mat4, ExprPtr>> find_mapping_element(PrGenerator& prg,
                                                             const ProjPoint& P,
                                                             const ProjPoint& Q);

// Retry wrapper; rounds = ceil(log eps / log(1 - phat)) with phat the
// theoretical per-round lower bound 1/(12 loglog(q) deg f).
std::optional<std::pair<Mat4, ExprPtr>> find_mapping_element_lv(PrGenerator& prg,
                                                                const ProjPoint& P,
                                                                const ProjPoint& Q,
                                                                double eps);

// Uniformly random element of the stabiliser of P: draw x, map Q = Px back to
// P. Returns none if the draw already fixed P or no mapping element was found
// within the eps budget.
std::optional<std::pair<Mat4, ExprPtr>> stabiliser_element(PrGenerator& prg,
                                                           const ProjPoint& P,
                                                           double eps);
std::optional<std::pair<Mat4, ExprPtr>> stabiliser_element_lv(PrGenerator& prg,
                                                              const ProjPoint& P,
                                                              double eps);

enum class Side { lower, upper };  // stabiliser of P_inf resp. P_0

// Standard generators of one unipotent radical: 2(2m+1) conjugates of an
// order-4 commutator c and its square by powers of a full-order torus
// element d, together with the GF(2) bases they induce.
struct StdSide {
    std::vector<std::pair<Mat4, ExprPtr>> gens;  // even index: S(a_i,.); odd: S(0,b_i)
    Mat4 d;                                      // torus element of order q-1
    ExprPtr d_expr;
    FieldElem lambda;  // diagonalisation parameter of d
    FieldElem mu;      // diagonal entry d[1][1], base for torus stripping
    Mat4 x;            // diagonalising matrix
    std::vector<FieldElem> a_basis, b_basis;     // GF(2) bases of F_q
};

struct StdGenCtx {
    const StandardCopy* S = nullptr;
    std::vector<Mat4> X;
    StdSide lower, upper;
};

// Single Las Vegas round of the preprocessing step (standard generators for
// both radicals); none on any guard failure.
std::optional<StdGenCtx> preprocess(const StandardCopy& S, PrGenerator& prg, double eps);
std::optional<StdGenCtx> preprocess_lv(const StandardCopy& S, PrGenerator& prg, double eps);

// Word over X evaluating to target, which must lie in the indicated point
// stabiliser (lower/upper triangular). A torus part is stripped with a
// discrete logarithm against mu; the unipotent rest is built by GF(2) row
// reduction over the a-basis, then the b-basis. Throws std::invalid_argument
// if target is not in the subgroup.
ExprPtr express_in_stabiliser(const StdGenCtx& ctx, Side side, const Mat4& target);

// Single round of the rewriting algorithm; none if g * r fixes no ovoid
// point. Throws std::invalid_argument if g is not in the standard copy.
std::optional<ExprPtr> element_to_slp(const StdGenCtx& ctx, PrGenerator& prg, const Mat4& g);
std::optional<ExprPtr> element_to_slp_lv(const StdGenCtx& ctx, PrGenerator& prg,
                                         const Mat4& g, double eps);

constexpr double kDefaultEps = 1.0 / (1 << 20);

// ceil(log eps / log(1 - phat)), the Las Vegas retry count.
int lv_rounds(double eps, double phat);

}  // namespace sz
