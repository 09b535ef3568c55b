#include "suzuki/membership.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace sz {

// ---------- BiPoly ----------

BiPoly::BiPoly(const FieldCtx& F)
    : F_(&F), c_(static_cast<std::size_t>((kMaxJ + 1) * (kMaxK + 1)), F.zero()) {}

BiPoly BiPoly::monomial(const FieldCtx& F, FieldElem c, int j, int k) {
    BiPoly p(F);
    p.set_coeff(j, k, c);
    return p;
}

FieldElem BiPoly::coeff(int j, int k) const {
    return c_[static_cast<std::size_t>(k * (kMaxJ + 1) + j)];
}

void BiPoly::set_coeff(int j, int k, FieldElem c) {
    if (j < 0 || j > kMaxJ || k < 0 || k > kMaxK)
        throw std::out_of_range("BiPoly exponent out of range");
    c_[static_cast<std::size_t>(k * (kMaxJ + 1) + j)] = c;
}

bool BiPoly::is_zero() const {
    for (const FieldElem& x : c_)
        if (!x.is_zero()) return false;
    return true;
}

int BiPoly::deg_alpha() const {
    int d = -1;
    for (int k = 0; k <= kMaxK; ++k)
        for (int j = 0; j <= kMaxJ; ++j)
            if (!coeff(j, k).is_zero()) d = std::max(d, j);
    return d;
}

int BiPoly::deg_x() const {
    int d = -1;
    for (int k = 0; k <= kMaxK; ++k)
        for (int j = 0; j <= kMaxJ; ++j)
            if (!coeff(j, k).is_zero()) d = std::max(d, k);
    return d;
}

BiPoly BiPoly::pow_t() const {
    // (c alpha^j X^k)^t = c^t alpha^(2k) X^j, valid on F_q^x.
    const std::uint32_t t = F_->t();
    BiPoly out(*F_);
    for (int k = 0; k <= kMaxK; ++k)
        for (int j = 0; j <= kMaxJ; ++j) {
            FieldElem c = coeff(j, k);
            if (c.is_zero()) continue;
            out.set_coeff(2 * k, j, out.coeff(2 * k, j) + F_->pow(c, t));
        }
    return out;
}

BiPoly BiPoly::pow_half_t() const {
    // (c alpha^(2u) X^k)^(t/2) = c^(t/2) alpha^k X^u, valid on F_q^x.
    const std::uint32_t th = F_->t() / 2;
    BiPoly out(*F_);
    for (int k = 0; k <= kMaxK; ++k)
        for (int j = 0; j <= kMaxJ; ++j) {
            FieldElem c = coeff(j, k);
            if (c.is_zero()) continue;
            if (j % 2 != 0) throw std::domain_error("pow_half_t on odd alpha-degree");
            out.set_coeff(k, j / 2, out.coeff(k, j / 2) + F_->pow(c, th));
        }
    return out;
}

Poly BiPoly::x_coefficient(int k) const {
    std::vector<FieldElem> coeffs;
    coeffs.reserve(kMaxJ + 1);
    for (int j = 0; j <= kMaxJ; ++j) coeffs.push_back(coeff(j, k));
    return Poly(*F_, std::move(coeffs));
}

FieldElem BiPoly::eval(FieldElem a) const {
    const FieldCtx& F = *F_;
    FieldElem at = F.pow(a, F.t());
    FieldElem acc = F.zero();
    FieldElem xk = F.one();
    for (int k = 0; k <= kMaxK; ++k) {
        FieldElem aj = F.one();
        for (int j = 0; j <= kMaxJ; ++j) {
            FieldElem c = coeff(j, k);
            if (!c.is_zero()) acc += c * aj * xk;
            aj *= a;
        }
        xk *= at;
    }
    return acc;
}

BiPoly operator+(const BiPoly& a, const BiPoly& b) {
    BiPoly out(*a.F_);
    for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] = a.c_[i] + b.c_[i];
    return out;
}

BiPoly operator*(const BiPoly& a, const BiPoly& b) {
    const int da = a.deg_alpha(), db = b.deg_alpha();
    const int ka = a.deg_x(), kb = b.deg_x();
    BiPoly out(*a.F_);
    if (da < 0 || db < 0) return out;
    if (da + db > BiPoly::kMaxJ || ka + kb > BiPoly::kMaxK)
        throw std::overflow_error("BiPoly product exceeds exponent bounds");
    for (int k1 = 0; k1 <= ka; ++k1)
        for (int j1 = 0; j1 <= da; ++j1) {
            FieldElem c1 = a.coeff(j1, k1);
            if (c1.is_zero()) continue;
            for (int k2 = 0; k2 <= kb; ++k2)
                for (int j2 = 0; j2 <= db; ++j2) {
                    FieldElem c2 = b.coeff(j2, k2);
                    if (c2.is_zero()) continue;
                    out.set_coeff(j1 + j2, k1 + k2, out.coeff(j1 + j2, k1 + k2) + c1 * c2);
                }
        }
    return out;
}

BiPoly operator*(FieldElem c, const BiPoly& b) {
    BiPoly out(*b.F_);
    for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] = c * b.c_[i];
    return out;
}

// ---------- EquationInstance ----------

namespace {

// diag(l^(t+1), l, l^-1, l^(-t-1))
Mat4 mprime_of(const FieldCtx& F, FieldElem l) {
    Mat4 d = zero_mat(F);
    FieldElem lt1 = F.pow(l, F.t() + 1);
    d[0][0] = lt1;
    d[1][1] = l;
    d[2][2] = F.inv(l);
    d[3][3] = F.inv(lt1);
    return d;
}

// K,L,M,N cleared by alpha X: the alpha exponents (t+1, 1, -1, -t-1) of the
// four coordinate terms become the monomials alpha^2 X^2, alpha^2 X, X, 1.
BiPoly hat_form(const FieldCtx& F, const Vec4& q, const Mat4& g, int col) {
    static constexpr int kJ[4] = {2, 2, 0, 0};
    static constexpr int kK[4] = {2, 1, 1, 0};
    BiPoly p(F);
    for (int i = 0; i < 4; ++i) {
        FieldElem c = q[i] * g[i][col];
        if (!c.is_zero()) p.set_coeff(kJ[i], kK[i], p.coeff(kJ[i], kK[i]) + c);
    }
    return p;
}

}  // namespace

EquationInstance::EquationInstance(const Mat4& g_in, const ProjPoint& Pp_in,
                                   const ProjPoint& Qp_in)
    : F(g_in[0][0].F),
      g(g_in),
      Pp(Pp_in),
      Qp(Qp_in),
      Khat(hat_form(*F, Pp_in.v, g_in, 0)),
      Lhat(hat_form(*F, Pp_in.v, g_in, 1)),
      Mhat(hat_form(*F, Pp_in.v, g_in, 2)),
      Nhat(hat_form(*F, Pp_in.v, g_in, 3)) {
    for (int i = 0; i < 4; ++i)
        if (Qp.v[i].is_zero())
            throw std::invalid_argument("degenerate instance: zero target coordinate");
}

// ---------- solve_equation ----------

namespace {

ConjectureStats g_stats;

Poly poly_det3(const std::array<std::array<Poly, 3>, 3>& a) {
    Poly acc(*a[0][0].F);
    for (int j = 0; j < 3; ++j) {
        int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
        acc = acc + a[0][j] * (a[1][j1] * a[2][j2] + a[1][j2] * a[2][j1]);
    }
    return acc;
}

Poly poly_det4(const std::array<std::array<Poly, 4>, 4>& a) {
    Poly acc(*a[0][0].F);
    for (int col = 0; col < 4; ++col) {
        std::array<std::array<Poly, 3>, 3> minor{{{Poly(*a[0][0].F), Poly(*a[0][0].F), Poly(*a[0][0].F)},
                                                  {Poly(*a[0][0].F), Poly(*a[0][0].F), Poly(*a[0][0].F)},
                                                  {Poly(*a[0][0].F), Poly(*a[0][0].F), Poly(*a[0][0].F)}}};
        for (int i = 1; i < 4; ++i) {
            int jj = 0;
            for (int j = 0; j < 4; ++j) {
                if (j == col) continue;
                minor[i - 1][jj++] = a[i][j];
            }
        }
        acc = acc + a[0][col] * poly_det3(minor);
    }
    return acc;
}

}  // namespace

const ConjectureStats& conjecture_stats() { return g_stats; }
void reset_conjecture_stats() { g_stats = ConjectureStats{}; }

std::vector<std::pair<FieldElem, FieldElem>> solve_equation(const EquationInstance& inst) {
    const FieldCtx& F = *inst.F;
    const std::uint32_t t = F.t(), th = t / 2;
    const Vec4& r = inst.Qp.v;
    const FieldElem r1 = r[0], r2 = r[1], r3 = r[2], r4 = r[3];
    const BiPoly &Kh = inst.Khat, &Lh = inst.Lhat, &Mh = inst.Mhat, &Nh = inst.Nhat;
    const BiPoly X1 = BiPoly::monomial(F, F.one(), 0, 1);

    // The four derived identities, cleared to polynomial form by the alpha
    // multipliers 2t+2, t+t/2+2, 2t+3 and 2t+t/2+2 respectively.
    std::array<BiPoly, 4> E = {
        (r2 * r3) * (Nh * Kh) + (r1 * r4) * (Mh * Lh),
        (r1 * F.pow(r3, th)) * (Lh * Lh.pow_half_t()) +
            F.pow(r2, th + 1) * (Mh.pow_half_t() * Kh),
        F.pow(r3, t + 1) * (Nh.pow_t() * Lh) + (r2 * F.pow(r4, t)) * (Mh.pow_t() * Mh),
        F.pow(r3, th + 1) * (Nh * Lh.pow_half_t() * X1) +
            (r4 * F.pow(r2, th)) * (Mh * Mh.pow_half_t() * X1)};

    // Linear system over F_q[alpha] in the unknowns X^1..X^4.
    std::array<std::array<Poly, 4>, 4> A{{{Poly(F), Poly(F), Poly(F), Poly(F)},
                                          {Poly(F), Poly(F), Poly(F), Poly(F)},
                                          {Poly(F), Poly(F), Poly(F), Poly(F)},
                                          {Poly(F), Poly(F), Poly(F), Poly(F)}}};
    std::array<Poly, 4> D = {Poly(F), Poly(F), Poly(F), Poly(F)};
    for (int i = 0; i < 4; ++i) {
        for (int n = 0; n < 4; ++n) A[i][n] = E[i].x_coefficient(n + 1);
        D[i] = E[i].x_coefficient(0);
    }

    ++g_stats.solves;
    Poly delta = poly_det4(A);
    if (delta.is_zero()) {
        // The determinant non-vanishing hypothesis fails for a small fraction
        // of frames at small q (rate roughly 1/q^2, observed down to q = 8
        // with all eight coordinates of P' and Q' nonzero). Stay complete by
        // trying every gamma in F_q^x; the verification loop below rejects
        // spurious candidates, so correctness is unaffected.
        ++g_stats.delta_identically_zero;
        std::vector<std::pair<FieldElem, FieldElem>> out;
        for (std::uint32_t bits = 1; bits < F.q(); ++bits) {
            FieldElem gamma = F.from_bits(bits);
            FieldElem lv = Lh.eval(gamma);
            if (lv.is_zero()) continue;
            FieldElem delta_val = sqrt_elem(F.inv(lv) * Mh.eval(gamma) * F.inv(r3) * r2);
            if (delta_val.is_zero()) continue;
            Vec4 image = inst.Pp.v * mprime_of(F, gamma) * inst.g * mprime_of(F, delta_val);
            if (image.is_zero()) continue;
            if (ProjPoint(image) == inst.Qp) out.emplace_back(gamma, delta_val);
        }
        return out;
    }

    std::array<Poly, 4> deltas = {Poly(F), Poly(F), Poly(F), Poly(F)};
    for (int n = 0; n < 4; ++n) {
        auto B = A;
        for (int i = 0; i < 4; ++i) B[i][n] = D[i];
        deltas[n] = poly_det4(B);
    }

    // Consistency of the Cramer solution with X^2 = (X^1)^2; fallbacks encode
    // X^3 = X^1 X^2 and X^4 = (X^2)^2. If every consistency polynomial
    // vanishes (possible when coordinates of P' are zero), all true solutions
    // are already among the roots of the determinant.
    Poly f = delta * deltas[1] + deltas[0] * deltas[0];
    if (f.is_zero()) {
        ++g_stats.f_identically_zero;
        f = delta * deltas[2] + deltas[0] * deltas[1];
        if (f.is_zero()) f = delta * deltas[3] + deltas[1] * deltas[1];
    } else {
        g_stats.max_deg_f = std::max(g_stats.max_deg_f, f.deg());
    }

    std::vector<FieldElem> candidates = f.is_zero() ? std::vector<FieldElem>{} : poly_roots(f);
    for (FieldElem z : poly_roots(delta)) candidates.push_back(z);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::pair<FieldElem, FieldElem>> out;
    for (FieldElem gamma : candidates) {
        if (gamma.is_zero()) continue;
        // beta = sqrt(L^-1 M r3^-1 r2); the alpha X clearing factors cancel.
        FieldElem lv = Lh.eval(gamma);
        if (lv.is_zero()) continue;
        FieldElem delta_val = sqrt_elem(F.inv(lv) * Mh.eval(gamma) * F.inv(r3) * r2);
        if (delta_val.is_zero()) continue;
        Vec4 image = inst.Pp.v * mprime_of(F, gamma) * inst.g * mprime_of(F, delta_val);
        if (image.is_zero()) continue;
        if (ProjPoint(image) == inst.Qp) out.emplace_back(gamma, delta_val);
    }
    return out;
}

// ---------- Las Vegas plumbing ----------

int lv_rounds(double eps, double phat) {
    return static_cast<int>(std::ceil(std::log(eps) / std::log(1.0 - phat)));
}

namespace {

const FieldCtx& field_of(const ProjPoint& P) { return *P.v[0].F; }

ExprPtr identity_expr() { return epow(egen(0), 0); }

ExprPtr ecomm(ExprPtr x, ExprPtr y) {
    return emul(emul(einv(x), einv(y)), emul(x, y));
}

Mat4 eval_expr(const ExprPtr& e, const std::vector<Mat4>& X) {
    SLP slp = SLP::compile(e);
    return evaluate_slp(slp, X, [](const Mat4& a, const Mat4& b) { return a * b; },
                        [](const Mat4& a) { return inverse(a); });
}

}  // namespace

std::optional<std::pair<Mat4, ExprPtr>> find_mapping_element(PrGenerator& prg,
                                                             const ProjPoint& P,
                                                             const ProjPoint& Q) {
    const FieldCtx& F = field_of(P);
    const long long qm1 = static_cast<long long>(F.q()) - 1;
    auto [hm, hexpr] = prg.next();
    auto [am, aexpr] = prg.next();
    if (am == identity(F)) return std::nullopt;
    if (mat_pow(am, qm1) != identity(F)) return std::nullopt;

    TorusDiag td = diagonalise_torus(am);
    Mat4 xinv = inverse(td.x);
    Mat4 g = conj(hm, xinv);  // h^(x^-1)
    ProjPoint Pp = P * xinv, Qp = Q * xinv;
    for (int i = 0; i < 4; ++i)
        if (Qp.v[i].is_zero()) return std::nullopt;

    EquationInstance inst(g, Pp, Qp);
    for (auto [gamma, delta] : solve_equation(inst)) {
        auto l = discrete_log(td.lambda, gamma);
        auto k = discrete_log(td.lambda, delta);
        if (!l || !k) continue;
        Mat4 result = mat_pow(am, static_cast<long long>(*l)) * hm *
                      mat_pow(am, static_cast<long long>(*k));
        if (P * result != Q) continue;
        ExprPtr w = emul(emul(epow(aexpr, static_cast<long long>(*l)), hexpr),
                         epow(aexpr, static_cast<long long>(*k)));
        return std::make_pair(result, w);
    }
    return std::nullopt;
}

std::optional<std::pair<Mat4, ExprPtr>> find_mapping_element_lv(PrGenerator& prg,
                                                                const ProjPoint& P,
                                                                const ProjPoint& Q,
                                                                double eps) {
    const FieldCtx& F = field_of(P);
    double phat = 1.0 / (12.0 * std::max(1.0, std::log(std::log(F.q()))) * 60.0);
    int rounds = lv_rounds(eps, phat);
    for (int i = 0; i < rounds; ++i)
        if (auto r = find_mapping_element(prg, P, Q)) return r;
    return std::nullopt;
}

std::optional<std::pair<Mat4, ExprPtr>> stabiliser_element(PrGenerator& prg,
                                                           const ProjPoint& P,
                                                           double eps) {
    auto [xm, xexpr] = prg.next();
    ProjPoint Q = P * xm;
    if (Q == P) return std::nullopt;
    auto y = find_mapping_element_lv(prg, Q, P, eps);
    if (!y) return std::nullopt;
    Mat4 g = xm * y->first;
    assert(P * g == P);
    return std::make_pair(g, emul(xexpr, y->second));
}

std::optional<std::pair<Mat4, ExprPtr>> stabiliser_element_lv(PrGenerator& prg,
                                                              const ProjPoint& P,
                                                              double eps) {
    int rounds = lv_rounds(eps, 0.5);
    for (int i = 0; i < rounds; ++i)
        if (auto r = stabiliser_element(prg, P, eps)) return r;
    return std::nullopt;
}

// ---------- preprocessing ----------

namespace {

bool is_lower_unitriangular(const FieldCtx& F, const Mat4& g) {
    for (int i = 0; i < 4; ++i) {
        if (g[i][i] != F.one()) return false;
        for (int j = i + 1; j < 4; ++j)
            if (!g[i][j].is_zero()) return false;
    }
    return true;
}

bool is_upper_unitriangular(const FieldCtx& F, const Mat4& g) {
    return is_lower_unitriangular(F, transpose(g));
}

bool unitriangular(const FieldCtx& F, Side side, const Mat4& g) {
    return side == Side::lower ? is_lower_unitriangular(F, g) : is_upper_unitriangular(F, g);
}

bool triangular(Side side, const Mat4& g) {
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            FieldElem e = (side == Side::lower) ? g[i][j] : g[j][i];
            if (!e.is_zero()) return false;
        }
    return true;
}

// S-parameters of a unipotent stabiliser element: S(a,b) carries a at (1,0)
// and b at (2,0); the upper family is its reversal.
FieldElem a_param(Side side, const Mat4& g) {
    return side == Side::lower ? g[1][0] : g[2][3];
}
FieldElem b_param(Side side, const Mat4& g) {
    return side == Side::lower ? g[2][0] : g[1][3];
}

bool has_order_four(const FieldCtx& F, const Mat4& c) {
    Mat4 c2 = c * c;
    return c2 != identity(F) && c2 * c2 == identity(F);
}

std::optional<StdSide> build_side(const StandardCopy& S, Side side,
                                  const std::pair<Mat4, ExprPtr>& c,
                                  const std::pair<Mat4, ExprPtr>& d) {
    const FieldCtx& F = S.field();
    const int n = F.n();
    TorusDiag td = diagonalise_torus(d.first);
    if (in_proper_subfield(td.lambda)) return std::nullopt;
    // Beyond the subfield test: demand the full torus, so that discrete logs
    // against mu below always exist.
    if (element_order(td.lambda) != F.q() - 1) return std::nullopt;

    StdSide out;
    out.d = d.first;
    out.d_expr = d.second;
    out.lambda = td.lambda;
    out.mu = d.first[1][1];
    out.x = td.x;

    Mat4 cur = c.first;
    for (int i = 1; i <= n; ++i) {
        cur = conj(cur, d.first);
        ExprPtr e = econj(c.second, epow(d.second, i));
        if (!unitriangular(F, side, cur)) return std::nullopt;
        out.gens.emplace_back(cur, e);
        out.gens.emplace_back(cur * cur, epow(e, 2));
        FieldElem ai = a_param(side, cur);
        FieldElem bi = b_param(side, cur * cur);
        if (gf2_solve(out.a_basis, ai)) return std::nullopt;  // dependent
        if (gf2_solve(out.b_basis, bi)) return std::nullopt;
        out.a_basis.push_back(ai);
        out.b_basis.push_back(bi);
    }
    return out;
}

}  // namespace

std::optional<StdGenCtx> preprocess(const StandardCopy& S, PrGenerator& prg, double eps) {
    const FieldCtx& F = S.field();
    const long long qm1 = static_cast<long long>(F.q()) - 1;

    auto a1 = stabiliser_element_lv(prg, S.p_inf(), eps);
    auto a2 = stabiliser_element_lv(prg, S.p_inf(), eps);
    auto b1 = stabiliser_element_lv(prg, S.p_zero(), eps);
    auto b2 = stabiliser_element_lv(prg, S.p_zero(), eps);
    if (!a1 || !a2 || !b1 || !b2) return std::nullopt;

    std::pair<Mat4, ExprPtr> c1 = {commutator(a1->first, a2->first),
                                   ecomm(a1->second, a2->second)};
    std::pair<Mat4, ExprPtr> c2 = {commutator(b1->first, b2->first),
                                   ecomm(b1->second, b2->second)};
    if (!has_order_four(F, c1.first) || !has_order_four(F, c2.first)) return std::nullopt;

    auto torus_pick = [&](const std::pair<Mat4, ExprPtr>& u,
                          const std::pair<Mat4, ExprPtr>& v)
        -> std::optional<std::pair<Mat4, ExprPtr>> {
        if (u.first != identity(F) && mat_pow(u.first, qm1) == identity(F)) return u;
        if (v.first != identity(F) && mat_pow(v.first, qm1) == identity(F)) return v;
        return std::nullopt;
    };
    auto d1 = torus_pick(*a1, *a2);
    auto d2 = torus_pick(*b1, *b2);
    if (!d1 || !d2) return std::nullopt;

    auto lower = build_side(S, Side::lower, c1, *d1);
    auto upper = build_side(S, Side::upper, c2, *d2);
    if (!lower || !upper) return std::nullopt;

    StdGenCtx ctx;
    ctx.S = &S;
    ctx.X = prg.gens();
    ctx.lower = std::move(*lower);
    ctx.upper = std::move(*upper);
    return ctx;
}

std::optional<StdGenCtx> preprocess_lv(const StandardCopy& S, PrGenerator& prg, double eps) {
    int rounds = lv_rounds(eps, 0.2);
    for (int i = 0; i < rounds; ++i)
        if (auto c = preprocess(S, prg, eps)) return c;
    return std::nullopt;
}

// ---------- rewriting ----------

ExprPtr express_in_stabiliser(const StdGenCtx& ctx, Side side, const Mat4& target) {
    const FieldCtx& F = ctx.S->field();
    const StdSide& sd = (side == Side::lower) ? ctx.lower : ctx.upper;
    if (!triangular(side, target))
        throw std::invalid_argument("target not in stabiliser");

    Mat4 resid = target;
    ExprPtr torus_expr;
    Mat4 torus_mat = identity(F);
    if (target[1][1] != F.one()) {
        auto l = discrete_log(sd.mu, target[1][1]);
        if (!l) throw std::invalid_argument("target not in stabiliser");
        torus_mat = mat_pow(sd.d, static_cast<long long>(*l));
        resid = target * inverse(torus_mat);
        torus_expr = epow(sd.d_expr, static_cast<long long>(*l));
    }
    if (!unitriangular(F, side, resid))
        throw std::invalid_argument("target not in stabiliser");

    FieldElem a = a_param(side, resid), b = b_param(side, resid);
    auto coords_a = gf2_solve(sd.a_basis, a);
    if (!coords_a) throw std::invalid_argument("target not in stabiliser");

    Mat4 prod_a = identity(F);
    ExprPtr expr_a;
    for (std::size_t i = 0; i < coords_a->size(); ++i) {
        if (!(*coords_a)[i]) continue;
        const auto& gen = sd.gens[2 * i];
        prod_a = prod_a * gen.first;
        expr_a = expr_a ? emul(expr_a, gen.second) : gen.second;
    }

    FieldElem b2 = b + b_param(side, prod_a);
    auto coords_b = gf2_solve(sd.b_basis, b2);
    if (!coords_b) throw std::invalid_argument("target not in stabiliser");

    Mat4 prod_b = identity(F);
    ExprPtr expr_b;
    for (std::size_t i = 0; i < coords_b->size(); ++i) {
        if (!(*coords_b)[i]) continue;
        const auto& gen = sd.gens[2 * i + 1];
        prod_b = prod_b * gen.first;
        expr_b = expr_b ? emul(expr_b, gen.second) : gen.second;
    }

    if (prod_a * prod_b * torus_mat != target)
        throw std::logic_error("stabiliser row reduction failed");

    ExprPtr out = expr_a;
    if (expr_b) out = out ? emul(out, expr_b) : expr_b;
    if (torus_expr) out = out ? emul(out, torus_expr) : torus_expr;
    return out ? out : identity_expr();
}

namespace {

Vec4 vec_scale(FieldElem c, const Vec4& v) {
    Vec4 out = v;
    for (int i = 0; i < 4; ++i) out[i] = c * v[i];
    return out;
}

Vec4 vec_add(const Vec4& u, const Vec4& v) {
    Vec4 out = u;
    for (int i = 0; i < 4; ++i) out[i] = u[i] + v[i];
    return out;
}

// All ovoid points fixed by g (eigenspace dimensions 1 and 2 arise for
// non-identity members; a projective line holds at most one ovoid point
// unless g = 1).
std::vector<ProjPoint> ovoid_fixed_points(const StandardCopy& S, const Mat4& g) {
    const FieldCtx& F = S.field();
    std::vector<ProjPoint> out;
    auto add = [&](const ProjPoint& p) {
        for (const ProjPoint& q : out)
            if (q == p) return;
        out.push_back(p);
    };
    for (const EigenPair& ep : eigen_data(g)) {
        if (ep.space.size() == 1) {
            ProjPoint p(ep.space[0]);
            if (S.ovoid_contains(p)) add(p);
        } else if (ep.space.size() == 2) {
            ProjPoint p2(ep.space[1]);
            if (S.ovoid_contains(p2)) add(p2);
            for (std::uint32_t s = 0; s < F.q(); ++s) {
                ProjPoint p(vec_add(ep.space[0], vec_scale(F.from_bits(s), ep.space[1])));
                if (S.ovoid_contains(p)) add(p);
            }
        }
    }
    return out;
}

// The unique radical element of the P_inf stabiliser mapping Q != P_inf to
// P_0: with Q = (. : q2 : q3 : 1), it is S(q3, q2).
Mat4 lower_mapper_to_pzero(const StandardCopy& S, const ProjPoint& Q) {
    return S.s_mat(Q.v[2], Q.v[1]);
}

// The unique radical element of the P_0 stabiliser mapping R != P_0 to
// P_inf: with R scaled to first coordinate 1, it is the upper S(w1, w2).
Mat4 upper_mapper_to_pinf(const StandardCopy& S, const ProjPoint& R) {
    const FieldCtx& F = S.field();
    FieldElem s = F.inv(R.v[0]);
    return S.u_mat(s * R.v[1], s * R.v[2]);
}

}  // namespace

std::optional<ExprPtr> element_to_slp(const StdGenCtx& ctx, PrGenerator& prg, const Mat4& g) {
    const StandardCopy& S = *ctx.S;
    const FieldCtx& F = S.field();
    if (!S.is_member_standard(g)) throw std::invalid_argument("not a member");

    auto [rm, rexpr] = prg.next();
    Mat4 w = g * rm;

    ExprPtr result;
    if (w == identity(F)) {
        result = einv(rexpr);
    } else {
        std::vector<ProjPoint> fixed = ovoid_fixed_points(S, w);
        if (fixed.empty()) return std::nullopt;

        std::optional<ProjPoint> Q;
        for (const ProjPoint& p : fixed)
            if (p != S.p_inf()) {
                Q = p;
                break;
            }

        if (!Q) {
            // w lies in the P_inf stabiliser; express it directly.
            result = emul(express_in_stabiliser(ctx, Side::lower, w), einv(rexpr));
        } else {
            Mat4 z1 = lower_mapper_to_pzero(S, *Q);
            assert(*Q * z1 == S.p_zero());
            ExprPtr z1e = express_in_stabiliser(ctx, Side::lower, z1);
            Mat4 y = conj(w, z1);  // fixes P_0, upper triangular
            FieldElem lambda = y[1][1];

            if (lambda.is_one()) {
                Mat4 z2 = inverse(y);
                ExprPtr z2e = express_in_stabiliser(ctx, Side::upper, z2);
                result = emul(econj(einv(z2e), einv(z1e)), einv(rexpr));
            } else {
                Mat4 mp = S.mprime(lambda);
                Mat4 z2 = inverse(y) * mp;
                ExprPtr z2e = express_in_stabiliser(ctx, Side::upper, z2);

                // h = [S(0, (x^t)^(1/4)), S(0,1)^T] has trace x = tr M'(lambda)
                // and is conjugate to M'(lambda).
                FieldElem x = trace(mp);
                FieldElem root = sqrt_elem(sqrt_elem(twist(x)));
                Mat4 lmat = S.s_mat(F.zero(), root);
                Mat4 umat = S.u_mat(F.zero(), F.one());
                ExprPtr le = express_in_stabiliser(ctx, Side::lower, lmat);
                ExprPtr ue = express_in_stabiliser(ctx, Side::upper, umat);
                Mat4 h = commutator(lmat, umat);
                ExprPtr he = ecomm(le, ue);
                if (trace(h) != x) throw std::logic_error("trace mismatch in rewriting");

                std::vector<ProjPoint> hf = ovoid_fixed_points(S, h);
                if (hf.size() != 2) throw std::logic_error("expected two fixed points");
                ProjPoint P1 = (hf[0] != S.p_inf()) ? hf[0] : hf[1];
                ProjPoint P2 = (hf[0] != S.p_inf()) ? hf[1] : hf[0];

                Mat4 amat = lower_mapper_to_pzero(S, P1);
                ExprPtr ae = express_in_stabiliser(ctx, Side::lower, amat);
                ProjPoint R = P2 * amat;
                Mat4 bmat = identity(F);
                ExprPtr be = identity_expr();
                if (R != S.p_inf()) {
                    bmat = upper_mapper_to_pinf(S, R);
                    assert(R * bmat == S.p_inf());
                    be = express_in_stabiliser(ctx, Side::upper, bmat);
                }

                Mat4 hab = conj(conj(h, amat), bmat);
                ExprPtr habe = econj(econj(he, ae), be);
                ExprPtr core;
                if (hab == mp)
                    core = emul(habe, einv(z2e));
                else if (hab == inverse(mp))
                    core = emul(einv(habe), einv(z2e));
                else
                    throw std::logic_error("conjugated element not in the torus");
                result = emul(econj(core, einv(z1e)), einv(rexpr));
            }
        }
    }

    if (eval_expr(result, ctx.X) != g) throw std::logic_error("rewriting verification failed");
    return result;
}

std::optional<ExprPtr> element_to_slp_lv(const StdGenCtx& ctx, PrGenerator& prg,
                                         const Mat4& g, double eps) {
    int rounds = lv_rounds(eps, 0.4);
    for (int i = 0; i < rounds; ++i)
        if (auto r = element_to_slp(ctx, prg, g)) return r;
    return std::nullopt;
}

}  // namespace sz
