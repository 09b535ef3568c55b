#include "suzuki/szstd.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace sz {

StandardCopy::StandardCopy(const FieldCtx& F) : F_(F) {
    J_ = zero_mat(F_);
    for (int i = 0; i < 4; ++i) J_[i][3 - i] = F_.one();
    // Calibrate the section basis Y: on the calibration generators g the
    // section action A_g must become pi(g) (entrywise twist), so that
    // psi(g) = (Y A_g Y^-1)^(2^m entrywise) fixes them.
    std::vector<Mat4> gens = std_gens();
    std::vector<Mat4> twisted, actions;
    for (const Mat4& g : gens) {
        Mat4 tg = g;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) tg[i][j] = twist(g[i][j]);
        twisted.push_back(tg);
        actions.push_back(section_action(g));
    }
    std::vector<Mat4> hom = module_hom_space(twisted, actions);
    if (hom.size() != 1 || det(hom[0]).is_zero())
        throw std::logic_error("psi calibration failed");
    Y_ = hom[0];
    Yinv_ = inverse(Y_);
}

const StandardCopy& StandardCopy::get(int m) {
    static std::map<int, std::unique_ptr<StandardCopy>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[m];
    if (!slot) slot = std::make_unique<StandardCopy>(FieldCtx::get(m));
    return *slot;
}

Mat4 StandardCopy::s_mat(FieldElem a, FieldElem b) const {
    Mat4 g = identity(F_);
    FieldElem pa = twist(a), pb = twist(b);
    g[1][0] = a;
    g[2][0] = b;
    g[2][1] = pa;
    g[3][0] = a * a * pa + a * b + pb;
    g[3][1] = a * pa + b;
    g[3][2] = a;
    return g;
}

Mat4 StandardCopy::u_mat(FieldElem a, FieldElem b) const {
    return t_mat() * s_mat(a, b) * t_mat();
}

Mat4 StandardCopy::m_mat(FieldElem c) const {
    if (c.is_zero()) throw std::domain_error("m_mat(0)");
    long long e = 1ll << F_.m();  // 2^m
    Mat4 g = zero_mat(F_);
    g[0][0] = F_.pow(c, 1 + e);
    g[1][1] = F_.pow(c, e);
    g[2][2] = F_.pow(c, -e);
    g[3][3] = F_.pow(c, -1 - e);
    return g;
}

Mat4 StandardCopy::mprime(FieldElem lambda) const {
    if (lambda.is_zero()) throw std::domain_error("mprime(0)");
    long long t = static_cast<long long>(F_.t());
    Mat4 g = zero_mat(F_);
    g[0][0] = F_.pow(lambda, t + 1);
    g[1][1] = lambda;
    g[2][2] = F_.inv(lambda);
    g[3][3] = F_.pow(lambda, -t - 1);
    return g;
}

Mat4 StandardCopy::t_mat() const {
    Mat4 g = zero_mat(F_);
    for (int i = 0; i < 4; ++i) g[i][3 - i] = F_.one();
    return g;
}

std::vector<Mat4> StandardCopy::std_gens() const {
    return {s_mat(F_.one(), F_.zero()), s_mat(F_.zero(), F_.one()),
            m_mat(F_.generator()), t_mat()};
}

ProjPoint StandardCopy::p_inf() const {
    Vec4 v = zero_vec(F_);
    v[0] = F_.one();
    return ProjPoint(v);
}

ProjPoint StandardCopy::p_zero() const {
    Vec4 v = zero_vec(F_);
    v[3] = F_.one();
    return ProjPoint(v);
}

ProjPoint StandardCopy::ovoid_point(FieldElem a, FieldElem b) const {
    Vec4 v = zero_vec(F_);
    v[0] = a * b + twist(a) * a * a + twist(b);
    v[1] = b;
    v[2] = a;
    v[3] = F_.one();
    return ProjPoint(v);
}

bool StandardCopy::ovoid_contains(const ProjPoint& p) const {
    if (p == p_inf()) return true;
    if (!p.v[3].is_one()) return false;  // normalized, last coord zero but not P_inf
    FieldElem a = p.v[2], b = p.v[1];
    return p == ovoid_point(a, b);
}

bool StandardCopy::is_symplectic(const Mat4& g) const {
    return g * J_ * transpose(g) == J_;
}

Mat4 StandardCopy::section_action(const Mat4& g) const {
    // Exterior square on e12,e13,e14,e23,e24,e34; w = e14 + e23 is fixed and
    // w-perp is {x : x_2 = x_3}; the section basis is the classes of
    // e12, e13, e24, e34, on which the e14/e23 components vanish mod w.
    MatN E = ext_square(g);
    static const int sec[4] = {0, 1, 4, 5};
    Mat4 A = zero_mat(F_);
    for (int i = 0; i < 4; ++i) {
        int r = sec[i];
        if (!(E.at(r, 2) == E.at(r, 3)))
            throw std::logic_error("section not invariant: input not symplectic");
        for (int j = 0; j < 4; ++j) A[i][j] = E.at(r, sec[j]);
    }
    return A;
}

Mat4 StandardCopy::psi(const Mat4& g) const {
    if (!is_symplectic(g)) throw std::domain_error("not symplectic");
    Mat4 A = Y_ * section_action(g) * Yinv_;
    long long e = 1ll << F_.m();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (!A[i][j].is_zero()) A[i][j] = F_.pow(A[i][j], e);
    return A;
}

bool StandardCopy::is_member_standard(const Mat4& g) const {
    if (!det(g).is_one()) return false;
    if (!is_symplectic(g)) return false;
    return psi(g) == g;
}

std::vector<Mat4> enumerate_sz8(const StandardCopy& S) {
    const FieldCtx& F = S.field();
    if (F.q() != 8) throw std::domain_error("enumeration oracle is q = 8 only");
    std::vector<Mat4> out;
    out.reserve(29120);
    std::vector<Mat4> bh;  // the Borel FH: S(a,b) M(c)
    for (std::uint32_t a = 0; a < 8; ++a)
        for (std::uint32_t b = 0; b < 8; ++b) {
            Mat4 s = S.s_mat(F.from_bits(a), F.from_bits(b));
            for (std::uint32_t c = 1; c < 8; ++c) bh.push_back(s * S.m_mat(F.from_bits(c)));
        }
    for (const Mat4& g : bh) out.push_back(g);
    Mat4 T = S.t_mat();
    for (const Mat4& g : bh) {
        Mat4 gt = g * T;
        for (std::uint32_t a = 0; a < 8; ++a)
            for (std::uint32_t b = 0; b < 8; ++b)
                out.push_back(gt * S.s_mat(F.from_bits(a), F.from_bits(b)));
    }
    return out;
}

}  // namespace sz
