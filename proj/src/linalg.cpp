#include "suzuki/linalg.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sz {

namespace {
const FieldCtx& fld(const Mat4& x) { return *x.a[0][0].F; }

std::vector<FieldElem> vec_of(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
Vec4 vec4_of(const std::vector<FieldElem>& v) {
    return Vec4{{v.at(0), v.at(1), v.at(2), v.at(3)}};
}
}  // namespace

bool Vec4::is_zero() const {
    return c[0].is_zero() && c[1].is_zero() && c[2].is_zero() && c[3].is_zero();
}

Vec4 zero_vec(const FieldCtx& F) {
    FieldElem z = F.zero();
    return Vec4{{z, z, z, z}};
}

Mat4 zero_mat(const FieldCtx& F) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] = F.zero();
    return m;
}

Mat4 identity(const FieldCtx& F) {
    Mat4 m = zero_mat(F);
    for (int i = 0; i < 4; ++i) m[i][i] = F.one();
    return m;
}

Mat4 operator*(const Mat4& x, const Mat4& y) {
    const FieldCtx& F = fld(x);
    Mat4 r = zero_mat(F);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            if (x[i][k].is_zero()) continue;
            for (int j = 0; j < 4; ++j) r[i][j] += x[i][k] * y[k][j];
        }
    return r;
}

Mat4 operator+(const Mat4& x, const Mat4& y) {
    Mat4 r = x;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] += y[i][j];
    return r;
}

Mat4 transpose(const Mat4& x) {
    Mat4 r = x;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] = x[j][i];
    return r;
}

Mat4 scalar_mul(FieldElem c, const Mat4& x) {
    Mat4 r = x;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] = c * x[i][j];
    return r;
}

FieldElem trace(const Mat4& x) { return x[0][0] + x[1][1] + x[2][2] + x[3][3]; }

namespace {
// 3x3 determinant of the submatrix avoiding row r and column c (char 2: no signs).
FieldElem minor3(const Mat4& x, int r, int c) {
    int ri[3], ci[3];
    for (int i = 0, k = 0; i < 4; ++i)
        if (i != r) ri[k++] = i;
    for (int j = 0, k = 0; j < 4; ++j)
        if (j != c) ci[k++] = j;
    auto e = [&](int i, int j) { return x[ri[i]][ci[j]]; };
    return e(0, 0) * (e(1, 1) * e(2, 2) + e(1, 2) * e(2, 1)) +
           e(0, 1) * (e(1, 0) * e(2, 2) + e(1, 2) * e(2, 0)) +
           e(0, 2) * (e(1, 0) * e(2, 1) + e(1, 1) * e(2, 0));
}
}  // namespace

FieldElem det(const Mat4& x) {
    FieldElem d = fld(x).zero();
    for (int j = 0; j < 4; ++j) d += x[0][j] * minor3(x, 0, j);
    return d;
}

Mat4 inverse(const Mat4& x) {
    const FieldCtx& F = fld(x);
    FieldElem d = det(x);
    if (d.is_zero()) throw std::runtime_error("inverse: singular matrix");
    FieldElem di = F.inv(d);
    Mat4 r = zero_mat(F);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[j][i] = di * minor3(x, i, j);
    return r;
}

Mat4 mat_pow(const Mat4& x, long long e) {
    const FieldCtx& F = fld(x);
    Mat4 base = e < 0 ? inverse(x) : x;
    unsigned long long k = e < 0 ? static_cast<unsigned long long>(-e)
                                 : static_cast<unsigned long long>(e);
    Mat4 acc = identity(F);
    while (k) {
        if (k & 1) acc = acc * base;
        base = base * base;
        k >>= 1;
    }
    return acc;
}

Mat4 conj(const Mat4& x, const Mat4& y) { return inverse(y) * x * y; }

Mat4 commutator(const Mat4& x, const Mat4& y) {
    return inverse(x) * inverse(y) * x * y;
}

Vec4 operator*(const Vec4& v, const Mat4& x) {
    const FieldCtx& F = *v[0].F;
    Vec4 r = zero_vec(F);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) r[j] += v[i] * x[i][j];
    return r;
}

long long mat_order(const Mat4& x, long long bound) {
    const Mat4 id = identity(fld(x));
    Mat4 p = x;
    for (long long k = 1; k <= bound; ++k) {
        if (p == id) return k;
        p = p * x;
    }
    return -1;
}

std::string mat_to_hex(const Mat4& x) {
    std::string s;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (!s.empty()) s += ' ';
            s += to_hex(x[i][j]);
        }
    return s;
}

Mat4 mat_from_hex(const FieldCtx& F, const std::string& line) {
    std::istringstream is(line);
    Mat4 r = zero_mat(F);
    std::string w;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (!(is >> w)) throw std::runtime_error("matrix parse: expected 16 entries");
            r[i][j] = from_hex(F, w);
        }
    return r;
}

ProjPoint::ProjPoint(const Vec4& raw) : v(raw) {
    const FieldCtx& F = *raw[0].F;
    int last = -1;
    for (int i = 3; i >= 0; --i)
        if (!v[i].is_zero()) {
            last = i;
            break;
        }
    if (last < 0) throw std::runtime_error("ProjPoint: zero vector");
    FieldElem s = F.inv(v[last]);
    for (int i = 0; i < 4; ++i) v[i] = s * v[i];
}

ProjPoint operator*(const ProjPoint& p, const Mat4& g) { return ProjPoint(p.v * g); }

// ---------- generic dense matrices ----------

MatN::MatN(const FieldCtx& f, int r, int c)
    : F(&f), rows(r), cols(c), a(static_cast<std::size_t>(r * c), f.zero()) {}

std::vector<int> rref(MatN& M) {
    const FieldCtx& F = *M.F;
    std::vector<int> pivots;
    int r = 0;
    for (int c = 0; c < M.cols && r < M.rows; ++c) {
        int p = -1;
        for (int i = r; i < M.rows; ++i)
            if (!M.at(i, c).is_zero()) {
                p = i;
                break;
            }
        if (p < 0) continue;
        if (p != r)
            for (int j = 0; j < M.cols; ++j) std::swap(M.at(p, j), M.at(r, j));
        FieldElem inv = F.inv(M.at(r, c));
        for (int j = 0; j < M.cols; ++j) M.at(r, j) = inv * M.at(r, j);
        for (int i = 0; i < M.rows; ++i) {
            if (i == r || M.at(i, c).is_zero()) continue;
            FieldElem f = M.at(i, c);
            for (int j = 0; j < M.cols; ++j) M.at(i, j) += f * M.at(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

std::vector<std::vector<FieldElem>> nullspace(const MatN& M) {
    const FieldCtx& F = *M.F;
    MatN R = M;
    std::vector<int> piv = rref(R);
    std::vector<bool> is_piv(static_cast<std::size_t>(M.cols), false);
    for (int c : piv) is_piv[static_cast<std::size_t>(c)] = true;
    std::vector<std::vector<FieldElem>> basis;
    for (int c = 0; c < M.cols; ++c) {
        if (is_piv[static_cast<std::size_t>(c)]) continue;
        std::vector<FieldElem> x(static_cast<std::size_t>(M.cols), F.zero());
        x[static_cast<std::size_t>(c)] = F.one();
        for (std::size_t r = 0; r < piv.size(); ++r)
            x[static_cast<std::size_t>(piv[r])] = R.at(static_cast<int>(r), c);
        basis.push_back(std::move(x));
    }
    return basis;
}

int rank(MatN M) { return static_cast<int>(rref(M).size()); }

std::vector<std::vector<FieldElem>> row_reduce(const FieldCtx& F,
                                               std::vector<std::vector<FieldElem>> rows,
                                               int dim) {
    MatN M(F, static_cast<int>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < dim; ++j) M.at(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
    std::vector<int> piv = rref(M);
    std::vector<std::vector<FieldElem>> out;
    for (std::size_t r = 0; r < piv.size(); ++r) {
        std::vector<FieldElem> v(static_cast<std::size_t>(dim), F.zero());
        for (int j = 0; j < dim; ++j) v[static_cast<std::size_t>(j)] = M.at(static_cast<int>(r), j);
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

MatN to_matn(const Mat4& g) {
    MatN M(fld(g), 4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M.at(i, j) = g[i][j];
    return M;
}

// det(xI + A) by permutation expansion (characteristic 2: det = permanent).
Poly char_poly_n(const MatN& A) {
    const FieldCtx& F = *A.F;
    int n = A.rows;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    Poly total(F, {});
    do {
        Poly term(F, {F.one()});
        for (int i = 0; i < n; ++i) {
            int j = perm[static_cast<std::size_t>(i)];
            Poly entry(F, {A.at(i, j)});
            if (i == j) entry = entry + Poly(F, {F.zero(), F.one()});
            term = term * entry;
        }
        total = total + term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

// Basis of rows v with v A = lambda v.
std::vector<std::vector<FieldElem>> left_eigenspace(const MatN& A, FieldElem lambda) {
    const FieldCtx& F = *A.F;
    MatN B(F, A.cols, A.rows);  // (A + lambda I)^T
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) {
            FieldElem e = A.at(i, j);
            if (i == j) e += lambda;
            B.at(j, i) = e;
        }
    return nullspace(B);
}

// Intersection of two row spaces given by bases.
std::vector<std::vector<FieldElem>> intersect_spaces(
    const FieldCtx& F, const std::vector<std::vector<FieldElem>>& U,
    const std::vector<std::vector<FieldElem>>& W, int dim) {
    if (U.empty() || W.empty()) return {};
    int k = static_cast<int>(U.size()), l = static_cast<int>(W.size());
    MatN M(F, dim, k + l);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < dim; ++i) M.at(i, j) = U[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    for (int j = 0; j < l; ++j)
        for (int i = 0; i < dim; ++i) M.at(i, k + j) = W[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    auto ker = nullspace(M);
    std::vector<std::vector<FieldElem>> rows;
    for (const auto& x : ker) {
        std::vector<FieldElem> v(static_cast<std::size_t>(dim), F.zero());
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < dim; ++i)
                v[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(j)] * U[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        rows.push_back(std::move(v));
    }
    return row_reduce(F, rows, dim);
}

// Maximal simultaneous left-eigenspaces of a family of square matrices:
// each returned space is (an intersection of) one eigenspace per matrix.
std::vector<std::vector<std::vector<FieldElem>>> common_eigenspaces(
    const FieldCtx& F, const std::vector<MatN>& mats, int dim) {
    std::vector<std::vector<FieldElem>> full;
    for (int i = 0; i < dim; ++i) {
        std::vector<FieldElem> e(static_cast<std::size_t>(dim), F.zero());
        e[static_cast<std::size_t>(i)] = F.one();
        full.push_back(std::move(e));
    }
    std::vector<std::vector<std::vector<FieldElem>>> spaces{full};
    for (const MatN& A : mats) {
        Poly cp = char_poly_n(A);
        std::vector<FieldElem> vals = poly_roots(cp);
        std::vector<std::vector<std::vector<FieldElem>>> next;
        for (const auto& W : spaces)
            for (FieldElem lam : vals) {
                auto E = left_eigenspace(A, lam);
                auto I = intersect_spaces(F, W, E, dim);
                if (!I.empty()) next.push_back(std::move(I));
            }
        spaces = std::move(next);
        if (spaces.empty()) break;
    }
    return spaces;
}

}  // namespace

Poly char_poly(const Mat4& g) {
    const FieldCtx& F = fld(g);
    auto m2 = [&](int i, int j) {
        return g[i][i] * g[j][j] + g[i][j] * g[j][i];
    };
    FieldElem c2 = m2(0, 1) + m2(0, 2) + m2(0, 3) + m2(1, 2) + m2(1, 3) + m2(2, 3);
    FieldElem c1 = F.zero();
    // principal 3x3 minors: delete row/col k
    for (int k = 0; k < 4; ++k) c1 += minor3(g, k, k);
    Poly p(F, {det(g), c1, c2, trace(g), F.one()});
    p.normalize();
    return p;
}

std::vector<EigenPair> eigen_data(const Mat4& g) {
    
    std::vector<FieldElem> vals = poly_roots(char_poly(g));
    std::vector<EigenPair> out;
    for (FieldElem lam : vals) {
        auto basis = left_eigenspace(to_matn(g), lam);
        std::vector<Vec4> rows;
        for (const auto& v : basis) rows.push_back(vec4_of(v));
        out.push_back(EigenPair{lam, std::move(rows)});
    }
    std::sort(out.begin(), out.end(),
              [](const EigenPair& a, const EigenPair& b) { return a.value.v < b.value.v; });
    return out;
}

TorusDiag diagonalise_torus(const Mat4& a) {
    const FieldCtx& F = fld(a);
    if (a == identity(F)) throw std::runtime_error("diagonalise_torus: identity input");
    if (!(mat_pow(a, static_cast<long long>(F.q()) - 1) == identity(F)))
        throw std::runtime_error("not torus-conjugate");
    auto eig = eigen_data(a);
    if (eig.size() != 4)
        throw std::runtime_error("not torus-conjugate");
    auto has = [&](FieldElem x) {
        for (const auto& e : eig)
            if (e.value == x) return true;
        return false;
    };
    long long t = static_cast<long long>(F.t());
    FieldElem lambda = F.zero();
    bool found = false;
    for (const auto& cand : eig) {  // sorted ascending: first match = smallest
        FieldElem lam = cand.value;
        if (has(F.pow(lam, t + 1)) && has(lam) && has(F.inv(lam)) &&
            has(F.pow(lam, -(t + 1)))) {
            lambda = lam;
            found = true;
            break;
        }
    }
    if (!found) throw std::runtime_error("not torus-conjugate");
    FieldElem want[4] = {F.pow(lambda, t + 1), lambda, F.inv(lambda),
                         F.pow(lambda, -(t + 1))};
    Mat4 x = zero_mat(F);
    for (int i = 0; i < 4; ++i) {
        const EigenPair* ep = nullptr;
        for (const auto& e : eig)
            if (e.value == want[i]) ep = &e;
        if (!ep || ep->space.size() != 1)
            throw std::runtime_error("not torus-conjugate");
        Vec4 v = ep->space[0];
        FieldElem s = F.zero();
        for (int j = 0; j < 4; ++j)
            if (!v[j].is_zero()) {
                s = F.inv(v[j]);
                break;
            }
        for (int j = 0; j < 4; ++j) x[i][j] = s * v[j];
    }
    return TorusDiag{lambda, x};
}

std::optional<Mat4> invariant_symplectic_form(const std::vector<Mat4>& gens) {
    if (gens.empty()) return std::nullopt;
    const FieldCtx& F = fld(gens[0]);
    // unknowns M_ij, index 4i+j; conditions g M g^T + M = 0, M_ii = 0, M_ij = M_ji
    std::vector<std::vector<FieldElem>> eqs;
    for (const Mat4& g : gens)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                std::vector<FieldElem> row(16, F.zero());
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) row[static_cast<std::size_t>(4 * k + l)] += g[i][k] * g[j][l];
                row[static_cast<std::size_t>(4 * i + j)] += F.one();
                eqs.push_back(std::move(row));
            }
    for (int i = 0; i < 4; ++i) {
        std::vector<FieldElem> row(16, F.zero());
        row[static_cast<std::size_t>(5 * i)] = F.one();
        eqs.push_back(std::move(row));
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            std::vector<FieldElem> row(16, F.zero());
            row[static_cast<std::size_t>(4 * i + j)] = F.one();
            row[static_cast<std::size_t>(4 * j + i)] = F.one();
            eqs.push_back(std::move(row));
        }
    MatN A(F, static_cast<int>(eqs.size()), 16);
    for (std::size_t r = 0; r < eqs.size(); ++r)
        for (int c = 0; c < 16; ++c) A.at(static_cast<int>(r), c) = eqs[r][static_cast<std::size_t>(c)];
    auto ker = nullspace(A);
    if (ker.empty()) return std::nullopt;
    auto basis = row_reduce(F, ker, 16);
    Mat4 M = zero_mat(F);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M[i][j] = basis[0][static_cast<std::size_t>(4 * i + j)];
    return M;
}

Mat4 symplectic_basis(const Mat4& M) {
    const FieldCtx& F = fld(M);
    if (det(M).is_zero()) throw std::runtime_error("symplectic_basis: degenerate form");
    auto b = [&](const Vec4& u, const Vec4& v) {
        FieldElem s = F.zero();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s += u[i] * M[i][j] * v[j];
        return s;
    };
    // extract two hyperbolic pairs (u1,w1), (u2,w2) w.r.t. the form M
    std::vector<Vec4> pool;
    for (int i = 0; i < 4; ++i) {
        Vec4 e = zero_vec(F);
        e[i] = F.one();
        pool.push_back(e);
    }
    auto extract_pair = [&](std::vector<Vec4>& vecs) {
        Vec4 u = vecs[0];
        int wi = -1;
        for (std::size_t k = 1; k < vecs.size(); ++k)
            if (!b(u, vecs[k]).is_zero()) {
                wi = static_cast<int>(k);
                break;
            }
        if (wi < 0) throw std::runtime_error("symplectic_basis: degenerate form");
        Vec4 w = vecs[static_cast<std::size_t>(wi)];
        FieldElem s = F.inv(b(u, w));
        for (int i = 0; i < 4; ++i) w[i] = s * w[i];
        std::vector<Vec4> rest;
        for (std::size_t k = 1; k < vecs.size(); ++k) {
            if (static_cast<int>(k) == wi) continue;
            Vec4 v = vecs[k];
            FieldElem cu = b(v, w), cw = b(v, u);
            for (int i = 0; i < 4; ++i) v[i] += cu * u[i] + cw * w[i];
            rest.push_back(v);
        }
        vecs = rest;
        return std::pair<Vec4, Vec4>{u, w};
    };
    auto [u1, w1] = extract_pair(pool);
    // the residual vectors might have become dependent; re-reduce
    {
        std::vector<std::vector<FieldElem>> rows;
        for (const auto& v : pool) rows.push_back(vec_of(v));
        auto red = row_reduce(F, rows, 4);
        pool.clear();
        for (const auto& r : red) pool.push_back(vec4_of(r));
    }
    if (pool.size() != 2) throw std::runtime_error("symplectic_basis: degenerate form");
    auto [u2, w2] = extract_pair(pool);
    Mat4 Y = zero_mat(F);
    for (int j = 0; j < 4; ++j) {
        Y[0][j] = u1[j];
        Y[1][j] = u2[j];
        Y[2][j] = w2[j];
        Y[3][j] = w1[j];
    }
    return inverse(Y);  // rows of Y are a symplectic basis for M, so Y M Y^T = J
}

std::vector<Mat4> module_hom_space(const std::vector<Mat4>& gensA,
                                   const std::vector<Mat4>& gensB) {
    if (gensA.size() != gensB.size())
        throw std::runtime_error("module_hom_space: generator lists differ in length");
    const FieldCtx& F = fld(gensA.at(0));
    std::vector<std::vector<FieldElem>> eqs;
    for (std::size_t k = 0; k < gensA.size(); ++k) {
        const Mat4& A = gensA[k];
        const Mat4& B = gensB[k];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                std::vector<FieldElem> row(16, F.zero());
                for (int l = 0; l < 4; ++l) {
                    row[static_cast<std::size_t>(4 * l + j)] += A[i][l];
                    row[static_cast<std::size_t>(4 * i + l)] += B[l][j];
                }
                eqs.push_back(std::move(row));
            }
    }
    MatN M(F, static_cast<int>(eqs.size()), 16);
    for (std::size_t r = 0; r < eqs.size(); ++r)
        for (int c = 0; c < 16; ++c) M.at(static_cast<int>(r), c) = eqs[r][static_cast<std::size_t>(c)];
    auto ker = nullspace(M);
    auto basis = row_reduce(F, ker, 16);
    std::vector<Mat4> out;
    for (const auto& v : basis) {
        Mat4 T = zero_mat(F);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) T[i][j] = v[static_cast<std::size_t>(4 * i + j)];
        out.push_back(T);
    }
    return out;
}

MatN ext_square(const Mat4& g) {
    const FieldCtx& F = fld(g);
    static const int P[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    MatN E(F, 6, 6);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
            int i = P[r][0], j = P[r][1], k = P[c][0], l = P[c][1];
            E.at(r, c) = g[i][k] * g[j][l] + g[i][l] * g[j][k];
        }
    return E;
}

namespace {

// Recover the 2-dim subspace from a decomposable vector of the exterior
// square: {x : x wedge p = 0}.
std::optional<std::vector<std::vector<FieldElem>>> plane_of_wedge(
    const FieldCtx& F, const std::vector<FieldElem>& p) {
    auto pc = [&](int i, int j) {  // p_{ij}, i<j in basis order 01,02,03,12,13,23
        static const int idx[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
        return p[static_cast<std::size_t>(idx[i][j])];
    };
    MatN M(F, 4, 4);  // one row per triple {j,k,l}
    static const int T[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    for (int r = 0; r < 4; ++r) {
        int j = T[r][0], k = T[r][1], l = T[r][2];
        M.at(r, j) = pc(k, l);
        M.at(r, k) = pc(j, l);
        M.at(r, l) = pc(j, k);
    }
    auto ker = nullspace(M);
    if (ker.size() != 2) return std::nullopt;  // p not decomposable
    return row_reduce(F, ker, 4);
}

bool plucker_zero(const std::vector<FieldElem>& p) {
    return (p[0] * p[5] + p[1] * p[4] + p[2] * p[3]).is_zero();
}

bool space_invariant(const std::vector<std::vector<FieldElem>>& W,
                     const std::vector<Mat4>& gens) {
    const FieldCtx& F = *gens[0].a[0][0].F;
    for (const Mat4& g : gens) {
        std::vector<std::vector<FieldElem>> img = W;
        for (auto& w : img) w = vec_of(vec4_of(w) * g);
        auto uni = W;
        for (auto& w : img) uni.push_back(w);
        if (row_reduce(F, uni, 4).size() != W.size()) return false;
    }
    return true;
}

}  // namespace

std::optional<std::vector<Vec4>> find_submodule(const std::vector<Mat4>& gens) {
    if (gens.empty()) return std::nullopt;
    const FieldCtx& F = fld(gens[0]);
    std::vector<MatN> acting, acting_t;
    for (const Mat4& g : gens) {
        acting.push_back(to_matn(g));
        acting_t.push_back(to_matn(transpose(g)));
    }
    auto wrap = [&](std::vector<std::vector<FieldElem>> rows) {
        std::vector<Vec4> out;
        for (const auto& r : rows) out.push_back(vec4_of(r));
        return out;
    };
    // dimension 1: common left eigenvector
    for (const auto& W : common_eigenspaces(F, acting, 4))
        return wrap({W[0]});
    // dimension 3: common eigenvector of the transposed action gives a fixed
    // hyperplane {v : v.u = 0}
    for (const auto& W : common_eigenspaces(F, acting_t, 4)) {
        MatN M(F, 1, 4);
        for (int j = 0; j < 4; ++j) M.at(0, j) = W[0][static_cast<std::size_t>(j)];
        auto ker = nullspace(M);
        return wrap(row_reduce(F, ker, 4));
    }
    // dimension 2: decomposable common eigenvector of the exterior square
    std::vector<MatN> ext;
    for (const Mat4& g : gens) ext.push_back(ext_square(g));
    for (const auto& W : common_eigenspaces(F, ext, 6)) {
        std::vector<std::vector<FieldElem>> found;
        if (W.size() == 1) {
            if (plucker_zero(W[0])) found.push_back(W[0]);
        } else {
            // search the (small) projective space of the eigenspace for a
            // point on the Plucker quadric
            std::size_t d = W.size();
            // enumerate normalized projective representatives
            std::vector<FieldElem> all;
            for (std::uint32_t v = 0; v < F.q(); ++v) all.push_back(F.from_bits(v));
            std::function<void(std::size_t, std::vector<FieldElem>&)> rec;
            bool done = false;
            rec = [&](std::size_t lead, std::vector<FieldElem>& coeff) {
                if (done) return;
                // coeff[lead] = 1, coeff[<lead] = 0, vary the rest
                std::function<void(std::size_t)> vary = [&](std::size_t pos) {
                    if (done) return;
                    if (pos == d) {
                        std::vector<FieldElem> p(6, F.zero());
                        for (std::size_t i = 0; i < d; ++i)
                            for (int j = 0; j < 6; ++j)
                                p[static_cast<std::size_t>(j)] += coeff[i] * W[i][static_cast<std::size_t>(j)];
                        if (plucker_zero(p)) {
                            bool nz = false;
                            for (const auto& x : p) nz = nz || !x.is_zero();
                            if (nz) {
                                found.push_back(p);
                                done = true;
                            }
                        }
                        return;
                    }
                    for (const FieldElem& x : all) {
                        coeff[pos] = x;
                        vary(pos + 1);
                        if (done) return;
                    }
                };
                vary(lead + 1);
            };
            for (std::size_t lead = 0; lead < d && !done; ++lead) {
                std::vector<FieldElem> coeff(d, F.zero());
                coeff[lead] = F.one();
                rec(lead, coeff);
            }
        }
        if (!found.empty()) {
            auto plane = plane_of_wedge(F, found[0]);
            if (plane && space_invariant(*plane, gens)) return wrap(*plane);
        }
    }
    return std::nullopt;
}

bool is_absolutely_irreducible(const std::vector<Mat4>& gens) {
    if (gens.empty()) return false;
    const FieldCtx& F = fld(gens[0]);
    // Burnside: absolutely irreducible iff the enveloping algebra is all of
    // the 4x4 matrices. Close the span of words under left multiplication.
    std::vector<std::vector<FieldElem>> basis;  // row-reduced, 16-dim coords
    std::vector<Mat4> reps;
    auto add = [&](const Mat4& m) {
        std::vector<FieldElem> v(16, F.zero());
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) v[static_cast<std::size_t>(4 * i + j)] = m[i][j];
        auto trial = basis;
        trial.push_back(v);
        auto red = row_reduce(F, trial, 16);
        if (red.size() > basis.size()) {
            basis = std::move(red);
            reps.push_back(m);
            return true;
        }
        return false;
    };
    add(identity(F));
    for (const Mat4& g : gens) add(g);
    for (std::size_t k = 0; k < reps.size() && basis.size() < 16; ++k)
        for (const Mat4& g : gens) {
            if (basis.size() >= 16) break;
            add(g * reps[k]);
        }
    return basis.size() == 16;
}

bool written_over_subfield(const std::vector<Mat4>& gens, int d) {
    const FieldCtx& F = fld(gens.at(0));
    int n = F.n();
    if (d <= 0 || d >= n || n % d != 0)
        throw std::runtime_error("written_over_subfield: d must be a proper divisor of n");
    auto in_sub = [&](FieldElem x) {
        return F.pow(x, static_cast<long long>(1) << d) == x;
    };
    for (const Mat4& g : gens)
        if (!in_sub(trace(g))) return false;
    for (const Mat4& g : gens)
        for (const Mat4& h : gens)
            if (!in_sub(trace(g * h))) return false;
    std::mt19937_64 rng(0x5eedf00du);
    Mat4 w = gens[0];
    for (int k = 0; k < 64; ++k) {
        w = w * gens[rng() % gens.size()];
        if (rng() & 1) w = inverse(w);
        if (!in_sub(trace(w))) return false;
    }
    return true;
}

SubmoduleChain composition_series(const std::vector<Mat4>& gens) {
    const FieldCtx& F = fld(gens.at(0));
    SubmoduleChain chain;
    std::vector<std::vector<FieldElem>> sub;  // current invariant subspace, row-reduced
    while (sub.size() < 4) {
        int k = static_cast<int>(sub.size());
        int qdim = 4 - k;
        // complement basis: coordinate vectors at non-pivot columns
        std::vector<bool> piv(4, false);
        for (const auto& r : sub)
            for (int j = 0; j < 4; ++j)
                if (r[static_cast<std::size_t>(j)].is_one()) {
                    piv[static_cast<std::size_t>(j)] = true;
                    break;
                }
        std::vector<int> comp;
        for (int j = 0; j < 4; ++j)
            if (!piv[static_cast<std::size_t>(j)]) comp.push_back(j);
        // full basis rows: sub then complement coordinate vectors
        MatN B(F, 4, 4);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < 4; ++j) B.at(i, j) = sub[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        for (int i = 0; i < qdim; ++i) B.at(k + i, comp[static_cast<std::size_t>(i)]) = F.one();
        Mat4 Bm = zero_mat(F);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) Bm[i][j] = B.at(i, j);
        Mat4 Binv = inverse(Bm);
        // quotient action: last qdim coordinates of (complement row * g) in basis B
        std::vector<MatN> quo;
        for (const Mat4& g : gens) {
            Mat4 gb = Bm * g * Binv;
            MatN Q(F, qdim, qdim);
            for (int i = 0; i < qdim; ++i)
                for (int j = 0; j < qdim; ++j) Q.at(i, j) = gb[k + i][k + j];
            quo.push_back(std::move(Q));
        }
        auto spaces = common_eigenspaces(F, quo, qdim);
        if (spaces.size() != 1 || spaces[0].size() != 1)
            throw std::runtime_error("not uniserial");
        // lift to original coordinates
        std::vector<FieldElem> lifted(4, F.zero());
        for (int i = 0; i < qdim; ++i)
            for (int j = 0; j < 4; ++j)
                lifted[static_cast<std::size_t>(j)] += spaces[0][0][static_cast<std::size_t>(i)] * Bm[k + i][j];
        sub.push_back(lifted);
        sub = row_reduce(F, sub, 4);
        std::vector<Vec4> rows;
        for (const auto& r : sub) rows.push_back(vec4_of(r));
        chain.spaces.push_back(std::move(rows));
    }
    return chain;
}

std::optional<std::vector<int>> gf2_solve(const std::vector<FieldElem>& basis,
                                          FieldElem target) {
    struct Row {
        std::uint32_t bits;
        std::uint64_t combo;
    };
    std::vector<Row> pivots;
    auto reduce = [&](std::uint32_t bits, std::uint64_t combo) {
        for (const Row& p : pivots) {
            std::uint32_t top = p.bits;
            std::uint32_t msb = 1u << (31 - __builtin_clz(top));
            if (bits & msb) {
                bits ^= p.bits;
                combo ^= p.combo;
            }
        }
        return Row{bits, combo};
    };
    for (std::size_t i = 0; i < basis.size(); ++i) {
        Row r = reduce(basis[i].v, 1ull << i);
        if (r.bits) {
            pivots.push_back(r);
            std::sort(pivots.begin(), pivots.end(),
                      [](const Row& a, const Row& b) { return a.bits > b.bits; });
        }
    }
    Row r = reduce(target.v, 0);
    if (r.bits) return std::nullopt;
    std::vector<int> out(basis.size(), 0);
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (r.combo & (1ull << i)) out[i] = 1;
    return out;
}

}  // namespace sz
