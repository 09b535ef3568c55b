#include "suzuki/field.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace sz {

namespace {

const FieldCtx* ctx_of(FieldElem a, FieldElem b) {
    const FieldCtx* F = a.F ? a.F : b.F;
    if (!F) throw std::logic_error("field element without context");
    return F;
}

// Fixed irreducible trinomials/pentanomials per extension degree n = 2m+1.
// These are part of the public serialization contract.
std::uint32_t modulus_for(int n) {
    switch (n) {
        case 3: return 0b1011;            // x^3 + x + 1
        case 5: return 0b100101;          // x^5 + x^2 + 1
        case 7: return 0b10000011;        // x^7 + x + 1
        case 9: return 0b1000010001;      // x^9 + x^4 + 1
        case 11: return 0b100000000101;   // x^11 + x^2 + 1
        default: throw std::invalid_argument("unsupported extension degree");
    }
}

double g_dlog_seconds = 0.0;

}  // namespace

FieldElem operator+(FieldElem a, FieldElem b) { return ctx_of(a, b)->add(a, b); }
FieldElem operator*(FieldElem a, FieldElem b) { return ctx_of(a, b)->mul(a, b); }
FieldElem& operator+=(FieldElem& a, FieldElem b) { return a = a + b; }
FieldElem& operator*=(FieldElem& a, FieldElem b) { return a = a * b; }

FieldCtx::FieldCtx(int m) : m_(m), n_(2 * m + 1) {
    if (m < 1 || m > 5) throw std::invalid_argument("field parameter m must be in [1,5]");
    q_ = 1u << n_;
    t_ = 1u << (m + 1);
    modulus_ = modulus_for(n_);
    // Fixed primitive element: the smallest bit pattern of full order.
    gen_ = zero();
    for (std::uint32_t cand = 2; cand < q_; ++cand) {
        FieldElem g = from_bits(cand);
        if (element_order(g) == q_ - 1) {
            gen_ = g;
            break;
        }
    }
    if (gen_.is_zero()) throw std::logic_error("no primitive element found");
}

const FieldCtx& FieldCtx::get(int m) {
    static std::map<int, std::unique_ptr<FieldCtx>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[m];
    if (!slot) slot = std::make_unique<FieldCtx>(m);  // self-referential gen_: no copies
    return *slot;
}

FieldElem FieldCtx::mul(FieldElem a, FieldElem b) const {
    // Carry-less shift-and-xor multiply, reduced on the fly.
    std::uint32_t acc = 0, x = a.v, y = b.v;
    while (y) {
        if (y & 1) acc ^= x;
        y >>= 1;
        x <<= 1;
        if (x & q_) x ^= modulus_;
    }
    return {this, acc};
}

FieldElem FieldCtx::pow(FieldElem a, long long e) const {
    if (a.v == 0) {
        if (e <= 0) throw std::domain_error("0 raised to non-positive power");
        return zero();
    }
    long long ord = q_ - 1;
    e %= ord;
    if (e < 0) e += ord;
    FieldElem r = one(), base = a;
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

FieldElem FieldCtx::inv(FieldElem a) const {
    if (a.v == 0) throw std::domain_error("inverse of zero");
    return pow(a, static_cast<long long>(q_) - 2);
}

FieldElem twist(FieldElem x) {
    if (!x.F) throw std::logic_error("twist of contextless element");
    if (x.v == 0) return x;
    return x.F->pow(x, x.F->t());
}

FieldElem sqrt_elem(FieldElem x) {
    if (!x.F) throw std::logic_error("sqrt of contextless element");
    FieldElem r = x;
    for (int i = 0; i < x.F->n() - 1; ++i) r = r.F->sqr(r);
    return r;
}

std::optional<std::uint64_t> discrete_log(FieldElem base, FieldElem target) {
    auto start = std::chrono::steady_clock::now();
    if (base.is_zero() || target.is_zero()) throw std::domain_error("discrete_log of zero");
    const FieldCtx& F = *base.F;
    std::uint64_t ord = element_order(base);
    std::uint64_t s = 1;
    while (s * s < ord) ++s;
    // Baby steps: target * base^-j for j in [0, s).
    std::unordered_map<std::uint32_t, std::uint64_t> baby;
    baby.reserve(s);
    FieldElem binv = F.inv(base);
    FieldElem cur = target;
    for (std::uint64_t j = 0; j < s; ++j) {
        baby.emplace(cur.v, j);
        cur = cur * binv;
    }
    FieldElem giant = F.pow(base, static_cast<long long>(s));
    FieldElem g = F.one();
    std::optional<std::uint64_t> result;
    for (std::uint64_t i = 0; i * s <= ord + s; ++i) {
        auto it = baby.find(g.v);
        if (it != baby.end()) {
            std::uint64_t k = i * s + it->second;
            k %= ord;
            if (k == 0) k = ord;  // positive-integer convention
            result = k;
            break;
        }
        g = g * giant;
    }
    g_dlog_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::uint64_t element_order(FieldElem x) {
    if (x.is_zero()) throw std::domain_error("order of zero");
    const FieldCtx& F = *x.F;
    std::uint64_t ord = F.q() - 1;
    // Factor q-1 by trial division (q <= 2^11) and strip unneeded primes.
    std::vector<std::uint64_t> primes;
    std::uint64_t rem = ord;
    for (std::uint64_t p = 2; p * p <= rem; ++p) {
        if (rem % p) continue;
        primes.push_back(p);
        while (rem % p == 0) rem /= p;
    }
    if (rem > 1) primes.push_back(rem);
    for (std::uint64_t p : primes)
        while (ord % p == 0 && F.pow(x, static_cast<long long>(ord / p)).is_one()) ord /= p;
    return ord;
}

bool in_proper_subfield(FieldElem x) {
    if (x.is_zero()) throw std::domain_error("subfield test of zero");
    const FieldCtx& F = *x.F;
    int n = F.n();
    for (int d = 1; d < n; ++d) {
        if (n % d) continue;
        if (F.pow(x, (1ll << d) - 1).is_one()) return true;
    }
    return false;
}

std::string to_hex(FieldElem x) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%x", x.v);
    return buf;
}

FieldElem from_hex(const FieldCtx& F, const std::string& s) {
    std::uint32_t bits = static_cast<std::uint32_t>(std::strtoul(s.c_str(), nullptr, 16));
    if (bits >= F.q()) throw std::invalid_argument("hex literal out of field range: " + s);
    return F.from_bits(bits);
}

FieldElem embed(const FieldCtx& big, FieldElem small_elem) {
    const FieldCtx& S = *small_elem.F;
    if (big.n() % S.n()) throw std::invalid_argument("no subfield embedding");
    // Find the first root of the small modulus in the big field.
    Poly f(big);
    std::vector<FieldElem> c;
    for (int i = 0; i <= S.n(); ++i)
        c.push_back((S.modulus() >> i) & 1 ? big.one() : big.zero());
    f = Poly(big, c);
    auto roots = poly_roots(f);
    if (roots.empty()) throw std::logic_error("small modulus has no root in big field");
    FieldElem r = roots.front();
    FieldElem acc = big.zero(), p = big.one();
    for (int i = 0; i < S.n(); ++i) {
        if ((small_elem.v >> i) & 1) acc += p;
        p = p * r;
    }
    return acc;
}

Poly::Poly(const FieldCtx& ctx, std::vector<FieldElem> coeffs) : F(&ctx), c(std::move(coeffs)) {
    normalize();
}

void Poly::normalize() {
    while (!c.empty() && c.back().is_zero()) c.pop_back();
}

FieldElem Poly::coeff(int i) const {
    if (i < 0 || i >= static_cast<int>(c.size())) return F->zero();
    return c[i];
}

Poly operator+(const Poly& a, const Poly& b) {
    Poly r(*a.F);
    r.c.resize(std::max(a.c.size(), b.c.size()), a.F->zero());
    for (size_t i = 0; i < r.c.size(); ++i) r.c[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
    r.normalize();
    return r;
}

Poly operator*(const Poly& a, const Poly& b) {
    Poly r(*a.F);
    if (a.is_zero() || b.is_zero()) return r;
    r.c.assign(a.c.size() + b.c.size() - 1, a.F->zero());
    for (size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i].is_zero()) continue;
        for (size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    }
    r.normalize();
    return r;
}

Poly poly_mod(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::domain_error("poly_mod by zero");
    Poly r = a;
    FieldElem lead_inv = a.F->inv(b.c.back());
    while (r.deg() >= b.deg()) {
        FieldElem f = r.c.back() * lead_inv;
        int shift = r.deg() - b.deg();
        for (int i = 0; i <= b.deg(); ++i) r.c[i + shift] += f * b.c[i];
        r.normalize();
    }
    return r;
}

Poly poly_gcd(Poly a, Poly b) {
    while (!b.is_zero()) {
        Poly r = poly_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.is_zero()) {
        FieldElem li = a.F->inv(a.c.back());
        for (auto& x : a.c) x *= li;
    }
    return a;
}

FieldElem poly_eval(const Poly& f, FieldElem x) {
    FieldElem acc = f.F->zero();
    for (int i = f.deg(); i >= 0; --i) acc = acc * x + f.c[i];
    return acc;
}

namespace {

// Square a polynomial modulo f: characteristic 2, so coefficients square
// and exponents double.
Poly sqr_mod(const Poly& a, const Poly& f) {
    Poly r(*a.F);
    if (a.is_zero()) return r;
    r.c.assign(2 * a.c.size() - 1, a.F->zero());
    for (size_t i = 0; i < a.c.size(); ++i) r.c[2 * i] = a.F->sqr(a.c[i]);
    r.normalize();
    return poly_mod(r, f);
}

void split_roots(const Poly& g, std::vector<FieldElem>& out, std::mt19937_64& rng, int depth) {
    const FieldCtx& F = *g.F;
    if (g.deg() <= 0) return;
    if (g.deg() == 1) {
        out.push_back(g.c[0] * F.inv(g.c[1]));
        return;
    }
    // Split via the absolute trace x + x^2 + ... + x^(2^(n-1)) of a random
    // affine image; the trace partitions F_q into two halves.
    for (int attempt = 0; attempt < 64; ++attempt) {
        FieldElem c = F.from_bits(static_cast<std::uint32_t>(rng() % F.q()));
        if (c.is_zero()) continue;
        Poly y(F, {F.zero(), c});  // c*x
        Poly s = poly_mod(y, g);
        Poly z = s;
        for (int i = 1; i < F.n(); ++i) {
            z = sqr_mod(z, g);
            s = s + z;
        }
        Poly h = poly_gcd(g, s);
        if (h.deg() > 0 && h.deg() < g.deg()) {
            // g = h * (g/h); recurse on both halves.
            Poly rest = g;
            // Divide g by h exactly.
            Poly quot(F);
            {
                Poly r = g;
                quot.c.assign(g.deg() - h.deg() + 1, F.zero());
                FieldElem li = F.inv(h.c.back());
                while (r.deg() >= h.deg()) {
                    FieldElem f2 = r.c.back() * li;
                    int shift = r.deg() - h.deg();
                    quot.c[shift] = f2;
                    for (int i = 0; i <= h.deg(); ++i) r.c[i + shift] += f2 * h.c[i];
                    r.normalize();
                }
                quot.normalize();
            }
            if (depth > 64) throw std::runtime_error("poly_roots: split recursion too deep");
            split_roots(h, out, rng, depth + 1);
            split_roots(quot, out, rng, depth + 1);
            return;
        }
    }
    throw std::runtime_error("poly_roots: random splitting failed");
}

}  // namespace

std::vector<FieldElem> poly_roots(const Poly& f) {
    if (f.is_zero()) throw std::domain_error("poly_roots of zero polynomial");
    const FieldCtx& F = *f.F;
    std::vector<FieldElem> out;
    if (f.deg() == 0) return out;
    // xq = x^q mod f via n squarings.
    Poly x(F, {F.zero(), F.one()});
    Poly xq = poly_mod(x, f);
    for (int i = 0; i < F.n(); ++i) xq = sqr_mod(xq, f);
    Poly g = poly_gcd(f, xq + x);  // product of distinct linear factors
    if (g.deg() <= 0) return out;
    // Deterministic per-polynomial seed keeps test vectors reproducible.
    std::uint64_t seed = 0x9e3779b97f4a7c15ull ^ (static_cast<std::uint64_t>(g.deg()) << 32);
    for (auto& ce : g.c) seed = seed * 0x100000001b3ull ^ ce.v;
    std::mt19937_64 rng(seed);
    split_roots(g, out, rng, 0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (auto r : out)
        if (!poly_eval(f, r).is_zero()) throw std::logic_error("poly_roots produced a non-root");
    return out;
}

double dlog_seconds() { return g_dlog_seconds; }
void reset_dlog_timer() { g_dlog_seconds = 0.0; }

}  // namespace sz
