#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Arithmetic in F_q, q = 2^(2m+1), with the Suzuki twist x -> x^t, t = 2^(m+1),
// plus the univariate polynomial algebra the solvers need (root finding,
// discrete logs, element orders, subfield tests).

namespace sz {

class FieldCtx;

// Element of F_q in polynomial-basis representation. bit i of `v` is the
// coefficient of x^i modulo the context's irreducible polynomial.
struct FieldElem {
    const FieldCtx* F = nullptr;
    std::uint32_t v = 0;

    friend bool operator==(const FieldElem& a, const FieldElem& b) { return a.v == b.v; }
    friend bool operator!=(const FieldElem& a, const FieldElem& b) { return a.v != b.v; }
    friend bool operator<(const FieldElem& a, const FieldElem& b) { return a.v < b.v; }
    bool is_zero() const { return v == 0; }
    bool is_one() const { return v == 1; }
};

FieldElem operator+(FieldElem a, FieldElem b);
FieldElem operator*(FieldElem a, FieldElem b);
FieldElem& operator+=(FieldElem& a, FieldElem b);
FieldElem& operator*=(FieldElem& a, FieldElem b);

class FieldCtx {
public:
    explicit FieldCtx(int m);
    FieldCtx(const FieldCtx&) = delete;  // gen_ holds a pointer to this object
    FieldCtx& operator=(const FieldCtx&) = delete;

    // Shared immutable instance per m (1 <= m <= 5).
    static const FieldCtx& get(int m);

    int m() const { return m_; }
    int n() const { return n_; }              // extension degree 2m+1
    std::uint32_t q() const { return q_; }    // field size 2^n
    std::uint32_t t() const { return t_; }    // twist exponent 2^(m+1)
    std::uint32_t modulus() const { return modulus_; }
    FieldElem generator() const { return gen_; }

    FieldElem zero() const { return {this, 0}; }
    FieldElem one() const { return {this, 1}; }
    FieldElem from_bits(std::uint32_t bits) const { return {this, bits & (q_ - 1)}; }

    FieldElem add(FieldElem a, FieldElem b) const { return {this, a.v ^ b.v}; }
    FieldElem mul(FieldElem a, FieldElem b) const;
    FieldElem sqr(FieldElem a) const { return mul(a, a); }
    FieldElem inv(FieldElem a) const;
    FieldElem pow(FieldElem a, long long e) const;

private:
    int m_, n_;
    std::uint32_t q_, t_, modulus_;
    FieldElem gen_;
};

// The twist pi(x) = x^t; pi(pi(x)) = x^2.
FieldElem twist(FieldElem x);

// Unique square root, x^(2^(n-1)).
FieldElem sqrt_elem(FieldElem x);

// Smallest k >= 1 with base^k = target, if target lies in <base>.
// Baby-step/giant-step; k satisfies 1 <= k <= ord(base).
std::optional<std::uint64_t> discrete_log(FieldElem base, FieldElem target);

// Exact multiplicative order (divides q - 1).
std::uint64_t element_order(FieldElem x);

// True iff x lies in GF(2^d) for a proper divisor d of n.
bool in_proper_subfield(FieldElem x);

// Hex serialization: lowercase hex of the bit vector, bit 0 = constant term.
std::string to_hex(FieldElem x);
FieldElem from_hex(const FieldCtx& F, const std::string& s);

// Embedding GF(2^d) -> GF(2^n) for d | n: maps the class of x in the small
// field to a fixed root of the small modulus in the big field.
FieldElem embed(const FieldCtx& big, FieldElem small_elem);

// Dense univariate polynomial over F_q, trailing zeros stripped.
struct Poly {
    const FieldCtx* F = nullptr;
    std::vector<FieldElem> c;  // c[i] is the coefficient of x^i

    explicit Poly(const FieldCtx& ctx) : F(&ctx) {}
    Poly(const FieldCtx& ctx, std::vector<FieldElem> coeffs);

    bool is_zero() const { return c.empty(); }
    int deg() const { return static_cast<int>(c.size()) - 1; }  // -1 for zero
    FieldElem coeff(int i) const;
    void normalize();

    friend bool operator==(const Poly& a, const Poly& b) { return a.c == b.c; }
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
Poly poly_mod(const Poly& a, const Poly& b);
Poly poly_gcd(Poly a, Poly b);
FieldElem poly_eval(const Poly& f, FieldElem x);

// All roots of f in F_q, each verified by evaluation; sorted, duplicate-free.
// gcd with x^q - x, then characteristic-2 trace splitting with random
// affine shifts (seeded from the polynomial itself; at most 64 retries).
std::vector<FieldElem> poly_roots(const Poly& f);

// Time spent inside discrete_log since the last reset, for benchmark reports.
double dlog_seconds();
void reset_dlog_timer();

}  // namespace sz
