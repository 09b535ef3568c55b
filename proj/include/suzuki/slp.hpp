#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

// Straight-line programs over an abstract generator alphabet.
//
// Words are built as shared expression DAGs (Expr); compiling a DAG yields a
// flat, garbage-collected SLP in which every shared subword is emitted once.

namespace sz {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Ref, Mul, Pow, Conj };
    Kind kind;
    int gen = -1;          // Ref
    long long exp = 0;     // Pow
    ExprPtr a, b;
    std::uint64_t id;      // global creation order, used for length accounting

    static std::uint64_t watermark();  // id that the next node will exceed
};

ExprPtr egen(int generator_index);
ExprPtr emul(ExprPtr a, ExprPtr b);
ExprPtr epow(ExprPtr a, long long e);
ExprPtr econj(ExprPtr a, ExprPtr b);  // b^-1 a b
inline ExprPtr einv(ExprPtr a) { return epow(std::move(a), -1); }

// Flat instruction form. References point strictly backwards; every
// instruction is reachable from the result.
struct SLP {
    struct Ins {
        Expr::Kind kind;
        int i = -1, j = -1;    // operand indices (Ref: j unused, i = generator)
        long long exp = 0;     // Pow only
    };
    std::vector<Ins> ins;
    int result = -1;

    static SLP compile(const ExprPtr& root);
    std::size_t length() const { return ins.size(); }

    std::string to_text() const;
    static SLP parse(const std::string& text);
};

// Number of DAG nodes reachable from `root` created after `watermark`.
// This is the incremental word length on top of previously stored SLPs
// (standard generators, random-element history), matching the convention
// that stored words and random elements count as atoms.
std::size_t fresh_length(const ExprPtr& root, std::uint64_t watermark);

// Evaluate on images of any multiplicative type M supporting
// mul(a,b), inverse(a) and identity_like(a).
template <typename M, typename MulFn, typename InvFn>
M evaluate_slp(const SLP& slp, const std::vector<M>& images, MulFn mul, InvFn inv) {
    std::vector<M> vals;
    vals.reserve(slp.ins.size());
    for (const auto& in : slp.ins) {
        switch (in.kind) {
            case Expr::Kind::Ref:
                vals.push_back(images.at(static_cast<std::size_t>(in.i)));
                break;
            case Expr::Kind::Mul:
                vals.push_back(mul(vals.at(static_cast<std::size_t>(in.i)),
                                   vals.at(static_cast<std::size_t>(in.j))));
                break;
            case Expr::Kind::Conj: {
                const M& x = vals.at(static_cast<std::size_t>(in.i));
                const M& y = vals.at(static_cast<std::size_t>(in.j));
                vals.push_back(mul(mul(inv(y), x), y));
                break;
            }
            case Expr::Kind::Pow: {
                M base = vals.at(static_cast<std::size_t>(in.i));
                long long e = in.exp;
                if (e < 0) {
                    base = inv(base);
                    e = -e;
                }
                // Square-and-multiply; identity comes from base * base^-1.
                M acc = mul(base, inv(base));
                while (e) {
                    if (e & 1) acc = mul(acc, base);
                    base = mul(base, base);
                    e >>= 1;
                }
                vals.push_back(acc);
                break;
            }
        }
    }
    return vals.at(static_cast<std::size_t>(slp.result));
}

}  // namespace sz
