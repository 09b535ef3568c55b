#include "suzuki/slp.hpp"

#include <atomic>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace sz {

namespace {
std::atomic<std::uint64_t> g_expr_id{1};

ExprPtr make(Expr::Kind k, int gen, long long exp, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->gen = gen;
    e->exp = exp;
    e->a = std::move(a);
    e->b = std::move(b);
    e->id = g_expr_id.fetch_add(1);
    return e;
}
}  // namespace

std::uint64_t Expr::watermark() { return g_expr_id.load(); }

ExprPtr egen(int generator_index) {
    return make(Expr::Kind::Ref, generator_index, 0, nullptr, nullptr);
}

ExprPtr emul(ExprPtr a, ExprPtr b) {
    return make(Expr::Kind::Mul, -1, 0, std::move(a), std::move(b));
}

ExprPtr epow(ExprPtr a, long long e) {
    if (a->kind == Expr::Kind::Pow)
        return make(Expr::Kind::Pow, -1, a->exp * e, a->a, nullptr);
    return make(Expr::Kind::Pow, -1, e, std::move(a), nullptr);
}

ExprPtr econj(ExprPtr a, ExprPtr b) {
    return make(Expr::Kind::Conj, -1, 0, std::move(a), std::move(b));
}

SLP SLP::compile(const ExprPtr& root) {
    SLP out;
    std::unordered_map<const Expr*, int> slot;
    // Post-order without recursion (words can be deep).
    std::vector<std::pair<const Expr*, bool>> stack{{root.get(), false}};
    while (!stack.empty()) {
        auto [e, done] = stack.back();
        stack.pop_back();
        if (slot.count(e)) continue;
        if (!done) {
            stack.push_back({e, true});
            if (e->a && !slot.count(e->a.get())) stack.push_back({e->a.get(), false});
            if (e->b && !slot.count(e->b.get())) stack.push_back({e->b.get(), false});
            continue;
        }
        Ins in;
        in.kind = e->kind;
        switch (e->kind) {
            case Expr::Kind::Ref:
                in.i = e->gen;
                break;
            case Expr::Kind::Mul:
            case Expr::Kind::Conj:
                in.i = slot.at(e->a.get());
                in.j = slot.at(e->b.get());
                break;
            case Expr::Kind::Pow:
                in.i = slot.at(e->a.get());
                in.exp = e->exp;
                break;
        }
        slot[e] = static_cast<int>(out.ins.size());
        out.ins.push_back(in);
    }
    out.result = slot.at(root.get());
    return out;
}

std::size_t fresh_length(const ExprPtr& root, std::uint64_t watermark) {
    std::unordered_set<const Expr*> seen;
    std::size_t n = 0;
    std::vector<const Expr*> stack{root.get()};
    while (!stack.empty()) {
        const Expr* e = stack.back();
        stack.pop_back();
        if (!seen.insert(e).second) continue;
        if (e->id < watermark) continue;  // pre-existing subword: counts as atom
        ++n;
        if (e->a) stack.push_back(e->a.get());
        if (e->b) stack.push_back(e->b.get());
    }
    return n;
}

std::string SLP::to_text() const {
    std::ostringstream os;
    for (const auto& in : ins) {
        switch (in.kind) {
            case Expr::Kind::Ref: os << "REF " << in.i << '\n'; break;
            case Expr::Kind::Mul: os << "MUL " << in.i << ' ' << in.j << '\n'; break;
            case Expr::Kind::Conj: os << "CONJ " << in.i << ' ' << in.j << '\n'; break;
            case Expr::Kind::Pow: os << "POW " << in.i << ' ' << in.exp << '\n'; break;
        }
    }
    os << "RESULT " << result << '\n';
    return os.str();
}

SLP SLP::parse(const std::string& text) {
    SLP out;
    std::istringstream is(text);
    std::string op;
    bool have_result = false;
    while (is >> op) {
        Ins in;
        if (op == "REF") {
            in.kind = Expr::Kind::Ref;
            if (!(is >> in.i)) throw std::runtime_error("slp parse: bad REF");
        } else if (op == "MUL" || op == "CONJ") {
            in.kind = op == "MUL" ? Expr::Kind::Mul : Expr::Kind::Conj;
            if (!(is >> in.i >> in.j)) throw std::runtime_error("slp parse: bad " + op);
        } else if (op == "POW") {
            in.kind = Expr::Kind::Pow;
            if (!(is >> in.i >> in.exp)) throw std::runtime_error("slp parse: bad POW");
        } else if (op == "RESULT") {
            if (!(is >> out.result)) throw std::runtime_error("slp parse: bad RESULT");
            have_result = true;
            continue;
        } else {
            throw std::runtime_error("slp parse: unknown op " + op);
        }
        int k = static_cast<int>(out.ins.size());
        bool ok = true;
        if (in.kind != Expr::Kind::Ref) {
            ok = in.i >= 0 && in.i < k;
            if (in.kind != Expr::Kind::Pow) ok = ok && in.j >= 0 && in.j < k;
        }
        if (!ok) throw std::runtime_error("slp parse: forward reference");
        out.ins.push_back(in);
    }
    if (!have_result || out.result < 0 || out.result >= static_cast<int>(out.ins.size()))
        throw std::runtime_error("slp parse: missing result");
    return out;
}

}  // namespace sz
