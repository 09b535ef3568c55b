#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "suzuki/linalg.hpp"
#include "suzuki/slp.hpp"

using namespace sz;

namespace {
Mat4 eval(const SLP& s, const std::vector<Mat4>& imgs) {
    return evaluate_slp(
        s, imgs, [](const Mat4& a, const Mat4& b) { return a * b; },
        [](const Mat4& a) { return inverse(a); });
}

std::vector<Mat4> sample_images(const FieldCtx& F) {
    // a couple of invertible matrices
    Mat4 g = identity(F), h = identity(F);
    g[1][0] = F.generator();
    g[2][3] = F.one();
    h[0][0] = F.generator();
    h[3][3] = F.inv(F.generator());
    h[0][2] = F.one();
    return {g, h};
}
}  // namespace

TEST_CASE("basic evaluation") {
    const FieldCtx& F = FieldCtx::get(1);
    auto imgs = sample_images(F);
    CHECK(eval(SLP::compile(egen(0)), imgs) == imgs[0]);
    CHECK(eval(SLP::compile(epow(egen(0), 0)), imgs) == identity(F));
    CHECK(eval(SLP::compile(emul(egen(0), epow(egen(0), -1))), imgs) == identity(F));
    CHECK(eval(SLP::compile(econj(egen(0), egen(1))), imgs) ==
          inverse(imgs[1]) * imgs[0] * imgs[1]);
    CHECK(eval(SLP::compile(epow(egen(1), 5)), imgs) == mat_pow(imgs[1], 5));
    CHECK(eval(SLP::compile(epow(egen(1), -3)), imgs) == mat_pow(imgs[1], -3));
}

TEST_CASE("evaluation is a homomorphism") {
    const FieldCtx& F = FieldCtx::get(2);
    auto imgs = sample_images(F);
    std::mt19937_64 rng(5);
    auto random_word = [&](int depth) {
        ExprPtr e = egen(static_cast<int>(rng() % 2));
        for (int i = 0; i < depth; ++i) {
            switch (rng() % 3) {
                case 0: e = emul(e, egen(static_cast<int>(rng() % 2))); break;
                case 1: e = epow(e, static_cast<long long>(rng() % 7) - 3); break;
                default: e = econj(e, egen(static_cast<int>(rng() % 2))); break;
            }
        }
        return e;
    };
    for (int k = 0; k < 20; ++k) {
        ExprPtr a = random_word(6), b = random_word(6);
        Mat4 prod = eval(SLP::compile(emul(a, b)), imgs);
        CHECK(prod == eval(SLP::compile(a), imgs) * eval(SLP::compile(b), imgs));
    }
}

TEST_CASE("sharing keeps repeated squaring linear") {
    ExprPtr e = egen(0);
    for (int i = 0; i < 40; ++i) e = emul(e, e);
    SLP s = SLP::compile(e);
    CHECK(s.length() == 41);  // one Ref + 40 shared squarings
}

TEST_CASE("garbage collection and fresh length") {
    ExprPtr stored = emul(egen(0), egen(1));  // pre-existing subword
    std::uint64_t mark = Expr::watermark();
    ExprPtr word = emul(stored, epow(stored, 3));
    CHECK(fresh_length(word, mark) == 2);  // only the new Pow and Mul count
    // compile still includes everything reachable
    CHECK(SLP::compile(word).length() == 5);
}

TEST_CASE("text round trip") {
    ExprPtr e = econj(emul(egen(0), epow(egen(1), -7)), egen(0));
    SLP s = SLP::compile(e);
    SLP t = SLP::parse(s.to_text());
    const FieldCtx& F = FieldCtx::get(1);
    auto imgs = sample_images(F);
    CHECK(eval(s, imgs) == eval(t, imgs));
    CHECK(s.to_text() == t.to_text());
    CHECK_THROWS(SLP::parse("MUL 0 1\nRESULT 0\n"));  // forward reference
    CHECK_THROWS(SLP::parse("REF 0\n"));              // missing result
}
