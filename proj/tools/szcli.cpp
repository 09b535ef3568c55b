#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "suzuki/membership.hpp"
#include "suzuki/recog.hpp"

using json = nlohmann::json;
using namespace sz;

namespace {

constexpr int kExitYes = 0, kExitNo = 1, kExitBudget = 2, kExitUsage = 3;

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

FieldElem rnd_elem(const FieldCtx& F, std::mt19937_64& rng) {
    return F.from_bits(static_cast<std::uint32_t>(rng()) & (F.q() - 1));
}

Mat4 rnd_invertible(const FieldCtx& F, std::mt19937_64& rng) {
    for (;;) {
        Mat4 h = zero_mat(F);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) h[i][j] = rnd_elem(F, rng);
        if (!det(h).is_zero()) return h;
    }
}

FieldElem primitive_elem(const FieldCtx& F) {
    for (std::uint32_t b = 2; b < F.q(); ++b) {
        FieldElem c = F.from_bits(b);
        if (element_order(c) == static_cast<std::uint64_t>(F.q()) - 1) return c;
    }
    return F.one();
}

void write_genfile(std::ostream& os, int m, const std::vector<Mat4>& X) {
    const FieldCtx& F = FieldCtx::get(m);
    char hx[16];
    std::snprintf(hx, sizeof hx, "%x", F.modulus());
    os << "SZ m=" << m << " modulus=" << hx << "\n";
    for (const Mat4& g : X) os << mat_to_hex(g) << "\n";
}

std::pair<int, std::vector<Mat4>> read_genfile(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("empty generator file");
    int m = 0;
    unsigned mod = 0;
    if (std::sscanf(header.c_str(), "SZ m=%d modulus=%x", &m, &mod) != 2)
        throw std::runtime_error("bad generator file header");
    const FieldCtx& F = FieldCtx::get(m);
    if (mod != F.modulus()) throw std::runtime_error("modulus mismatch");
    std::vector<Mat4> X;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        X.push_back(mat_from_hex(F, line));
    }
    if (X.empty()) throw std::runtime_error("no matrices in generator file");
    return {m, X};
}

std::pair<int, std::vector<Mat4>> read_genfile_path(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_genfile(is);
}

std::vector<Mat4> conj_all(const std::vector<Mat4>& X, const Mat4& h) {
    std::vector<Mat4> out;
    for (const Mat4& x : X) out.push_back(conj(x, h));
    return out;
}

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream os(out_path);
        os << j.dump(2) << "\n";
    }
}

// ---------- gen ----------

int cmd_gen(int m, std::uint64_t seed, bool conjugate, const std::string& decoy,
            const std::string& out_path) {
    const StandardCopy& S = StandardCopy::get(m);
    const FieldCtx& F = S.field();
    std::mt19937_64 rng(seed);
    std::vector<Mat4> X;
    if (decoy.empty()) {
        X = S.std_gens();
    } else if (decoy == "stabiliser") {
        X = {S.s_mat(F.one(), F.zero()), S.s_mat(F.zero(), F.one()),
             S.m_mat(primitive_elem(F))};
    } else if (decoy == "torus-normaliser") {
        X = {S.m_mat(primitive_elem(F)), S.t_mat()};
    } else if (decoy == "subfield") {
        X = {S.s_mat(F.one(), F.zero()), S.t_mat()};
    } else {
        std::cerr << "unknown decoy kind: " << decoy << "\n";
        return kExitUsage;
    }
    if (conjugate) X = conj_all(X, rnd_invertible(F, rng));
    if (out_path.empty() || out_path == "-") {
        write_genfile(std::cout, m, X);
    } else {
        std::ofstream os(out_path);
        if (!os) {
            std::cerr << "cannot open " << out_path << "\n";
            return kExitUsage;
        }
        write_genfile(os, m, X);
    }
    return kExitYes;
}

// ---------- recognise ----------

int cmd_recognise(const std::string& in_path, bool conjugate, const std::string& out_path) {
    auto [m, X] = read_genfile_path(in_path);
    double t0 = now_ms();
    RecognitionReport r = conjugate ? recognise_conjugate(X) : recognise_standard(X);
    json j = {{"m", m},
              {"mode", conjugate ? "conjugate" : "standard"},
              {"verdict", r.verdict},
              {"tag", tag_name(r.tag)},
              {"ms", now_ms() - t0}};
    if (r.witness) j["witness"] = mat_to_hex(*r.witness);
    emit(j, out_path);
    return r.verdict ? kExitYes : kExitNo;
}

// ---------- conjugate ----------

int cmd_conjugate(const std::string& in_path, std::uint64_t seed, double eps,
                  const std::string& out_path) {
    auto [m, X] = read_genfile_path(in_path);
    const StandardCopy& S = StandardCopy::get(m);
    RecognitionReport r = recognise_conjugate(X);
    if (!r.verdict) {
        emit(json{{"m", m}, {"verdict", false}, {"tag", tag_name(r.tag)}}, out_path);
        return kExitNo;
    }
    PrGenerator prg(X, seed);
    reset_dlog_timer();
    double t0 = now_ms();
    auto g = find_conjugator_lv(X, prg, eps);
    if (!g) {
        emit(json{{"m", m}, {"verdict", true}, {"found", false}}, out_path);
        return kExitBudget;
    }
    bool ok = true;
    for (const Mat4& x : X) ok = ok && S.is_member_standard(conj(x, *g));
    emit(json{{"m", m},
              {"verdict", true},
              {"found", true},
              {"conjugator", mat_to_hex(*g)},
              {"verified", ok},
              {"ms", now_ms() - t0},
              {"dlog_ms", dlog_seconds() * 1000.0}},
         out_path);
    return kExitYes;
}

// ---------- membership ----------

int cmd_membership(const std::string& in_path, const std::string& target_path,
                   std::uint64_t seed, double eps, const std::string& out_path) {
    auto [m, X] = read_genfile_path(in_path);
    const StandardCopy& S = StandardCopy::get(m);
    std::ifstream ts(target_path);
    if (!ts) throw std::runtime_error("cannot open " + target_path);
    std::string line;
    std::getline(ts, line);
    Mat4 target = mat_from_hex(S.field(), line);

    PrGenerator prg(X, seed);
    auto ctx = preprocess_lv(S, prg, eps);
    if (!ctx) {
        emit(json{{"m", m}, {"found", false}, {"stage", "preprocess"}}, out_path);
        return kExitBudget;
    }
    try {
        auto w = element_to_slp_lv(*ctx, prg, target, eps);
        if (!w) {
            emit(json{{"m", m}, {"found", false}, {"stage", "rewrite"}}, out_path);
            return kExitBudget;
        }
        SLP slp = SLP::compile(*w);
        Mat4 check = evaluate_slp(
            slp, X, [](const Mat4& a, const Mat4& b) { return a * b; },
            [](const Mat4& a) { return inverse(a); });
        emit(json{{"m", m},
                  {"found", true},
                  {"verified", check == target},
                  {"slp_length", slp.length()},
                  {"slp", slp.to_text()}},
             out_path);
        return kExitYes;
    } catch (const std::invalid_argument&) {
        emit(json{{"m", m}, {"found", false}, {"member", false}}, out_path);
        return kExitNo;
    }
}

// ---------- check-conjecture ----------

int cmd_check_conjecture(const std::vector<int>& ms, int trials, std::uint64_t seed,
                         const std::string& out_path) {
    json rows = json::array();
    for (int m : ms) {
        const StandardCopy& S = StandardCopy::get(m);
        const FieldCtx& F = S.field();
        PrGenerator prg(S.std_gens(), seed + static_cast<unsigned>(m));
        std::mt19937_64 rng(seed ^ (0x9e37u + static_cast<unsigned>(m)));
        reset_conjecture_stats();
        double t0 = now_ms();
        int done = 0;
        while (done < trials) {
            Mat4 h = prg.next().first;
            Mat4 a = prg.next().first;
            if (a == identity(F) ||
                mat_pow(a, static_cast<long long>(F.q()) - 1) != identity(F))
                continue;
            TorusDiag td = diagonalise_torus(a);
            Mat4 xinv = inverse(td.x);
            ProjPoint P = S.ovoid_point(rnd_elem(F, rng), rnd_elem(F, rng));
            ProjPoint Q = S.ovoid_point(rnd_elem(F, rng), rnd_elem(F, rng));
            ProjPoint Pp = P * xinv, Qp = Q * xinv;
            bool ok = true;
            for (int i = 0; i < 4; ++i)
                if (Qp.v[i].is_zero()) ok = false;
            if (!ok) continue;
            (void)solve_equation(EquationInstance(conj(h, xinv), Pp, Qp));
            ++done;
        }
        const ConjectureStats& st = conjecture_stats();
        rows.push_back({{"m", m},
                        {"q", F.q()},
                        {"trials", done},
                        {"delta_identically_zero", st.delta_identically_zero},
                        {"f_identically_zero", st.f_identically_zero},
                        {"max_deg_f", st.max_deg_f},
                        {"ms", now_ms() - t0}});
    }
    emit(rows, out_path);
    return kExitYes;
}

// ---------- selftest ----------

int cmd_selftest(const std::string& out_path) {
    const StandardCopy& S = StandardCopy::get(1);
    const FieldCtx& F = S.field();
    std::vector<Mat4> all = enumerate_sz8(S);
    json rows = json::array();
    bool pass = true;
    auto report = [&](const std::string& name, long long expected, long long observed) {
        rows.push_back({{"check", name}, {"expected", expected}, {"observed", observed}});
        if (expected != observed) pass = false;
    };

    report("group order", 29120, static_cast<long long>(all.size()));

    std::set<std::string> pts;
    {
        std::ostringstream os;
        for (std::uint32_t a = 0; a < 8; ++a)
            for (std::uint32_t b = 0; b < 8; ++b) {
                ProjPoint p = S.ovoid_point(F.from_bits(a), F.from_bits(b));
                std::string key;
                for (int i = 0; i < 4; ++i) key += to_hex(p.v[i]) + ",";
                pts.insert(key);
            }
        ProjPoint p = S.p_inf();
        std::string key;
        for (int i = 0; i < 4; ++i) key += to_hex(p.v[i]) + ",";
        pts.insert(key);
    }
    report("ovoid size", 65, static_cast<long long>(pts.size()));

    long long order7 = 0, fixing = 0;
    std::vector<ProjPoint> ovoid;
    for (std::uint32_t a = 0; a < 8; ++a)
        for (std::uint32_t b = 0; b < 8; ++b)
            ovoid.push_back(S.ovoid_point(F.from_bits(a), F.from_bits(b)));
    ovoid.push_back(S.p_inf());
    for (const Mat4& g : all) {
        if (mat_order(g, 7) == 7) ++order7;
        for (const ProjPoint& p : ovoid)
            if (p * g == p) {
                ++fixing;
                break;
            }
    }
    report("order-7 elements", 12480, order7);
    report("fixing elements", 16576, fixing);

    // commutator order 4 over the point stabiliser, proportion exactly 6/7
    std::vector<Mat4> borel;
    for (std::uint32_t a = 0; a < 8; ++a)
        for (std::uint32_t b = 0; b < 8; ++b)
            for (std::uint32_t c = 1; c < 8; ++c)
                borel.push_back(S.s_mat(F.from_bits(a), F.from_bits(b)) *
                                S.m_mat(F.from_bits(c)));
    long long pairs4 = 0;
    for (const Mat4& x : borel)
        for (const Mat4& y : borel)
            if (mat_order(commutator(x, y), 4) == 4) ++pairs4;
    long long total = static_cast<long long>(borel.size()) * static_cast<long long>(borel.size());
    report("commutator order-4 pairs (x7)", total * 6, pairs4 * 7);

    // double cosets HgH of the maximal torus have size (q-1)^2 = 49 for g
    // outside the torus normaliser
    std::vector<Mat4> torus;
    for (std::uint32_t c = 1; c < 8; ++c) torus.push_back(S.m_mat(F.from_bits(c)));
    auto in_normaliser = [&](const Mat4& g) {
        Mat4 x = conj(S.m_mat(F.generator()), g);
        for (const Mat4& h : torus)
            if (x == h) return true;
        return false;
    };
    std::mt19937_64 rng(2026);
    int coset_ok = 0, coset_tested = 0;
    while (coset_tested < 20) {
        const Mat4& g = all[rng() % all.size()];
        if (in_normaliser(g)) continue;
        std::set<std::string> hgh;
        for (const Mat4& h1 : torus)
            for (const Mat4& h2 : torus) hgh.insert(mat_to_hex(h1 * g * h2));
        if (hgh.size() == 49) ++coset_ok;
        ++coset_tested;
    }
    report("double cosets of size 49", 20, coset_ok);

    // odd-order elements of equal trace lie in a single conjugacy class: the
    // BFS closure of one representative under conjugation covers them all
    {
        std::map<std::uint32_t, std::set<std::string>> trace_class;
        std::map<std::uint32_t, Mat4> trace_rep;
        for (const Mat4& g : all) {
            long long o = mat_order(g, 16);
            if (o % 2 == 0 || o == 1) continue;
            trace_class[trace(g).v].insert(mat_to_hex(g));
            trace_rep.emplace(trace(g).v, g);
        }
        std::vector<Mat4> gens = S.std_gens();
        long long bad = 0;
        for (const auto& [tr, members] : trace_class) {
            std::set<std::string> closure;
            std::vector<Mat4> work{trace_rep.at(tr)};
            closure.insert(mat_to_hex(work[0]));
            while (!work.empty()) {
                Mat4 g = work.back();
                work.pop_back();
                for (const Mat4& h : gens) {
                    Mat4 c = conj(g, h);
                    if (closure.insert(mat_to_hex(c)).second) work.push_back(c);
                }
            }
            if (closure != members) ++bad;
        }
        report("odd-order trace classes not conjugacy classes", 0, bad);
    }

    rows.push_back({{"check", "overall"}, {"pass", pass}});
    emit(rows, out_path);
    return pass ? kExitYes : kExitNo;
}

// ---------- bench ----------

int cmd_bench(const std::vector<int>& ms, int trials, std::uint64_t seed,
              const std::string& out_path) {
    json rows = json::array();
    for (int m : ms) {
        const StandardCopy& S = StandardCopy::get(m);
        const FieldCtx& F = S.field();
        std::mt19937_64 rng(seed + static_cast<unsigned>(m));

        auto run = [&](const std::string& op, auto&& fn) {
            reset_dlog_timer();
            double t0 = now_ms();
            for (int i = 0; i < trials; ++i) fn(i);
            double mean = (now_ms() - t0) / trials;
            rows.push_back({{"m", m},
                            {"q", F.q()},
                            {"op", op},
                            {"trials", trials},
                            {"mean_ms", mean},
                            {"dlog_ms", dlog_seconds() * 1000.0 / trials}});
        };

        run("recognise_conjugate", [&](int) {
            Mat4 h = rnd_invertible(F, rng);
            (void)recognise_conjugate(conj_all(S.std_gens(), h));
        });
        run("find_conjugator", [&](int i) {
            Mat4 h = rnd_invertible(F, rng);
            std::vector<Mat4> X = conj_all(S.std_gens(), h);
            PrGenerator prg(X, seed + 1000u + static_cast<unsigned>(i));
            (void)find_conjugator_lv(X, prg, kDefaultEps);
        });
        run("stabiliser_generation", [&](int i) {
            PrGenerator prg(S.std_gens(), seed + 2000u + static_cast<unsigned>(i));
            (void)preprocess_lv(S, prg, kDefaultEps);
        });
    }
    emit(rows, out_path);
    return kExitYes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constructive recognition of the Suzuki groups Sz(q) in GL(4,q)"};
    app.require_subcommand(1);

    int m = 1, trials = 1000;
    std::vector<int> ms = {1, 2, 3};
    std::uint64_t seed = 0;
    double eps = kDefaultEps;
    bool conjugate = false;
    std::string decoy, in_path, target_path, out_path;

    auto* gen = app.add_subcommand("gen", "write a generating set");
    gen->add_option("--m", m, "field parameter (q = 2^(2m+1))")->check(CLI::Range(1, 5));
    gen->add_option("--seed", seed);
    gen->add_flag("--conjugate", conjugate, "conjugate by a random matrix");
    gen->add_option("--decoy", decoy, "stabiliser|torus-normaliser|subfield");
    gen->add_option("--out", out_path);

    auto* rec = app.add_subcommand("recognise", "decide if the set generates (a conjugate of) Sz(q)");
    rec->add_option("--in", in_path)->required();
    rec->add_flag("--conjugate", conjugate, "use the conjugate-copy recogniser");
    rec->add_option("--out", out_path);

    auto* cnj = app.add_subcommand("conjugate", "find a conjugator to the standard copy");
    cnj->add_option("--in", in_path)->required();
    cnj->add_option("--seed", seed);
    cnj->add_option("--epsilon", eps)->check(CLI::Range(1e-12, 0.999999));
    cnj->add_option("--out", out_path);

    auto* mem = app.add_subcommand("membership", "rewrite a target as an SLP over the generators");
    mem->add_option("--in", in_path)->required();
    mem->add_option("--target", target_path)->required();
    mem->add_option("--seed", seed);
    mem->add_option("--epsilon", eps)->check(CLI::Range(1e-12, 0.999999));
    mem->add_option("--out", out_path);

    auto* chk = app.add_subcommand("check-conjecture", "count determinant degeneracies over random instances");
    chk->add_option("--m", ms, "field parameters");
    chk->add_option("--trials", trials);
    chk->add_option("--seed", seed);
    chk->add_option("--out", out_path);

    auto* self = app.add_subcommand("selftest", "q = 8 oracle counting identities");
    self->add_option("--out", out_path);

    auto* ben = app.add_subcommand("bench", "average wall times per operation");
    ben->add_option("--m", ms, "field parameters");
    ben->add_option("--trials", trials);
    ben->add_option("--seed", seed);
    ben->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen(m, seed, conjugate, decoy, out_path);
        if (rec->parsed()) return cmd_recognise(in_path, conjugate, out_path);
        if (cnj->parsed()) return cmd_conjugate(in_path, seed, eps, out_path);
        if (mem->parsed()) return cmd_membership(in_path, target_path, seed, eps, out_path);
        if (chk->parsed()) return cmd_check_conjecture(ms, trials, seed, out_path);
        if (self->parsed()) return cmd_selftest(out_path);
        if (ben->parsed()) return cmd_bench(ms, trials, seed, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
