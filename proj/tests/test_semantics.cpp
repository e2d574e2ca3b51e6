#include "doctest.h"
#include "helpers.hpp"

#include "anvil/semantics.hpp"

#include <random>
#include <set>
#include <functional>
#include <sstream>


using namespace anvil;
using namespace anvil::sem;

namespace {

MsgEnv env_of(const Compilation& c, const std::string& proc) {
    std::string err;
    auto prog = assemble_program(*c.unit, *c.unit->find_proc(proc), err);
    REQUIRE(prog);
    REQUIRE(prog->threads.size() >= 1);
    return prog->threads[0].env;
}

std::vector<Log> logs_of(const Compilation& c, const std::string& proc, uint32_t slack) {
    const ResolvedProc& p = th::proc_of(c, proc);
    Bounds b;
    b.slack = slack;
    MsgEnv env = env_of(c, proc);
    std::vector<Log> out;
    enumerate_logs(*c.unit, *p.threads[0].body, env, b,
                   [&](const Log& l) { out.push_back(l); });
    return out;
}

Log random_log(std::mt19937& rng) {
    auto pick = [&](uint32_t n) { return std::uniform_int_distribution<uint32_t>(0, n - 1)(rng); };
    Log l;
    l.cycles.resize(1 + pick(5));
    ValId vals = 0;
    for (auto& c : l.cycles) {
        uint32_t n = pick(3);
        for (uint32_t i = 0; i < n; ++i) {
            Action a;
            switch (pick(5)) {
                case 0:
                    a.kind = Action::Kind::Create;
                    a.v = ++vals;
                    if (pick(2)) a.regs = {pick(2)};
                    if (vals > 1 && pick(2)) a.vals = {1 + ValId(pick(uint32_t(vals - 1)))};
                    break;
                case 1:
                    if (vals == 0) continue;
                    a.kind = Action::Kind::Use;
                    a.v = 1 + ValId(pick(uint32_t(vals)));
                    break;
                case 2:
                    a.kind = Action::Kind::Mut;
                    a.regs = {pick(2)};
                    break;
                case 3:
                    if (vals == 0) continue;
                    a.kind = Action::Kind::Send;
                    a.v = 1 + ValId(pick(uint32_t(vals)));
                    a.msg = pick(2);
                    a.dur.kind = pick(2) ? Dur::Kind::Cycles : Dur::Kind::Msg;
                    a.dur.cycles = 1 + pick(2);
                    a.dur.msg = pick(2);
                    break;
                default:
                    a.kind = Action::Kind::Recv;
                    a.v = -1 - ValId(pick(8));
                    a.msg = pick(2);
                    a.dur.kind = Dur::Kind::Cycles;
                    a.dur.cycles = 1 + pick(2);
                    break;
            }
            c.push_back(a);
        }
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    return l;
}

/// Independent realization of the safety definition: search every candidate
/// interval [a, b] instead of using the canonical hull.
bool safe_by_search(const Log& log) {
    auto dep = reg_dep(log);
    std::set<ValId> vals;
    for (const auto& c : log.cycles)
        for (const Action& a : c)
            if (a.kind != Action::Kind::Mut) vals.insert(a.v);

    size_t n = log.cycles.size();
    for (ValId v : vals) {
        // UseSet u LT_send and LT_recv bounds, straight from the definitions
        std::set<uint64_t> need;
        uint64_t lo = 0, hi = ~0ull;
        std::map<ValId, std::set<ValId>> closure;
        std::function<void(ValId, std::set<ValId>&)> walk = [&](ValId x, std::set<ValId>& acc) {
            if (!acc.insert(x).second) return;
            for (const auto& c : log.cycles)
                for (const Action& a : c)
                    if (a.kind == Action::Kind::Create && a.v == x)
                        for (ValId d : a.vals) walk(d, acc);
        };
        std::set<ValId> mine;
        walk(v, mine);
        std::set<ValId> derives{v};
        for (ValId u : vals) {
            std::set<ValId> cu;
            walk(u, cu);
            if (cu.count(v)) derives.insert(u);
        }
        auto lt_of = [&](size_t i, const Dur& d, bool trunc) -> std::pair<uint64_t, uint64_t> {
            if (d.kind == Dur::Kind::Cycles) return {i, i + d.cycles};
            if (d.kind == Dur::Kind::Eternal) return {i, ~0ull};
            for (size_t j = i; j < n; ++j)
                for (const Action& a : log.cycles[j])
                    if ((a.kind == Action::Kind::Send || a.kind == Action::Kind::Recv) &&
                        a.msg == d.msg)
                        return {i, j};
            return {i, trunc ? n : ~0ull};
        };
        for (size_t i = 0; i < n; ++i) {
            for (const Action& a : log.cycles[i]) {
                if (a.v == v && a.kind != Action::Kind::Mut) need.insert(i);
                if (a.kind == Action::Kind::Send && derives.count(a.v)) {
                    auto [l, h] = lt_of(i, a.dur, true);
                    for (uint64_t x = l; x < h; ++x) need.insert(x);
                }
                if (a.kind == Action::Kind::Recv && mine.count(a.v)) {
                    auto [l, h] = lt_of(i, a.dur, false);
                    lo = std::max(lo, l);
                    hi = std::min(hi, h);
                }
            }
        }
        if (need.empty()) continue;
        std::set<uint64_t> muts;
        auto dit = dep.find(v);
        if (dit != dep.end())
            for (size_t i = 0; i < n; ++i)
                for (const Action& a : log.cycles[i])
                    if (a.kind == Action::Kind::Mut &&
                        std::count(dit->second.begin(), dit->second.end(), a.regs[0]))
                        muts.insert(i);

        bool ok = false;
        for (uint64_t a = 0; a <= n && !ok; ++a) {
            for (uint64_t b = a; b <= n + 2 && !ok; ++b) {
                bool cover = true;
                for (uint64_t x : need)
                    if (x < a || x > b) cover = false;
                if (!cover) continue;
                if (!(lo <= a && (hi == ~0ull || b < hi))) continue;
                bool mut_free = true;
                for (uint64_t x : muts)
                    if (x >= a && x < b) mut_free = false;
                if (mut_free) ok = true;
            }
        }
        if (!ok) return false;
    }
    return true;
}

} // namespace

TEST_CASE("evaluation-rule example logs") {
    Compilation c = th::compile_source(
        "chan ch { right m : (logic[4]@#1) }\n"
        "proc p(e : right ch) { reg r : logic[4]; loop { cycle 1 } }");
    REQUIRE(c.unit);

    SUBCASE("cycle 1: empty cycle then a creation") {
        auto logs = logs_of(c, "p", 0);
        REQUIRE(logs.size() == 1);
        REQUIRE(logs[0].cycles.size() == 2);
        CHECK(logs[0].cycles[0].empty());
        REQUIRE(logs[0].cycles[1].size() == 1);
        CHECK(logs[0].cycles[1][0].kind == Action::Kind::Create);
        CHECK(logs[0].cycles[1][0].regs.empty());
        CHECK(logs[0].cycles[1][0].vals.empty());
    }
}

TEST_CASE("literal, register read and receive logs") {
    Compilation c = th::compile_source(
        "chan ch { right m : (logic[4]@#1) }\n"
        "proc lit(e : right ch) { loop { 25 >> cycle 1 } }\n"
        "proc rd(e : right ch) { reg r : logic[4]; loop { *r >> cycle 1 } }\n"
        "proc rc(e : right ch) { loop { let d = recv e.m >> cycle 1 } }");
    SUBCASE("literal creates immediately") {
        auto logs = logs_of(c, "lit", 0);
        REQUIRE(logs.size() == 1);
        CHECK(logs[0].cycles[0].size() == 1);
        CHECK(logs[0].cycles[0][0].kind == Action::Kind::Create);
    }
    SUBCASE("register read records the dependency") {
        auto logs = logs_of(c, "rd", 0);
        REQUIRE(logs.size() == 1);
        CHECK(logs[0].cycles[0][0].regs.size() == 1);
    }
    SUBCASE("receive with slack 0: Recv plus Create in one cycle") {
        auto logs = logs_of(c, "rc", 0);
        REQUIRE(logs.size() == 1);
        REQUIRE(logs[0].cycles[0].size() == 2);
        const CycleActions& a = logs[0].cycles[0];
        bool recv = false, create = false;
        for (const Action& x : a) {
            if (x.kind == Action::Kind::Recv) {
                recv = true;
                CHECK(x.dur.kind == Dur::Kind::Cycles);
                CHECK(x.dur.cycles == 1);
            }
            if (x.kind == Action::Kind::Create) {
                create = true;
                REQUIRE(x.vals.size() == 1);
                CHECK(x.vals[0] < 0); // placeholder until composed
            }
        }
        CHECK(recv);
        CHECK(create);
    }
}

TEST_CASE("operator algebra") {
    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
        Log a = random_log(rng);
        Log b = random_log(rng);
        CHECK(overlap_concat(a, b).cycles.size() == a.cycles.size() + b.cycles.size() - 1);
        CHECK(merge(a, b).cycles.size() == std::max(a.cycles.size(), b.cycles.size()));
    }
    CHECK(empties(3).cycles.size() == 3);
}

TEST_CASE("composition") {
    Action s;
    s.kind = Action::Kind::Send;
    s.v = 5;
    s.msg = 9;
    s.dur.kind = Dur::Kind::Cycles;
    s.dur.cycles = 1;
    Action r = s;
    r.kind = Action::Kind::Recv;
    r.v = -1;

    SUBCASE("matching send/recv at the same cycle are eliminated") {
        Log a = empties(3);
        a.cycles[2].push_back(s);
        Log b = empties(3);
        b.cycles[2].push_back(r);
        auto c = compose_logs(a, b, {9});
        REQUIRE(c);
        for (const auto& cyc : c->cycles) CHECK(cyc.empty());
    }
    SUBCASE("mismatched cycles compose to nothing") {
        Log a = empties(3);
        a.cycles[1].push_back(s);
        Log b = empties(3);
        b.cycles[2].push_back(r);
        CHECK(!compose_logs(a, b, {9}));
    }
    SUBCASE("empty sigma is a plain pointwise union") {
        Log a = empties(2);
        a.cycles[1].push_back(s);
        Log b = empties(3);
        b.cycles[2].push_back(r);
        auto c = compose_logs(a, b, {});
        REQUIRE(c);
        CHECK(c->cycles.size() == 3);
        CHECK(c->cycles[1].size() == 1);
        CHECK(c->cycles[2].size() == 1);
    }
    SUBCASE("unification rewrites the receiver's placeholder") {
        Log a = empties(1);
        a.cycles[0].push_back(s);
        Log b = empties(1);
        b.cycles[0].push_back(r);
        Action cr;
        cr.kind = Action::Kind::Create;
        cr.v = 7;
        cr.vals = {-1};
        b.cycles[0].push_back(cr);
        auto c = compose_logs(a, b, {9});
        REQUIRE(c);
        REQUIRE(c->cycles[0].size() == 1);
        CHECK(c->cycles[0][0].vals == std::vector<ValId>{5});
    }
}

TEST_CASE("register dependency sets") {
    Log l = empties(3);
    Action c1;
    c1.kind = Action::Kind::Create;
    c1.v = 1;
    c1.regs = {10};
    l.cycles[0].push_back(c1);
    Action c2;
    c2.kind = Action::Kind::Create;
    c2.v = 2;
    c2.regs = {20};
    c2.vals = {1};
    l.cycles[1].push_back(c2);

    auto dep = reg_dep(l);
    CHECK(dep.at(1) == std::vector<RegKey>{10});
    CHECK(dep.at(2) == std::vector<RegKey>{10, 20});
    CHECK(!dep.count(3)); // never created -> undefined
}

TEST_CASE("safety of hand-built logs") {
    SUBCASE("empty log is safe") { CHECK(check_log_safety(empties(4)).safe); }
    SUBCASE("create and use in one cycle is safe") {
        Log l = empties(1);
        Action c;
        c.kind = Action::Kind::Create;
        c.v = 1;
        l.cycles[0].push_back(c);
        Action u;
        u.kind = Action::Kind::Use;
        u.v = 1;
        l.cycles[0].push_back(u);
        CHECK(check_log_safety(l).safe);
    }
    SUBCASE("mutation inside the hull is unsafe") {
        Log l = empties(3);
        Action c;
        c.kind = Action::Kind::Create;
        c.v = 1;
        c.regs = {5};
        l.cycles[0].push_back(c);
        Action m;
        m.kind = Action::Kind::Mut;
        m.regs = {5};
        l.cycles[1].push_back(m);
        Action u;
        u.kind = Action::Kind::Use;
        u.v = 1;
        l.cycles[2].push_back(u);
        SafetyVerdict v = check_log_safety(l);
        CHECK(!v.safe);
        CHECK(v.reason == SafetyVerdict::Reason::MutationInWindow);
        CHECK(v.witness == 1);
        CHECK(!safe_by_search(l));
    }
    SUBCASE("a received value used after its duration is unsafe") {
        Log l = empties(3);
        Action r;
        r.kind = Action::Kind::Recv;
        r.v = -1;
        r.msg = 1;
        r.dur.kind = Dur::Kind::Cycles;
        r.dur.cycles = 1;
        l.cycles[0].push_back(r);
        Action c;
        c.kind = Action::Kind::Create;
        c.v = 1;
        c.vals = {-1};
        l.cycles[0].push_back(c);
        Action u;
        u.kind = Action::Kind::Use;
        u.v = 1;
        l.cycles[2].push_back(u);
        SafetyVerdict v = check_log_safety(l);
        CHECK(!v.safe);
        CHECK(v.reason == SafetyVerdict::Reason::UseOutsideRecvWindow);
    }
}

TEST_CASE("hull sufficiency: exhaustive interval search agrees with the hull") {
    std::mt19937 rng(17);
    for (int i = 0; i < 300; ++i) {
        Log l = random_log(rng);
        CAPTURE(i);
        CHECK(check_log_safety(l).safe == safe_by_search(l));
    }
}

TEST_CASE("a safe full log has only safe prefixes") {
    Compilation c = th::compile_demo("counter.anvil");
    auto logs = logs_of(c, "Counter", 2);
    for (const Log& l : logs) {
        if (!check_log_safety(l).safe) continue;
        for (size_t n = 0; n <= l.cycles.size(); ++n) {
            Log prefix;
            prefix.cycles.assign(l.cycles.begin(), l.cycles.begin() + n);
            CHECK(check_log_safety(prefix).safe);
        }
    }
}

TEST_CASE("concretization counts") {
    Compilation c = th::compile_demo("Top.anvil");
    std::string err;
    auto prog = assemble_program(*c.unit, *c.unit->find_proc("Top"), err);
    REQUIRE(prog);
    // four loop threads; one unroll choice per thread and bound
    CHECK(concretizations(*prog, 1).size() == 1);
    CHECK(concretizations(*prog, 2).size() == 16);
}

TEST_CASE("assembly rejects recursive threads") {
    Compilation c = th::compile_demo("handler.anvil");
    std::string err;
    auto prog = assemble_program(*c.unit, *c.unit->find_proc("Handler"), err);
    CHECK(!prog);
    CHECK(err.find("recursive") != std::string::npos);
}

TEST_CASE("fold-composition agrees with direct pairwise composition") {
    Compilation c = th::compile_source(
        "chan ch { right m : (logic[4]@#1) }\n"
        "proc child(e : left ch) { loop { send e.m(3) >> cycle 1 } }\n"
        "proc Top() { chan a -- b : ch; spawn child(a);\n"
        "  loop { let d = recv b.m >> cycle 1 } }");
    REQUIRE(c.unit);
    std::string err;
    auto prog = assemble_program(*c.unit, *c.unit->find_proc("Top"), err);
    REQUIRE(prog);
    Bounds b;
    b.slack = 2;
    b.iterations = 1;
    VerifyReport rep = verify_program(*prog, b);
    CHECK(rep.complete);
    CHECK(rep.safe);
    // direct: enumerate both sides and compose by hand, counting matches
    std::vector<Log> tl, cl;
    enumerate_logs(*c.unit, *prog->threads[0].body, prog->threads[0].env, b,
                   [&](const Log& l) { tl.push_back(l); }, 10000000);
    enumerate_logs(*c.unit, *prog->threads[1].body, prog->threads[1].env, b,
                   [&](const Log& l) { cl.push_back(l); }, 20000000);
    uint64_t matches = 0;
    for (const Log& x : tl)
        for (const Log& y : cl)
            if (compose_logs(x, y, prog->internal)) ++matches;
    CHECK(matches > 0);
    CHECK(rep.logs_checked >= matches);
}
