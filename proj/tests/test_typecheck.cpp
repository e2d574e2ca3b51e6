#include "doctest.h"
#include "helpers.hpp"

#include <set>

using namespace anvil;

namespace {

std::vector<Diagnostic> check_all(Compilation& c, int iters = 2) {
    CheckOptions opts;
    opts.iterations = iters;
    check_program(*c.unit, *c.diags, opts);
    c.diags->finalize();
    return c.diags->all();
}

bool has_class(const std::vector<Diagnostic>& ds, DiagClass k) {
    for (const auto& d : ds)
        if (d.klass == k) return true;
    return false;
}

} // namespace

TEST_CASE("counter and the small demos are well-typed") {
    for (const char* name :
         {"counter.anvil", "fifo1.anvil", "spill.anvil", "handler.anvil", "mem.anvil",
          "top_safe.anvil"}) {
        CAPTURE(name);
        Compilation c = th::compile_demo(name);
        REQUIRE(c.unit);
        auto ds = check_all(c);
        CHECK(ds.empty());
    }
}

TEST_CASE("Top_Unsafe is rejected with a hold-window violation on address") {
    Compilation c = th::compile_demo("top_unsafe.anvil");
    auto ds = check_all(c);
    REQUIRE(!ds.empty());
    bool found = false;
    for (const auto& d : ds)
        if (d.klass == DiagClass::RegMutation &&
            d.message.find("'address'") != std::string::npos)
            found = true;
    CHECK(found);
}

TEST_CASE("Appendix-A program: one error, in child, with the exact text") {
    Compilation c = th::compile_demo("Top.anvil");
    auto ds = check_all(c);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].message == "Value not live long enough in message send!");
    CHECK(ds[0].klass == DiagClass::SendCoverage);
    CHECK(ds[0].span.line_lo == 29);

    // the span covers exactly `send ep.data (*r & d)`
    std::string line(c.sources.line(ds[0].span.file, 29));
    std::string covered = line.substr(ds[0].span.col_lo - 1,
                                      ds[0].span.col_hi - ds[0].span.col_lo + 1);
    CHECK(covered == "send ep.data (*r & d)");
}

TEST_CASE("Appendix-A processes check clean in isolation except child") {
    Compilation c = th::compile_demo("Top.anvil");
    for (const char* name : {"Top", "grandchild"}) {
        DiagnosticEngine diags(c.sources);
        check_process(*c.unit, th::proc_of(c, name), diags);
        CAPTURE(name);
        CHECK(!diags.has_errors());
    }
    DiagnosticEngine diags(c.sources);
    check_process(*c.unit, th::proc_of(c, "child"), diags);
    CHECK(diags.has_errors());
}

TEST_CASE("Encrypt inferred lifetimes match the annotations") {
    Compilation c = th::compile_demo("encrypt.anvil");
    const ResolvedProc& p = th::proc_of(c, "Encrypt");
    DiagnosticEngine diags(c.sources);
    ThreadCheck tc = check_thread(*c.unit, p, p.threads[0], diags);
    TimingProver prover(tc.graph);

    EventId e1 = th::nth_sync(tc.graph, "ch1.enc_req", 0);
    EventId e8 = th::nth_sync(tc.graph, "ch2.rng_res", 0);
    EventId e9 = th::nth_sync(tc.graph, "ch1.enc_res", 0);
    MsgRef enc_res = th::msg_ref_of(c, p, "ch1", "enc_res");
    MsgRef enc_req = th::msg_ref_of(c, p, "ch1", "enc_req");

    // ptext: [e1, e1:ch1.enc_res)
    const ValueInfo& ptext = tc.values[tc.bindings.at("ptext")];
    CHECK(ptext.start == e1);
    REQUIRE(ptext.ends.pats.size() == 1);
    CHECK(ptext.ends.pats[0] == Pat::after_msg(e1, enc_res));

    // r1_key: eternal
    CHECK(tc.report_ends(tc.bindings.at("r1_key")).eternal());

    // ctext_out: [e5, e9:ch1.enc_req), register-sourced so demand-derived
    const ValueInfo& ctext = tc.values[tc.bindings.at("ctext_out")];
    PatSet ctext_ends = tc.report_ends(tc.bindings.at("ctext_out"));
    REQUIRE(ctext_ends.pats.size() == 1);
    CHECK(ctext_ends.pats[0] == Pat::after_msg(e9, enc_req));
    // e5 is where the r2_key assignment starts
    EventId e5 = NO_EVENT;
    for (const Obligation& o : tc.obligations)
        if (o.kind == Obligation::Kind::RegMutation &&
            p.reg_names[o.reg] == "r2_key" && e5 == NO_EVENT)
            e5 = o.mut_event;
    REQUIRE(e5 != NO_EVENT);
    CHECK(th::tau_eq(prover, ctext.start, e5));

    // loan of r2_key: [e5, e9:ch1.enc_req) union [e5, e8:#2)
    RegId r2 = *p.find_reg("r2_key");
    bool loan_send = false, loan_ctext = false;
    for (const LoanInterval& l : tc.loans.at(r2)) {
        if (!th::tau_eq(prover, l.start, e5)) continue;
        if (l.end == PatSet::of(Pat::at(e8, 2))) loan_send = true;
        if (l.end == PatSet::of(Pat::after_msg(e9, enc_req))) loan_ctext = true;
    }
    CHECK(loan_send);
    CHECK(loan_ctext);
}

TEST_CASE("Encrypt compound lifetime: intersection start, union of ends") {
    Compilation c = th::compile_demo("encrypt.anvil");
    const ResolvedProc& p = th::proc_of(c, "Encrypt");
    DiagnosticEngine diags(c.sources);
    ThreadCheck tc = check_thread(*c.unit, p, p.threads[0], diags);
    TimingProver prover(tc.graph);

    EventId e1 = th::nth_sync(tc.graph, "ch1.enc_req", 0);
    EventId e2 = th::nth_sync(tc.graph, "ch2.rng_req", 0);
    MsgRef enc_res = th::msg_ref_of(c, p, "ch1", "enc_res");

    // the (ptext ^ r1_key) + noise payload of the then-arm assignment
    const ValueInfo* compound = nullptr;
    EventId window = NO_EVENT;
    for (const Obligation& o : tc.obligations) {
        if (o.kind != Obligation::Kind::ValueUse) continue;
        const ValueInfo& v = tc.values[o.value];
        if (v.kind == ValueInfo::Kind::BinOp && v.ends.pats.size() == 2 && !compound) {
            compound = &v;
            window = o.win_start;
        }
    }
    REQUIRE(compound);
    CHECK(th::tau_eq(prover, compound->start, window)); // starts at e3
    bool has_noise_end = false, has_ptext_end = false;
    for (const Pat& x : compound->ends.pats) {
        if (x == Pat::at(e2, 1)) has_noise_end = true;
        if (x == Pat::after_msg(e1, enc_res)) has_ptext_end = true;
    }
    CHECK(has_noise_end);
    CHECK(has_ptext_end);
}

TEST_CASE("Encrypt violations: value-use, register-mutation, send-overlap") {
    Compilation c = th::compile_demo("encrypt.anvil");
    auto ds = check_all(c);
    std::set<DiagClass> classes;
    for (const auto& d : ds) classes.insert(d.klass);
    CHECK(classes == std::set<DiagClass>{DiagClass::ValueUse, DiagClass::RegMutation,
                                         DiagClass::SendOverlap});
    bool mut_r2 = false, overlap_encres = false, use_then_arm = false;
    for (const auto& d : ds) {
        if (d.klass == DiagClass::RegMutation && d.message.find("'r2_key'") != std::string::npos)
            mut_r2 = true;
        if (d.klass == DiagClass::SendOverlap &&
            d.message.find("ch1.enc_res") != std::string::npos)
            overlap_encres = true;
        if (d.klass == DiagClass::ValueUse && d.span.line_lo == 21) use_then_arm = true;
    }
    CHECK(mut_r2);
    CHECK(overlap_encres);
    CHECK(use_then_arm);
}

TEST_CASE("a received value used too late is rejected conservatively") {
    Compilation c = th::compile_source(
        "chan c { right m : (logic[4]@#1) }\n"
        "proc p(e : right c) { reg r : logic[4];\n"
        "loop { let d = recv e.m >> cycle 2 >> set r := d } }");
    auto ds = check_all(c);
    REQUIRE(has_class(ds, DiagClass::ValueUse));
}

TEST_CASE("static sync: the receiver must be back in time") {
    // @#1 on the receiving side but each iteration takes 3 cycles
    Compilation c = th::compile_source(
        "chan c { left m : (logic[4]@#1) @#1-@dyn }\n"
        "proc p(e : left c) { loop { let d = recv e.m >> cycle 3 } }");
    auto ds = check_all(c);
    CHECK(has_class(ds, DiagClass::SyncStatic));
}

TEST_CASE("static sync: sends must be spaced for a static receiver") {
    Compilation c = th::compile_source(
        "chan c { left m : (logic[4]@#1) @#3-@dyn }\n"
        "proc p(e : right c) { loop { send e.m(1) >> cycle 1 } }");
    auto ds = check_all(c);
    CHECK(has_class(ds, DiagClass::SyncStatic));
}

TEST_CASE("dependent sync must be reachable in time") {
    Compilation c = th::compile_source(
        "chan c { right a : (logic[4]@#1), right m : (logic[4]@#1) @#a+1-@#a+1 }\n"
        "proc p(e : right c) {\n"
        "loop { let x = recv e.a >> cycle 3 >> let y = recv e.m >> cycle 1 } }");
    auto ds = check_all(c);
    CHECK(has_class(ds, DiagClass::SyncDependent));
}

TEST_CASE("dependent sync with no anchor is rejected") {
    Compilation c = th::compile_source(
        "chan c { right a : (logic[4]@#1), right m : (logic[4]@#1) @#a+1-@#a+1 }\n"
        "proc p(e : right c) { loop { let y = recv e.m >> cycle 1 } }");
    auto ds = check_all(c);
    CHECK(has_class(ds, DiagClass::SyncDependent));
}

TEST_CASE("dangling internal endpoint") {
    Compilation c = th::compile_source(
        "chan c { right m : (logic@#1) }\n"
        "proc child(e : left c) { loop { send e.m(1) >> cycle 1 } }\n"
        "proc Top() { chan a -- b : c; spawn child(a); loop { cycle 1 } }");
    auto ds = check_all(c);
    CHECK(has_class(ds, DiagClass::Structure));
}

TEST_CASE("processes sharing no channels are checked independently") {
    Compilation c = th::compile_source("proc a() { loop { cycle 1 } }\n"
                                       "proc b() { loop { cycle 2 } }");
    auto ds = check_all(c);
    CHECK(ds.empty());
}

TEST_CASE("diagnostics are deterministic") {
    Compilation c1 = th::compile_demo("encrypt.anvil");
    Compilation c2 = th::compile_demo("encrypt.anvil");
    check_program(*c1.unit, *c1.diags);
    check_program(*c2.unit, *c2.diags);
    c1.diags->finalize();
    c2.diags->finalize();
    CHECK(c1.diags->render_human() == c2.diags->render_human());
    CHECK(c1.diags->render_json() == c2.diags->render_json());
}

TEST_CASE("two-iteration and three-iteration verdicts agree on the corpus") {
    for (const char* name : {"Top.anvil", "encrypt.anvil", "top_safe.anvil",
                             "top_unsafe.anvil", "counter.anvil", "handler.anvil",
                             "mem.anvil", "fifo1.anvil", "spill.anvil"}) {
        CAPTURE(name);
        Compilation c2 = th::compile_demo(name);
        Compilation c3 = th::compile_demo(name);
        bool ok2 = check_all(c2, 2).empty();
        bool ok3 = check_all(c3, 3).empty();
        CHECK(ok2 == ok3);
    }
}
