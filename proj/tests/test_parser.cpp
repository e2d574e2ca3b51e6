#include "doctest.h"
#include "helpers.hpp"

using namespace anvil;
using namespace anvil::ast;

namespace {
Program parse_ok(const std::string& src) {
    Compilation c = th::compile_source(src);
    if (c.diags->has_errors()) FAIL(c.diags->render_human());
    return std::move(c.program);
}
} // namespace

TEST_CASE("mem_ch channel definition") {
    Program p = parse_ok(th::read_file(th::demo_path("mem.anvil")));
    REQUIRE(p.channels.size() == 1);
    const ChannelTypeDef& ch = p.channels[0];
    CHECK(ch.name == "mem_ch");
    REQUIRE(ch.messages.size() == 4);

    const MessageDef& rd_req = ch.messages[0];
    CHECK(rd_req.ident == "rd_req");
    CHECK(rd_req.direction == MsgDir::Left);
    CHECK(rd_req.data_type.width == 8);
    CHECK(rd_req.duration.kind == Duration::Kind::Cycles);
    CHECK(rd_req.duration.cycles == 1);
    CHECK(rd_req.sync_left.kind == SyncMode::Kind::Static);
    CHECK(rd_req.sync_left.cycles == 2);
    CHECK(rd_req.sync_right.kind == SyncMode::Kind::Dynamic);

    const MessageDef& wr_req = ch.messages[1];
    CHECK(wr_req.direction == MsgDir::Left);
    CHECK(wr_req.data_type.kind == DataType::Kind::Named);
    CHECK(wr_req.data_type.name == "addr_data_pair");
    CHECK(wr_req.duration.kind == Duration::Kind::Cycles);
    // omitted sync annotations default to dynamic on both sides
    CHECK(wr_req.sync_left.kind == SyncMode::Kind::Dynamic);
    CHECK(wr_req.sync_right.kind == SyncMode::Kind::Dynamic);

    const MessageDef& rd_res = ch.messages[2];
    CHECK(rd_res.direction == MsgDir::Right);
    CHECK(rd_res.duration.kind == Duration::Kind::Message);
    CHECK(rd_res.duration.message == "rd_req");
    CHECK(rd_res.sync_left.kind == SyncMode::Kind::Dependent);
    CHECK(rd_res.sync_left.message == "rd_req");
    CHECK(rd_res.sync_left.cycles == 1);
    CHECK(rd_res.sync_right.kind == SyncMode::Kind::Dependent);

    const MessageDef& wr_res = ch.messages[3];
    CHECK(wr_res.data_type.width == 1);
    CHECK(wr_res.sync_left.kind == SyncMode::Kind::Dependent);
    CHECK(wr_res.sync_left.message == "wr_req");
}

TEST_CASE("counter loop shape") {
    Program p = parse_ok("proc P() { reg counter : logic[8];\n"
                         "loop { set counter := *counter + 1 >> cycle 1 } }");
    REQUIRE(p.procs.size() == 1);
    REQUIRE(p.procs[0].threads.size() == 1);
    const Term& t = *p.procs[0].threads[0].body;
    REQUIRE(t.kind == TermKind::Wait);
    const Term& set = *t.kids[0];
    REQUIRE(set.kind == TermKind::RegAssign);
    CHECK(set.text == "counter");
    const Term& rhs = *set.kids[0];
    REQUIRE(rhs.kind == TermKind::BinOp);
    CHECK(rhs.bin == BinOpKind::Add);
    CHECK(rhs.kids[0]->kind == TermKind::RegRead);
    CHECK(rhs.kids[1]->kind == TermKind::Literal);
    CHECK(t.kids[1]->kind == TermKind::Cycle);
}

TEST_CASE("empty process body") {
    Program p = parse_ok("proc p() {}");
    CHECK(p.procs[0].regs.empty());
    CHECK(p.procs[0].threads.empty());
}

TEST_CASE("join binds tighter than wait") {
    // a ; b >> c  parses as  (a ; b) >> c
    Program p = parse_ok("proc p() { loop { cycle 1; cycle 2 >> cycle 3 } }");
    const Term& t = *p.procs[0].threads[0].body;
    REQUIRE(t.kind == TermKind::Wait);
    CHECK(t.kids[0]->kind == TermKind::Join);
    CHECK(t.kids[1]->kind == TermKind::Cycle);
}

TEST_CASE("let statement and sequential let") {
    Program p = parse_ok("chan c { right m : (logic@#1) }\n"
                         "proc p(e : right c) { loop {\n"
                         "let a = recv e.m;\n"
                         "let b = recv e.m >> cycle 1;\n"
                         "cycle 2 } }");
    const Term& t = *p.procs[0].threads[0].body;
    REQUIRE(t.kind == TermKind::Let);
    CHECK(t.text == "a");
    CHECK_FALSE(t.seq);
    const Term& inner = *t.kids[1];
    REQUIRE(inner.kind == TermKind::Let);
    CHECK(inner.text == "b");
    CHECK(inner.seq);
    // body of the sequential let is the join/rest chain
    CHECK(inner.kids[0]->kind == TermKind::Recv);
}

TEST_CASE("if with else and register assignment without set") {
    Program p = parse_ok("proc p() { reg r : logic;\n"
                         "loop { if *r { r := 0 } else { r := 1 } >> cycle 1 } }");
    const Term& t = *p.procs[0].threads[0].body;
    REQUIRE(t.kind == TermKind::Wait);
    const Term& iff = *t.kids[0];
    REQUIRE(iff.kind == TermKind::If);
    REQUIRE(iff.kids.size() == 3);
    CHECK(iff.kids[1]->kind == TermKind::RegAssign);
    CHECK(iff.kids[2]->kind == TermKind::RegAssign);
}

TEST_CASE("syntax error carries expected token set") {
    Compilation c = th::compile_source("proc p( { }");
    REQUIRE(c.diags->has_errors());
    CHECK(c.diags->all()[0].klass == DiagClass::Syntax);
    CHECK(c.diags->all()[0].message.find("Expected") != std::string::npos);
}

TEST_CASE("round trip: print then reparse gives an identical AST") {
    for (const char* name : {"Top.anvil", "encrypt.anvil", "top_safe.anvil",
                             "top_unsafe.anvil", "counter.anvil", "handler.anvil",
                             "mem.anvil", "fifo1.anvil", "spill.anvil"}) {
        CAPTURE(name);
        Program p1 = parse_ok(th::read_file(th::demo_path(name)));
        std::string printed = print(p1);
        CAPTURE(printed);
        Program p2 = parse_ok(printed);
        CHECK(equal(p1, p2));
    }
}

TEST_CASE("spans are monotone on the corpus") {
    for (const char* name : {"Top.anvil", "encrypt.anvil", "top_safe.anvil", "spill.anvil",
                             "handler.anvil"}) {
        Program p = parse_ok(th::read_file(th::demo_path(name)));
        for (const ProcDef& pd : p.procs)
            for (const Thread& t : pd.threads) CHECK(spans_monotone(*t.body));
    }
}
