#include "doctest.h"
#include "helpers.hpp"

using namespace anvil;

TEST_CASE("polarity table is exhaustive: send iff side matches travel") {
    // direction Left means the right endpoint sends and the left receives
    CHECK(ResolvedUnit::polarity_of(ast::Side::Left, ast::MsgDir::Left) == Polarity::Receive);
    CHECK(ResolvedUnit::polarity_of(ast::Side::Left, ast::MsgDir::Right) == Polarity::Send);
    CHECK(ResolvedUnit::polarity_of(ast::Side::Right, ast::MsgDir::Left) == Polarity::Send);
    CHECK(ResolvedUnit::polarity_of(ast::Side::Right, ast::MsgDir::Right) == Polarity::Receive);
}

TEST_CASE("Encrypt: enc_req resolves to receive at the left endpoint") {
    Compilation c = th::compile_demo("encrypt.anvil");
    REQUIRE(c.unit);
    const ResolvedProc& p = th::proc_of(c, "Encrypt");
    bool found = false;
    for (const auto& [term, info] : c.unit->info) {
        if (term->kind == ast::TermKind::Recv && term->message == "enc_req") {
            CHECK(info.polarity == Polarity::Receive);
            CHECK(p.endpoints[info.msg.endpoint].name == "ch1");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("sending a received message is rejected") {
    Compilation c = th::compile_source(
        "chan encrypt_ch { left enc_req : (logic[8]@enc_res), right enc_res : (logic[8]@enc_req) }\n"
        "proc Encrypt(ch1 : left encrypt_ch) { loop { send ch1.enc_req(1) >> cycle 1 } }");
    REQUIRE(c.diags->has_errors());
    CHECK(c.diags->all()[0].message.find("received, not sent") != std::string::npos);
}

TEST_CASE("unbound register read") {
    Compilation c = th::compile_source("proc p() { loop { cycle 1 >> set x := *bogus } }");
    REQUIRE(c.diags->has_errors());
    bool has = false;
    for (const auto& d : c.diags->all())
        if (d.message.find("Unbound identifier 'bogus'") != std::string::npos) has = true;
    CHECK(has);
}

TEST_CASE("let shadowing resolves to the innermost binding") {
    Compilation c = th::compile_source(
        "chan c { right m : (logic@#1) }\n"
        "proc p(e : right c) { loop { let x = 1; let x = recv e.m; x >> cycle 1 } }");
    REQUIRE(!c.diags->has_errors());
    // the reference must bind to the inner (recv) let
    for (const auto& [term, info] : c.unit->info) {
        if (term->kind == ast::TermKind::Ident && term->text == "x") {
            REQUIRE(info.binding != nullptr);
            CHECK(info.binding->kids[0]->kind == ast::TermKind::Recv);
        }
    }
}

TEST_CASE("recurse outside a recursive thread is rejected") {
    Compilation c = th::compile_source("proc p() { loop { cycle 1 >> recurse } }");
    REQUIRE(c.diags->has_errors());
    CHECK(c.diags->all()[0].message.find("recursive thread") != std::string::npos);
}

TEST_CASE("spawn side mismatch") {
    Compilation c = th::compile_source(
        "chan c { right m : (logic@#1) }\n"
        "proc child(e : left c) { loop { cycle 1 } }\n"
        "proc Top() { chan a -- b : c; spawn child(b); loop { let x = recv a.m >> cycle 1 } }");
    REQUIRE(c.diags->has_errors());
    CHECK(c.diags->all()[0].message.find("left endpoint") != std::string::npos);
}

TEST_CASE("endpoint owned by spawn cannot be used by threads") {
    Compilation c = th::compile_source(
        "chan c { right m : (logic@#1) }\n"
        "proc child(e : left c) { loop { send e.m(1) >> cycle 1 } }\n"
        "proc Top() { chan a -- b : c; spawn child(a);\n"
        "  loop { send a.m(1) >> cycle 1 } }");
    REQUIRE(c.diags->has_errors());
}

TEST_CASE("duplicate register and unknown channel type") {
    Compilation c = th::compile_source("proc p(e : left nochan) { reg r : logic; reg r : logic; }");
    REQUIRE(c.diags->has_errors());
    CHECK(c.diags->error_count() >= 2);
}

TEST_CASE("one-sided dependent sync is rejected") {
    Compilation c = th::compile_source(
        "chan c { right a : (logic@#1), right m : (logic@#1) @#a+1-@dyn }\n"
        "proc p(e : right c) { loop { let x = recv e.m >> cycle 1 } }");
    REQUIRE(c.diags->has_errors());
    CHECK(c.diags->all()[0].message.find("both endpoints") != std::string::npos);
}

TEST_CASE("aggregate type widths flatten") {
    Compilation c = th::compile_demo("mem.anvil");
    REQUIRE(c.unit);
    const ResolvedChanType& ct = c.unit->chan_types[0];
    CHECK(ct.messages[1].width == 16); // addr_data_pair = two logic[8]
}
