#include "doctest.h"
#include "helpers.hpp"

#include "anvil/codegen.hpp"

using namespace anvil;

namespace {
std::string emit_demo(const std::string& name, const std::string& top, int opt = 1) {
    Compilation c = th::compile_demo(name);
    REQUIRE(c.unit);
    EmitOptions eo;
    eo.opt_level = opt;
    std::string sv = emit_sv(*c.unit, *c.unit->find_proc(top), *c.diags, eo);
    if (c.diags->has_errors()) FAIL(c.diags->render_human());
    return sv;
}
} // namespace

TEST_CASE("mem_ch port table") {
    Compilation c = th::compile_demo("mem.anvil");
    auto ports = lower_messages(*c.unit, 0, ast::Side::Left);
    REQUIRE(ports.size() == 4);

    // rd_req @#2-@dyn: receiver static, sender dynamic -> {data, valid}
    CHECK(ports[0].name == "rd_req");
    CHECK(ports[0].has_valid);
    CHECK_FALSE(ports[0].has_ack);

    // wr_req @dyn-@dyn -> {data, valid, ack}
    CHECK(ports[1].name == "wr_req");
    CHECK(ports[1].has_valid);
    CHECK(ports[1].has_ack);
    CHECK(ports[1].width == 16);

    // rd_res / wr_res dependent on both sides -> {data} only
    CHECK_FALSE(ports[2].has_valid);
    CHECK_FALSE(ports[2].has_ack);
    CHECK_FALSE(ports[3].has_valid);
    CHECK_FALSE(ports[3].has_ack);

    // polarities seen from the left endpoint
    CHECK_FALSE(ports[0].sender); // rd_req travels left: left receives
    CHECK(ports[2].sender);       // rd_res travels right: left sends
}

TEST_CASE("full sync-mode matrix follows the elision rule") {
    using K = ast::SyncMode::Kind;
    for (K sender : {K::Dynamic, K::Static, K::Dependent}) {
        for (K receiver : {K::Dynamic, K::Static, K::Dependent}) {
            ResolvedUnit unit;
            ResolvedChanType ct;
            ct.name = "c";
            ResolvedMessage m;
            m.name = "m";
            m.direction = ast::MsgDir::Right; // left endpoint sends
            m.width = 4;
            m.sync[0].kind = sender;
            m.sync[1].kind = receiver;
            ct.messages.push_back(m);
            unit.chan_types.push_back(ct);

            auto ports = lower_messages(unit, 0, ast::Side::Left);
            CAPTURE(int(sender));
            CAPTURE(int(receiver));
            CHECK(ports[0].has_valid == (sender == K::Dynamic));
            CHECK(ports[0].has_ack == (receiver == K::Dynamic));
        }
    }
}

TEST_CASE("FSM plan state allocation") {
    SUBCASE("a two-cycle delay gets a two-bit counter") {
        EventGraph g;
        g.add_root();
        EventLabel d;
        d.kind = EventLabel::Kind::Delay;
        d.delay = 2;
        d.preds = {0};
        EventId e = g.add(d);
        FsmPlan plan = gen_fsm(g, {e});
        CHECK(plan.events[e].kind == EventFsm::Kind::Delay);
        CHECK(plan.events[e].counter_width == 2);
    }
    SUBCASE("dynamic receive gets a pending bit; pinned and branch do not") {
        EventGraph g;
        g.add_root();
        EventId s = g.add_msg_sync(MsgRef{0, 0}, false, 0);
        EventId b = g.add_branch(0, true, 0);
        EventId p = g.add_msg_sync(MsgRef{0, 1}, false, 0, SyncTiming::Pinned, s, 1);
        FsmPlan plan = gen_fsm(g, {});
        CHECK(plan.events[s].pending_bit);
        CHECK_FALSE(plan.events[b].pending_bit);
        CHECK(plan.events[b].counter_width == 0);
        CHECK(plan.events[b].reached_bits == 0);
        CHECK_FALSE(plan.events[p].pending_bit);
    }
    SUBCASE("latest-of joins track which predecessors have been reached") {
        EventGraph g;
        g.add_root();
        EventId a = g.add_msg_sync(MsgRef{0, 0}, false, 0);
        EventId b = g.add_msg_sync(MsgRef{0, 1}, false, 0);
        EventId j = g.add_delay(0, {a, b});
        FsmPlan plan = gen_fsm(g, {});
        CHECK(plan.events[j].kind == EventFsm::Kind::LatestJoin);
        CHECK(plan.events[j].reached_bits == 2);
    }
}

TEST_CASE("a process without channels gets clock and reset only") {
    std::string sv = emit_demo("counter.anvil", "Counter");
    CHECK(sv.find("input  logic clk_i") != std::string::npos);
    CHECK(sv.find("input  logic rst_ni") != std::string::npos);
    CHECK(sv.find("_data") == std::string::npos);
}

TEST_CASE("grandchild interface shape: data, valid and ack ports") {
    Compilation c = th::compile_demo("Top.anvil");
    DiagnosticEngine diags(c.sources);
    std::string sv = emit_sv(*c.unit, *c.unit->find_proc("grandchild"), diags);
    REQUIRE(!diags.has_errors());
    CHECK(sv.find("output logic ep_data_data") != std::string::npos);
    CHECK(sv.find("output logic ep_data_valid") != std::string::npos);
    CHECK(sv.find("input  logic ep_data_ack") != std::string::npos);
}

TEST_CASE("Top_Safe register updates share one firing condition") {
    std::string sv = emit_demo("top_safe.anvil", "Top_Safe");
    // find the two register update lines and compare their conditions
    std::string addr_cond, enq_cond;
    std::istringstream ss(sv);
    std::string line;
    while (std::getline(ss, line)) {
        auto grab = [&](const std::string& reg) {
            size_t p = line.find(") " + reg + " <=");
            if (p == std::string::npos || line.find("if (") == std::string::npos) return std::string();
            return line.substr(line.find("if (") + 4, p - line.find("if (") - 4);
        };
        if (auto s = grab("address_q"); !s.empty()) addr_cond = s;
        if (auto s = grab("enq_data_q"); !s.empty()) enq_cond = s;
    }
    REQUIRE(!addr_cond.empty());
    REQUIRE(!enq_cond.empty());
    CHECK(addr_cond == enq_cond);
}

TEST_CASE("dprint lowers to a guarded display statement") {
    Compilation c = th::compile_source("proc P() { loop { dprint \"tick %d\" (1) >> cycle 1 } }");
    DiagnosticEngine diags(c.sources);
    std::string sv = emit_sv(*c.unit, *c.unit->find_proc("P"), diags);
    CHECK(sv.find("`ifndef SYNTHESIS") != std::string::npos);
    CHECK(sv.find("$display(\"tick %d\"") != std::string::npos);
}

TEST_CASE("emission is deterministic") {
    std::string a = emit_demo("mem.anvil", "Top");
    std::string b = emit_demo("mem.anvil", "Top");
    CHECK(a == b);
}

TEST_CASE("child modules are instantiated with wired channel ports") {
    std::string sv = emit_demo("mem.anvil", "Top");
    CHECK(sv.find("module Memory") != std::string::npos);
    CHECK(sv.find("module Top") != std::string::npos);
    CHECK(sv.find("Memory u_Memory0") != std::string::npos);
    CHECK(sv.find(".ep_rd_req_data(c0_rd_req_data)") != std::string::npos);
}

TEST_CASE("a thread that can restart instantly is a codegen error") {
    Compilation c = th::compile_source("proc P() { loop { dprint \"x\" } }");
    DiagnosticEngine diags(c.sources);
    std::string sv = emit_sv(*c.unit, *c.unit->find_proc("P"), diags);
    CHECK(diags.has_errors());
    CHECK(sv.empty());
}

TEST_CASE("optimization does not change the module interface") {
    std::string o0 = emit_demo("top_safe.anvil", "Top_Safe", 0);
    std::string o1 = emit_demo("top_safe.anvil", "Top_Safe", 1);
    auto header = [](const std::string& s) { return s.substr(0, s.find(");")); };
    CHECK(header(o0) == header(o1));
    CHECK(o1.size() <= o0.size());
}
