#include "anvil/codegen.hpp"

#include "anvil/optimizer.hpp"
#include "anvil/timing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>

namespace anvil {

namespace {

uint32_t clog2(uint32_t n) {
    uint32_t w = 0;
    while ((1u << w) < n) ++w;
    return w == 0 ? 1 : w;
}

} // namespace

std::vector<MsgPorts> lower_messages(const ResolvedUnit& unit, ChanTypeId chan,
                                     ast::Side side) {
    std::vector<MsgPorts> out;
    const ResolvedChanType& ct = unit.chan_types[chan];
    for (MsgId m = 0; m < ct.messages.size(); ++m) {
        const ResolvedMessage& rm = ct.messages[m];
        MsgPorts p;
        p.msg = m;
        p.name = rm.name;
        p.width = rm.width;
        p.sender = ResolvedUnit::polarity_of(side, rm.direction) == Polarity::Send;
        // sender side of the message is fixed by its travel direction
        int sender_side = rm.direction == ast::MsgDir::Right ? 0 : 1;
        p.has_valid = rm.sync[sender_side].kind == ast::SyncMode::Kind::Dynamic;
        p.has_ack = rm.sync[1 - sender_side].kind == ast::SyncMode::Kind::Dynamic;
        out.push_back(std::move(p));
    }
    return out;
}

FsmPlan gen_fsm(const EventGraph& g, const std::vector<EventId>& wrap_events) {
    FsmPlan plan;
    plan.entry = g.entry;
    plan.wrap_events = wrap_events;
    plan.events.resize(g.events.size());
    for (EventId e = 0; e < g.events.size(); ++e) {
        if (!g.events[e].alive) continue;
        const EventLabel& l = g.label(e);
        EventFsm& f = plan.events[e];
        switch (l.kind) {
            case EventLabel::Kind::Root:
                f.kind = EventFsm::Kind::Entry;
                break;
            case EventLabel::Kind::Delay:
                if (l.delay == 0) {
                    f.kind = EventFsm::Kind::LatestJoin;
                    f.reached_bits = static_cast<uint32_t>(l.preds.size());
                } else {
                    f.kind = EventFsm::Kind::Delay;
                    f.counter_width = clog2(l.delay + 1);
                    if (l.preds.size() > 1)
                        f.reached_bits = static_cast<uint32_t>(l.preds.size());
                }
                break;
            case EventLabel::Kind::Join:
                f.kind = EventFsm::Kind::MinJoin;
                break;
            case EventLabel::Kind::Branch:
                f.kind = EventFsm::Kind::Branch;
                break;
            case EventLabel::Kind::MsgSync:
                switch (l.sync) {
                    case SyncTiming::Dynamic:
                        f.kind = EventFsm::Kind::SyncDynamic;
                        f.pending_bit = true;
                        break;
                    case SyncTiming::Immediate:
                        f.kind = EventFsm::Kind::SyncImmediate;
                        break;
                    case SyncTiming::Pinned:
                        f.kind = EventFsm::Kind::SyncPinned;
                        f.counter_width = l.sync_offset; // shift-register length
                        break;
                }
                break;
        }
    }
    return plan;
}

namespace {

const char* bin_sv(ast::BinOpKind k) {
    switch (k) {
        case ast::BinOpKind::Mul: return "*";
        case ast::BinOpKind::Div: return "/";
        case ast::BinOpKind::Mod: return "%";
        case ast::BinOpKind::Add: return "+";
        case ast::BinOpKind::Sub: return "-";
        case ast::BinOpKind::Lt: return "<";
        case ast::BinOpKind::Le: return "<=";
        case ast::BinOpKind::Gt: return ">";
        case ast::BinOpKind::Ge: return ">=";
        case ast::BinOpKind::Eq: return "==";
        case ast::BinOpKind::Ne: return "!=";
        case ast::BinOpKind::And: return "&";
        case ast::BinOpKind::Xor: return "^";
        case ast::BinOpKind::Or: return "|";
    }
    return "+";
}

std::string sv_ident(const std::string& name) {
    // identifiers that are legal in the source are legal SV apart from
    // keyword collisions; escape those with a suffix
    static const std::set<std::string> reserved = {
        "module", "endmodule", "input", "output", "logic", "wire", "reg", "begin",
        "end",    "always",    "assign", "case",  "if",    "else", "for"};
    if (reserved.count(name)) return name + "_x";
    return name;
}

class ModuleEmitter {
  public:
    ModuleEmitter(const ResolvedUnit& unit, const ResolvedProc& proc,
                  DiagnosticEngine& diags, const EmitOptions& opts)
        : unit_(unit), proc_(proc), diags_(diags), opts_(opts) {}

    bool run(std::string& out) {
        build_threads();
        if (failed_) return false;
        emit_header(out);
        emit_decls(out);
        emit_channels_and_children(out);
        for (size_t t = 0; t < threads_.size(); ++t) emit_thread(out, t);
        emit_message_ports_logic(out);
        emit_register_updates(out);
        out += "endmodule\n";
        return true;
    }

  private:
    struct ThreadLower {
        ThreadCheck tc;
        FsmPlan plan;
        std::string prefix;
    };

    const ResolvedUnit& unit_;
    const ResolvedProc& proc_;
    DiagnosticEngine& diags_;
    const EmitOptions& opts_;
    std::vector<ThreadLower> threads_;
    bool failed_ = false;

    // accumulated drive sites per (endpoint,msg): send avail/fire + expr,
    // recv avail wires
    struct SendSite {
        std::string avail;
        std::string expr;
    };
    std::map<uint64_t, std::vector<SendSite>> send_sites_;
    std::map<uint64_t, std::vector<std::string>> recv_avails_;
    // register write sites in deterministic order
    struct WriteSite {
        RegId reg;
        std::string fire;
        std::string expr;
    };
    std::vector<WriteSite> write_sites_;
    std::vector<std::string> display_lines_;

    static uint64_t key(MsgRef m) { return (uint64_t(m.endpoint) << 32) | m.msg; }

    void build_threads() {
        for (size_t t = 0; t < proc_.threads.size(); ++t) {
            ThreadLower tl;
            tl.tc = build_thread(unit_, proc_, proc_.threads[t], 1);
            tl.prefix = fmt::format("t{}_", t);

            std::vector<EventId> wraps;
            if (tl.tc.recursive) wraps = tl.tc.markers;
            else wraps.push_back(tl.tc.completion);

            if (opts_.opt_level > 0) {
                OptResult r = optimize(tl.tc.graph);
                for (EventId& w : wraps) w = r.map(w);
                tl.tc.entry = r.map(tl.tc.entry);
            }

            TimingProver prover(tl.tc.graph);
            for (EventId w : wraps) {
                if (prover.lt(Pat::at(tl.tc.entry), Pat::at(w)) != Verdict::Proved) {
                    diags_.report({Severity::Error, DiagClass::Codegen,
                                   fmt::format("Thread of process '{}' may restart in the "
                                               "same cycle it starts; cannot generate an FSM",
                                               proc_.name),
                                   proc_.threads[t].span,
                                   {}});
                    failed_ = true;
                }
            }
            tl.plan = gen_fsm(tl.tc.graph, wraps);
            threads_.push_back(std::move(tl));
        }
    }

    // ---- signal naming -----------------------------------------------------

    std::string port_base(EndpointId ep, MsgId m) const {
        const Endpoint& e = proc_.endpoints[ep];
        const ResolvedChanType& ct = unit_.chan_of(proc_, ep);
        if (e.is_param)
            return fmt::format("{}_{}", sv_ident(e.name), sv_ident(ct.messages[m].name));
        return fmt::format("c{}_{}", e.chan_inst, sv_ident(ct.messages[m].name));
    }

    MsgPorts ports_of(EndpointId ep, MsgId m) const {
        auto v = lower_messages(unit_, proc_.endpoints[ep].chan_type,
                                proc_.endpoints[ep].side);
        return v[m];
    }

    std::string fire(const ThreadLower& t, EventId e) const {
        return fmt::format("{}e{}_fire", t.prefix, e);
    }

    // ---- expressions ---------------------------------------------------------

    std::string emit_expr(const ThreadLower& t, ExprId id) const {
        const Expr& e = t.tc.graph.exprs[id];
        switch (e.kind) {
            case Expr::Kind::Unit:
                return "1'b0";
            case Expr::Kind::Literal:
                if (e.sized) {
                    if (e.lexeme == "true") return "1'b1";
                    if (e.lexeme == "false") return "1'b0";
                    return e.lexeme;
                }
                return e.lexeme;
            case Expr::Kind::RegRead:
                return fmt::format("{}_q", sv_ident(proc_.reg_names[e.reg]));
            case Expr::Kind::PortData:
                return fmt::format("{}_data", port_base(e.msg.endpoint, e.msg.msg));
            case Expr::Kind::BinOp:
                return fmt::format("({} {} {})", emit_expr(t, e.a), bin_sv(e.bin),
                                   emit_expr(t, e.b));
            case Expr::Kind::UnOp: {
                const char* op = e.un == ast::UnOpKind::BitNot ? "~"
                                 : e.un == ast::UnOpKind::LogNot ? "!"
                                                                 : "-";
                return fmt::format("({}{})", op, emit_expr(t, e.a));
            }
            case Expr::Kind::Mux:
                return fmt::format("((|{}) ? {} : {})", emit_expr(t, e.a), emit_expr(t, e.b),
                                   emit_expr(t, e.c));
            case Expr::Kind::Ready: {
                MsgPorts p = ports_of(e.msg.endpoint, e.msg.msg);
                std::string base = port_base(e.msg.endpoint, e.msg.msg);
                if (p.sender) return p.has_ack ? fmt::format("{}_ack", base) : "1'b1";
                return p.has_valid ? fmt::format("{}_valid", base) : "1'b1";
            }
        }
        return "1'b0";
    }

    // ---- module structure ----------------------------------------------------

    void emit_header(std::string& out) {
        out += fmt::format("module {} (\n", sv_ident(proc_.name));
        out += "    input  logic clk_i,\n    input  logic rst_ni";
        for (EndpointId ep = 0; ep < proc_.param_count; ++ep) {
            auto ports = lower_messages(unit_, proc_.endpoints[ep].chan_type,
                                        proc_.endpoints[ep].side);
            for (const MsgPorts& p : ports) {
                std::string base = port_base(ep, p.msg);
                std::string w =
                    p.width > 1 ? fmt::format("logic [{}:0]", p.width - 1) : "logic";
                out += fmt::format(",\n    {} {} {}_data", p.sender ? "output" : "input ", w,
                                   base);
                if (p.has_valid)
                    out += fmt::format(",\n    {} logic {}_valid",
                                       p.sender ? "output" : "input ", base);
                if (p.has_ack)
                    out += fmt::format(",\n    {} logic {}_ack",
                                       p.sender ? "input " : "output", base);
            }
        }
        out += "\n);\n";
    }

    void emit_decls(std::string& out) {
        for (RegId r = 0; r < proc_.reg_names.size(); ++r) {
            uint32_t w = proc_.reg_widths[r];
            out += w > 1 ? fmt::format("  logic [{}:0] {}_q;\n", w - 1,
                                       sv_ident(proc_.reg_names[r]))
                         : fmt::format("  logic {}_q;\n", sv_ident(proc_.reg_names[r]));
        }
    }

    void emit_channels_and_children(std::string& out) {
        // internal channel wires; both endpoints see the same wires
        const ast::ProcDef& src = *proc_.src;
        for (size_t ci = 0; ci < src.chans.size(); ++ci) {
            // find the left endpoint of this instantiation for port shapes
            for (EndpointId ep = proc_.param_count; ep < proc_.endpoints.size(); ++ep) {
                const Endpoint& e = proc_.endpoints[ep];
                if (e.is_param || e.chan_inst != ci || e.side != ast::Side::Left) continue;
                auto ports = lower_messages(unit_, e.chan_type, ast::Side::Left);
                for (const MsgPorts& p : ports) {
                    std::string base = port_base(ep, p.msg);
                    std::string w =
                        p.width > 1 ? fmt::format("logic [{}:0]", p.width - 1) : "logic";
                    out += fmt::format("  {} {}_data;\n", w, base);
                    if (p.has_valid) out += fmt::format("  logic {}_valid;\n", base);
                    if (p.has_ack) out += fmt::format("  logic {}_ack;\n", base);
                }
            }
        }
        for (size_t si = 0; si < proc_.spawns.size(); ++si) {
            const ResolvedProc::SpawnR& sp = proc_.spawns[si];
            const ResolvedProc& callee = unit_.procs[sp.proc];
            out += fmt::format("  {} u_{}{} (\n      .clk_i(clk_i),\n      .rst_ni(rst_ni)",
                               sv_ident(callee.name), sv_ident(callee.name), si);
            for (size_t ai = 0; ai < sp.args.size(); ++ai) {
                EndpointId mine = sp.args[ai];
                EndpointId theirs = static_cast<EndpointId>(ai);
                auto ports = lower_messages(unit_, callee.endpoints[theirs].chan_type,
                                            callee.endpoints[theirs].side);
                const ResolvedChanType& ct = unit_.chan_of(callee, theirs);
                for (const MsgPorts& p : ports) {
                    std::string mine_base = port_base(mine, p.msg);
                    std::string their_base =
                        fmt::format("{}_{}", sv_ident(callee.endpoints[theirs].name),
                                    sv_ident(ct.messages[p.msg].name));
                    out += fmt::format(",\n      .{}_data({}_data)", their_base, mine_base);
                    if (p.has_valid)
                        out += fmt::format(",\n      .{}_valid({}_valid)", their_base,
                                           mine_base);
                    if (p.has_ack)
                        out += fmt::format(",\n      .{}_ack({}_ack)", their_base, mine_base);
                }
            }
            out += "\n  );\n";
        }
    }

    // ---- one thread's FSM ------------------------------------------------------

    void emit_thread(std::string& out, size_t ti) {
        ThreadLower& t = threads_[ti];
        const EventGraph& g = t.tc.graph;
        out += fmt::format("  // thread {}\n", ti);

        // declarations
        out += fmt::format("  logic {}boot_q;\n", t.prefix);
        for (EventId e = 0; e < g.events.size(); ++e) {
            if (!g.events[e].alive) continue;
            out += fmt::format("  logic {};\n", fire(t, e));
            const EventFsm& f = t.plan.events[e];
            if (f.reached_bits > 1)
                out += fmt::format("  logic [{}:0] {}e{}_rdy_q;\n", f.reached_bits - 1,
                                   t.prefix, e);
            if (f.kind == EventFsm::Kind::Delay)
                out += f.counter_width > 1
                           ? fmt::format("  logic [{}:0] {}e{}_cnt_q;\n", f.counter_width - 1,
                                         t.prefix, e)
                           : fmt::format("  logic {}e{}_cnt_q;\n", t.prefix, e);
            if (f.kind == EventFsm::Kind::SyncPinned && f.counter_width > 0)
                out += f.counter_width > 1
                           ? fmt::format("  logic [{}:0] {}e{}_sh_q;\n", f.counter_width - 1,
                                         t.prefix, e)
                           : fmt::format("  logic {}e{}_sh_q;\n", t.prefix, e);
            if (f.pending_bit)
                out += fmt::format("  logic {}e{}_pend_q;\n", t.prefix, e);
        }
        for (uint32_t c = 0; c < g.cond_exprs.size(); ++c)
            if (g.cond_exprs[c] != NO_EXPR)
                out += fmt::format("  logic {}c{};\n", t.prefix, c);

        for (uint32_t c = 0; c < g.cond_exprs.size(); ++c)
            if (g.cond_exprs[c] != NO_EXPR)
                out += fmt::format("  assign {}c{} = |({});\n", t.prefix, c,
                                   emit_expr(t, g.cond_exprs[c]));

        std::string seq; // clocked process body (non-reset branch)

        for (EventId e = 0; e < g.events.size(); ++e) {
            if (!g.events[e].alive) continue;
            const EventLabel& l = g.label(e);
            const EventFsm& f = t.plan.events[e];
            std::string fw = fire(t, e);

            auto arm_expr = [&]() -> std::string {
                // the instant all predecessors have fired
                if (l.preds.size() == 1) return fire(t, l.preds[0]);
                std::string nows;
                for (size_t i = 0; i < l.preds.size(); ++i) {
                    if (i) nows += ", ";
                    nows += fire(t, l.preds[i]);
                }
                std::string rdy = fmt::format("{}e{}_rdy_q", t.prefix, e);
                return fmt::format("(&({} | {{{}}}) & ~(&{}))", rdy, nows, rdy);
            };

            switch (f.kind) {
                case EventFsm::Kind::Entry: {
                    std::string wrap;
                    for (EventId w : t.plan.wrap_events) {
                        if (!wrap.empty()) wrap += " | ";
                        wrap += fire(t, w);
                    }
                    out += fmt::format("  assign {} = {}boot_q{};\n", fw, t.prefix,
                                       wrap.empty() ? "" : " | " + wrap);
                    break;
                }
                case EventFsm::Kind::LatestJoin: {
                    out += fmt::format("  assign {} = {};\n", fw, arm_expr());
                    emit_rdy_seq(seq, t, e, l, f);
                    break;
                }
                case EventFsm::Kind::Delay: {
                    std::string cnt = fmt::format("{}e{}_cnt_q", t.prefix, e);
                    out += fmt::format("  assign {} = {} == {}'d1;\n", fw, cnt,
                                       f.counter_width);
                    emit_rdy_seq(seq, t, e, l, f);
                    std::string arm = f.reached_bits > 1
                                          ? fmt::format("{}e{}_arm", t.prefix, e)
                                          : arm_expr();
                    if (f.reached_bits > 1) {
                        // named wire for the multi-predecessor arm condition
                        out += fmt::format("  logic {0}e{1}_arm;\n  assign {0}e{1}_arm = {2};\n",
                                           t.prefix, e, arm_expr());
                    }
                    seq += fmt::format("      if ({}) {} <= {}'d{};\n", arm, cnt,
                                       f.counter_width, l.delay);
                    seq += fmt::format("      else if ({0} != {1}'d0) {0} <= {0} - {1}'d1;\n",
                                       cnt, f.counter_width);
                    break;
                }
                case EventFsm::Kind::MinJoin: {
                    std::string any;
                    for (size_t i = 0; i < l.preds.size(); ++i) {
                        if (i) any += " | ";
                        any += fire(t, l.preds[i]);
                    }
                    out += fmt::format("  assign {} = {};\n", fw, any);
                    break;
                }
                case EventFsm::Kind::Branch: {
                    out += fmt::format("  assign {} = {} & {}{}c{};\n", fw,
                                       fire(t, l.preds[0]), l.branch_side ? "" : "!",
                                       t.prefix, l.cond);
                    break;
                }
                case EventFsm::Kind::SyncDynamic: {
                    std::string pend = fmt::format("{}e{}_pend_q", t.prefix, e);
                    std::string avail = fmt::format("({} | {})", pend, fire(t, l.preds[0]));
                    MsgPorts p = ports_of(l.msg.endpoint, l.msg.msg);
                    std::string base = port_base(l.msg.endpoint, l.msg.msg);
                    std::string handshake = l.is_send
                                                ? (p.has_ack ? base + "_ack" : "1'b1")
                                                : (p.has_valid ? base + "_valid" : "1'b1");
                    out += fmt::format("  assign {} = {} & {};\n", fw, avail, handshake);
                    seq += fmt::format("      {0} <= ({0} | {1}) & ~{2};\n", pend,
                                       fire(t, l.preds[0]), fw);
                    register_sync_site(t, e, avail);
                    break;
                }
                case EventFsm::Kind::SyncImmediate: {
                    out += fmt::format("  assign {} = {};\n", fw, fire(t, l.preds[0]));
                    register_sync_site(t, e, fw);
                    break;
                }
                case EventFsm::Kind::SyncPinned: {
                    std::string refw = fire(t, l.sync_ref);
                    if (f.counter_width == 0) {
                        out += fmt::format("  assign {} = {};\n", fw, refw);
                    } else {
                        std::string sh = fmt::format("{}e{}_sh_q", t.prefix, e);
                        out += fmt::format("  assign {} = {}[{}];\n", fw, sh,
                                           f.counter_width - 1);
                        if (f.counter_width == 1)
                            seq += fmt::format("      {} <= {};\n", sh, refw);
                        else
                            seq += fmt::format("      {0} <= {{{0}[{1}:0], {2}}};\n", sh,
                                               f.counter_width - 2, refw);
                    }
                    register_sync_site(t, e, fw);
                    break;
                }
            }

            for (const GraphAction& a : g.events[e].actions) {
                switch (a.kind) {
                    case GraphAction::Kind::RegWrite:
                        write_sites_.push_back({a.reg, fw, emit_expr(t, a.expr)});
                        break;
                    case GraphAction::Kind::Print: {
                        std::string args;
                        for (ExprId x : a.args) args += fmt::format(", {}", emit_expr(t, x));
                        display_lines_.push_back(fmt::format(
                            "      if ({}) $display(\"{}\"{});\n", fw, a.fmt, args));
                        break;
                    }
                    default:
                        break; // send/recv handled through the sync machinery
                }
            }
        }

        out += "  always_ff @(posedge clk_i) begin\n";
        out += fmt::format("    if (!rst_ni) begin\n      {}boot_q <= 1'b1;\n", t.prefix);
        for (EventId e = 0; e < g.events.size(); ++e) {
            if (!g.events[e].alive) continue;
            const EventFsm& f = t.plan.events[e];
            if (f.reached_bits > 1)
                out += fmt::format("      {}e{}_rdy_q <= '0;\n", t.prefix, e);
            if (f.kind == EventFsm::Kind::Delay)
                out += fmt::format("      {}e{}_cnt_q <= '0;\n", t.prefix, e);
            if (f.kind == EventFsm::Kind::SyncPinned && f.counter_width > 0)
                out += fmt::format("      {}e{}_sh_q <= '0;\n", t.prefix, e);
            if (f.pending_bit) out += fmt::format("      {}e{}_pend_q <= 1'b0;\n", t.prefix, e);
        }
        out += "    end else begin\n";
        out += fmt::format("      {}boot_q <= 1'b0;\n", t.prefix);
        out += seq;
        out += "    end\n  end\n";
    }

    void emit_rdy_seq(std::string& seq, const ThreadLower& t, EventId e, const EventLabel& l,
                      const EventFsm& f) {
        if (f.reached_bits <= 1) return;
        std::string rdy = fmt::format("{}e{}_rdy_q", t.prefix, e);
        std::string nows;
        for (size_t i = 0; i < l.preds.size(); ++i) {
            if (i) nows += ", ";
            nows += fire(t, l.preds[i]);
        }
        std::string consumed = f.kind == EventFsm::Kind::LatestJoin
                                   ? fire(t, e)
                                   : fmt::format("{}e{}_arm", t.prefix, e);
        seq += fmt::format("      {0} <= {1} ? '0 : ({0} | {{{2}}});\n", rdy, consumed, nows);
    }

    void register_sync_site(const ThreadLower& t, EventId e, const std::string& avail) {
        const EventLabel& l = t.tc.graph.label(e);
        if (l.is_send) {
            // payload expression of the attached send action
            std::string expr = "'0";
            for (const GraphAction& a : t.tc.graph.events[e].actions)
                if (a.kind == GraphAction::Kind::Send && a.msg == l.msg)
                    expr = emit_expr(t, a.expr);
            send_sites_[key(l.msg)].push_back({avail, expr});
        } else {
            recv_avails_[key(l.msg)].push_back(avail);
        }
    }

    void emit_message_ports_logic(std::string& out) {
        // every endpoint message this process touches gets its drive logic;
        // unused output ports are tied off
        for (EndpointId ep = 0; ep < proc_.endpoints.size(); ++ep) {
            bool mine = ep < proc_.param_count;
            if (!mine) {
                // internal endpoint: only drive if this process's threads own it
                bool used = false;
                const ResolvedChanType& ct = unit_.chan_of(proc_, ep);
                for (MsgId m = 0; m < ct.messages.size(); ++m)
                    if (send_sites_.count(key({ep, m})) || recv_avails_.count(key({ep, m})))
                        used = true;
                if (!used) continue;
            }
            auto ports = lower_messages(unit_, proc_.endpoints[ep].chan_type,
                                        proc_.endpoints[ep].side);
            for (const MsgPorts& p : ports) {
                std::string base = port_base(ep, p.msg);
                uint64_t k = key({ep, p.msg});
                if (p.sender) {
                    auto it = send_sites_.find(k);
                    if (it == send_sites_.end()) {
                        if (!proc_.endpoints[ep].is_param) continue;
                        out += fmt::format("  assign {}_data = '0;\n", base);
                        if (p.has_valid) out += fmt::format("  assign {}_valid = 1'b0;\n", base);
                        continue;
                    }
                    std::string data;
                    for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit)
                        data = data.empty()
                                   ? rit->expr
                                   : fmt::format("{} ? {} : ({})", rit->avail, rit->expr, data);
                    out += fmt::format("  assign {}_data = {};\n", base, data);
                    if (p.has_valid) {
                        std::string v;
                        for (const SendSite& s : it->second) {
                            if (!v.empty()) v += " | ";
                            v += s.avail;
                        }
                        out += fmt::format("  assign {}_valid = {};\n", base, v);
                    }
                } else {
                    if (!p.has_ack) continue;
                    auto it = recv_avails_.find(k);
                    if (it == recv_avails_.end()) {
                        if (proc_.endpoints[ep].is_param)
                            out += fmt::format("  assign {}_ack = 1'b0;\n", base);
                        continue;
                    }
                    std::string v;
                    for (const std::string& s : it->second) {
                        if (!v.empty()) v += " | ";
                        v += s;
                    }
                    out += fmt::format("  assign {}_ack = {};\n", base, v);
                }
            }
        }
    }

    void emit_register_updates(std::string& out) {
        if (proc_.reg_names.empty() && display_lines_.empty()) return;
        if (!proc_.reg_names.empty()) {
            out += "  always_ff @(posedge clk_i) begin\n    if (!rst_ni) begin\n";
            for (RegId r = 0; r < proc_.reg_names.size(); ++r)
                out += fmt::format("      {}_q <= '0;\n", sv_ident(proc_.reg_names[r]));
            out += "    end else begin\n";
            for (const WriteSite& w : write_sites_)
                out += fmt::format("      if ({}) {}_q <= {};\n", w.fire,
                                   sv_ident(proc_.reg_names[w.reg]), w.expr);
            out += "    end\n  end\n";
        }
        if (!display_lines_.empty()) {
            out += "`ifndef SYNTHESIS\n  always_ff @(posedge clk_i) begin\n"
                   "    if (rst_ni) begin\n";
            for (const std::string& d : display_lines_) out += d;
            out += "    end\n  end\n`endif\n";
        }
    }
};

void reachable_procs(const ResolvedUnit& unit, ProcId p, std::vector<ProcId>& order,
                     std::vector<int>& state, bool& cyclic) {
    if (state[p] == 1) {
        cyclic = true;
        return;
    }
    if (state[p] == 2) return;
    state[p] = 1;
    for (const auto& s : unit.procs[p].spawns)
        reachable_procs(unit, s.proc, order, state, cyclic);
    state[p] = 2;
    order.push_back(p);
}

} // namespace

std::string emit_sv(const ResolvedUnit& unit, ProcId top, DiagnosticEngine& diags,
                    const EmitOptions& opts) {
    std::vector<ProcId> order;
    std::vector<int> state(unit.procs.size(), 0);
    bool cyclic = false;
    reachable_procs(unit, top, order, state, cyclic);
    if (cyclic) {
        diags.report({Severity::Error, DiagClass::Codegen,
                      "Process instantiation is recursive; cannot generate hardware",
                      unit.procs[top].src->span,
                      {}});
        return {};
    }
    std::string out = fmt::format("// Generated by anvil 0.1.0\n");
    for (ProcId p : order) {
        std::string mod;
        ModuleEmitter em(unit, unit.procs[p], diags, opts);
        if (!em.run(mod)) return {};
        out += "\n" + mod;
    }
    return out;
}

} // namespace anvil
