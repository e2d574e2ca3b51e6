#include "anvil/infer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace anvil {

using ast::Term;
using ast::TermKind;

PatSet contract_end(const ResolvedUnit& unit, const ResolvedProc& proc, MsgRef m,
                    EventId sync) {
    const ResolvedMessage& rm = unit.message(proc, m);
    switch (rm.duration.kind) {
        case ast::Duration::Kind::Eternal:
            return PatSet::eternal_set();
        case ast::Duration::Kind::Cycles:
            return PatSet::of(Pat::at(sync, rm.duration.cycles));
        case ast::Duration::Kind::Message:
            return PatSet::of(Pat::after_msg(sync, MsgRef{m.endpoint, *rm.duration_msg}));
    }
    return PatSet::eternal_set();
}

static PatSet union_sets(const PatSet& a, const PatSet& b) {
    PatSet out = a;
    for (const Pat& p : b.pats)
        if (std::find(out.pats.begin(), out.pats.end(), p) == out.pats.end())
            out.pats.push_back(p);
    return out;
}

namespace {

class Builder {
  public:
    Builder(const ResolvedUnit& unit, const ResolvedProc& proc, ThreadCheck& out)
        : unit_(unit), proc_(proc), out_(out) {}

    void run(const ResolvedProc::ThreadR& thread, int iterations) {
        out_.recursive = thread.recursive;
        EventId e0 = out_.graph.add_root();
        out_.entry = e0;
        label_messages();

        if (!thread.recursive) {
            EventId at = e0;
            for (int i = 0; i < iterations; ++i) {
                iteration_ = i;
                uint32_t v = infer(*thread.body, at, {});
                at = out_.values[v].start;
                if (i == 0) out_.iter1_completion = at;
            }
            out_.completion = at;
        } else {
            iteration_ = 0;
            uint32_t v1 = infer(*thread.body, e0, {});
            out_.iter1_completion = out_.values[v1].start;
            out_.completion = out_.values[v1].start;
            std::vector<EventId> anchors = out_.markers;
            for (int i = 1; i < iterations; ++i) {
                iteration_ = i;
                std::vector<EventId> next;
                for (EventId m : anchors) {
                    marker_sink_ = &next;
                    infer(*thread.body, m, {});
                }
                marker_sink_ = nullptr;
                anchors = std::move(next);
            }
        }

        demand_pass();
    }

  private:
    const ResolvedUnit& unit_;
    const ResolvedProc& proc_;
    ThreadCheck& out_;
    int iteration_ = 0;
    uint32_t cond_counter_ = 0;
    uint32_t action_counter_ = 0;
    std::map<const Term*, uint32_t> env_; // let node -> bound value
    std::map<uint64_t, EventId> last_sync_; // message key -> latest sync event
    std::vector<EventId>* marker_sink_ = nullptr;

    void label_messages() {
        for (EndpointId ep = 0; ep < proc_.endpoints.size(); ++ep) {
            const ResolvedChanType& ct = unit_.chan_of(proc_, ep);
            for (MsgId m = 0; m < ct.messages.size(); ++m)
                out_.graph.set_msg_label({ep, static_cast<MsgId>(m)},
                                         fmt::format("{}.{}", proc_.endpoints[ep].name,
                                                     ct.messages[m].name));
        }
    }

    uint32_t add_value(ValueInfo v) {
        out_.values.push_back(std::move(v));
        return static_cast<uint32_t>(out_.values.size() - 1);
    }

    const TermInfo& info(const Term& t) const {
        auto it = unit_.info.find(&t);
        if (it == unit_.info.end())
            throw std::logic_error("term missing resolution info");
        return it->second;
    }

    uint32_t next_action_id() { return action_counter_++; }

    // ----- the typing-rule walk ---------------------------------------------

    uint32_t infer(const Term& t, EventId ec, Assumptions as) {
        switch (t.kind) {
            case TermKind::Literal:
            case TermKind::Unit: {
                ValueInfo v;
                v.kind = t.kind == TermKind::Unit ? ValueInfo::Kind::Unit
                                                  : ValueInfo::Kind::Literal;
                v.start = ec;
                v.span = t.span;
                v.assumptions = as;
                Expr e;
                e.kind = t.kind == TermKind::Unit ? Expr::Kind::Unit : Expr::Kind::Literal;
                e.lexeme = t.text;
                e.value = t.value;
                e.width = t.sized ? t.width : 32;
                e.sized = t.sized;
                v.expr = out_.graph.add_expr(e);
                return add_value(std::move(v));
            }
            case TermKind::Cycle: {
                EventId done = out_.graph.add_delay(t.cycles, {ec});
                ValueInfo v;
                v.kind = ValueInfo::Kind::CycleUnit;
                v.start = done;
                v.span = t.span;
                v.assumptions = as;
                v.expr = out_.graph.add_expr({});
                return add_value(std::move(v));
            }
            case TermKind::Ident: {
                const Term* binding = info(t).binding;
                uint32_t target = env_.at(binding);
                const ValueInfo& tv = out_.values[target];
                EventId start = out_.graph.add_delay(0, {ec, tv.start});
                ValueInfo v;
                v.kind = ValueInfo::Kind::Ref;
                v.start = start;
                v.ends = tv.ends;
                v.operands = {target};
                v.expr = tv.expr;
                v.span = t.span;
                v.assumptions = as;
                return add_value(std::move(v));
            }
            case TermKind::RegRead: {
                ValueInfo v;
                v.kind = ValueInfo::Kind::RegRead;
                v.start = ec;
                v.reg = info(t).reg;
                v.read_event = ec;
                v.span = t.span;
                v.assumptions = as;
                Expr e;
                e.kind = Expr::Kind::RegRead;
                e.reg = v.reg;
                e.width = proc_.reg_widths.empty() ? 1 : proc_.reg_widths[v.reg];
                v.expr = out_.graph.add_expr(e);
                return add_value(std::move(v));
            }
            case TermKind::Wait: {
                uint32_t v1 = infer(*t.kids[0], ec, as);
                return infer(*t.kids[1], out_.values[v1].start, as);
            }
            case TermKind::Join: {
                uint32_t v1 = infer(*t.kids[0], ec, as);
                uint32_t v2 = infer(*t.kids[1], ec, as);
                EventId j = out_.graph.add_delay(
                    0, {out_.values[v1].start, out_.values[v2].start});
                ValueInfo v;
                v.kind = ValueInfo::Kind::Ref;
                v.start = j;
                v.ends = out_.values[v2].ends;
                v.operands = {v2};
                v.expr = out_.values[v2].expr;
                v.span = t.span;
                v.assumptions = as;
                return add_value(std::move(v));
            }
            case TermKind::Let: {
                uint32_t bound = infer(*t.kids[0], ec, as);
                if (iteration_ == 0)
                    out_.bindings.emplace(t.text, bound);
                env_[&t] = bound;
                if (t.seq) {
                    // body starts when the bound term completes
                    return infer(*t.kids[1], out_.values[bound].start, as);
                }
                uint32_t body = infer(*t.kids[1], ec, as);
                EventId j = out_.graph.add_delay(
                    0, {out_.values[bound].start, out_.values[body].start});
                ValueInfo v;
                v.kind = ValueInfo::Kind::Ref;
                v.start = j;
                v.ends = out_.values[body].ends;
                v.operands = {body};
                v.expr = out_.values[body].expr;
                v.span = t.span;
                v.assumptions = as;
                return add_value(std::move(v));
            }
            case TermKind::BinOp:
            case TermKind::UnOp: {
                uint32_t va = infer(*t.kids[0], ec, as);
                uint32_t vb = t.kind == TermKind::BinOp ? infer(*t.kids[1], ec, as) : va;
                EventId start =
                    t.kind == TermKind::BinOp
                        ? out_.graph.add_delay(0, {out_.values[va].start,
                                                   out_.values[vb].start})
                        : out_.values[va].start;
                ValueInfo v;
                v.kind = t.kind == TermKind::BinOp ? ValueInfo::Kind::BinOp
                                                   : ValueInfo::Kind::UnOp;
                v.start = start;
                v.ends = t.kind == TermKind::BinOp
                             ? union_sets(out_.values[va].ends, out_.values[vb].ends)
                             : out_.values[va].ends;
                v.operands = t.kind == TermKind::BinOp ? std::vector<uint32_t>{va, vb}
                                                       : std::vector<uint32_t>{va};
                Expr e;
                if (t.kind == TermKind::BinOp) {
                    e.kind = Expr::Kind::BinOp;
                    e.bin = t.bin;
                    e.a = out_.values[va].expr;
                    e.b = out_.values[vb].expr;
                    bool cmp = t.bin == ast::BinOpKind::Lt || t.bin == ast::BinOpKind::Le ||
                               t.bin == ast::BinOpKind::Gt || t.bin == ast::BinOpKind::Ge ||
                               t.bin == ast::BinOpKind::Eq || t.bin == ast::BinOpKind::Ne;
                    e.width = cmp ? 1
                                  : std::max(out_.graph.exprs[e.a].width,
                                             out_.graph.exprs[e.b].width);
                } else {
                    e.kind = Expr::Kind::UnOp;
                    e.un = t.un;
                    e.a = out_.values[va].expr;
                    e.width = t.un == ast::UnOpKind::LogNot
                                  ? 1
                                  : out_.graph.exprs[e.a].width;
                }
                v.expr = out_.graph.add_expr(e);
                v.span = t.span;
                v.assumptions = as;
                return add_value(std::move(v));
            }
            case TermKind::If: {
                uint32_t vc = infer(*t.kids[0], ec, as);
                Obligation use;
                use.kind = Obligation::Kind::ValueUse;
                use.value = vc;
                use.win_start = ec;
                use.win_end = PatSet::of(Pat::at(ec, 1));
                use.span = t.kids[0]->span;
                use.assumptions = as;
                out_.obligations.push_back(std::move(use));

                uint32_t cond = cond_counter_++;
                out_.graph.cond_exprs.resize(
                    std::max<size_t>(out_.graph.cond_exprs.size(), cond + 1), NO_EXPR);
                out_.graph.cond_exprs[cond] = out_.values[vc].expr;

                EventId bt = out_.graph.add_branch(cond, true, ec);
                EventId bf = out_.graph.add_branch(cond, false, ec);
                uint32_t va = infer(*t.kids[1], bt, with_assumption(as, cond, true));
                uint32_t vb;
                if (t.kids.size() > 2) {
                    vb = infer(*t.kids[2], bf, with_assumption(as, cond, false));
                } else {
                    ValueInfo u;
                    u.kind = ValueInfo::Kind::Unit;
                    u.start = bf;
                    u.span = t.span;
                    u.assumptions = with_assumption(as, cond, false);
                    u.expr = out_.graph.add_expr({});
                    vb = add_value(std::move(u));
                }
                EventId j = out_.graph.add_join({out_.values[va].start, out_.values[vb].start});
                ValueInfo v;
                v.kind = ValueInfo::Kind::IfResult;
                v.start = j;
                v.ends = union_sets(out_.values[vc].ends,
                                    union_sets(out_.values[va].ends, out_.values[vb].ends));
                v.operands = {va, vb};
                Expr e;
                e.kind = Expr::Kind::Mux;
                e.a = out_.values[vc].expr;
                e.b = out_.values[va].expr;
                e.c = out_.values[vb].expr;
                e.width = std::max(out_.graph.exprs[e.b].width, out_.graph.exprs[e.c].width);
                v.expr = out_.graph.add_expr(e);
                v.span = t.span;
                v.assumptions = as;
                return add_value(std::move(v));
            }
            case TermKind::Recv:
            case TermKind::Send: {
                const TermInfo& ti = info(t);
                bool is_send = t.kind == TermKind::Send;
                uint32_t payload = 0;
                if (is_send) payload = infer(*t.kids[0], ec, as);
                EventId sync = make_sync(ti.msg, is_send, ec, as, t.span);
                record_sync(ti.msg, sync, is_send, ec, as, t.span);

                if (is_send) {
                    PatSet required = contract_end(unit_, proc_, ti.msg, sync);
                    Obligation cov;
                    cov.kind = Obligation::Kind::SendCoverage;
                    cov.value = payload;
                    cov.win_start = ec;
                    cov.win_end = required;
                    cov.span = t.span;
                    cov.assumptions = as;
                    out_.obligations.push_back(cov);
                    out_.values[payload].demands.push_back(required);
                    out_.syncs.back().required_end = required;

                    GraphAction act;
                    act.kind = GraphAction::Kind::Send;
                    act.id = next_action_id();
                    act.msg = ti.msg;
                    act.expr = out_.values[payload].expr;
                    act.span = t.span;
                    out_.graph.events[sync].actions.push_back(std::move(act));

                    ValueInfo v;
                    v.kind = ValueInfo::Kind::Send;
                    v.start = sync;
                    v.span = t.span;
                    v.assumptions = as;
                    v.expr = out_.graph.add_expr({});
                    return add_value(std::move(v));
                }

                GraphAction act;
                act.kind = GraphAction::Kind::Recv;
                act.id = next_action_id();
                act.msg = ti.msg;
                act.span = t.span;
                out_.graph.events[sync].actions.push_back(std::move(act));

                ValueInfo v;
                v.kind = ValueInfo::Kind::Recv;
                v.start = sync;
                v.ends = contract_end(unit_, proc_, ti.msg, sync);
                v.span = t.span;
                v.assumptions = as;
                Expr e;
                e.kind = Expr::Kind::PortData;
                e.msg = ti.msg;
                e.width = unit_.message(proc_, ti.msg).width;
                v.expr = out_.graph.add_expr(e);
                return add_value(std::move(v));
            }
            case TermKind::RegAssign: {
                uint32_t payload = infer(*t.kids[0], ec, as);
                RegId reg = info(t).reg;

                Obligation use;
                use.kind = Obligation::Kind::ValueUse;
                use.value = payload;
                use.win_start = ec;
                use.win_end = PatSet::of(Pat::at(ec, 1));
                use.span = t.span;
                use.assumptions = as;
                out_.obligations.push_back(std::move(use));
                out_.values[payload].demands.push_back(PatSet::of(Pat::at(ec, 1)));

                Obligation mut;
                mut.kind = Obligation::Kind::RegMutation;
                mut.reg = reg;
                mut.mut_event = ec;
                mut.span = t.span;
                mut.assumptions = as;
                out_.obligations.push_back(std::move(mut));

                GraphAction act;
                act.kind = GraphAction::Kind::RegWrite;
                act.id = next_action_id();
                act.reg = reg;
                act.expr = out_.values[payload].expr;
                act.span = t.span;
                out_.graph.events[ec].actions.push_back(std::move(act));

                EventId done = out_.graph.add_delay(1, {ec});
                ValueInfo v;
                v.kind = ValueInfo::Kind::AssignUnit;
                v.start = done;
                v.span = t.span;
                v.assumptions = as;
                v.expr = out_.graph.add_expr({});
                return add_value(std::move(v));
            }
            case TermKind::Ready: {
                const TermInfo& ti = info(t);
                ValueInfo v;
                v.kind = ValueInfo::Kind::Ready;
                v.start = ec;
                v.ends = PatSet::of(Pat::at(ec, 1));
                v.span = t.span;
                v.assumptions = as;
                Expr e;
                e.kind = Expr::Kind::Ready;
                e.msg = ti.msg;
                e.width = 1;
                v.expr = out_.graph.add_expr(e);
                return add_value(std::move(v));
            }
            case TermKind::Recurse: {
                if (iteration_ == 0) out_.markers.push_back(ec);
                else if (marker_sink_) marker_sink_->push_back(ec);
                ValueInfo v;
                v.kind = ValueInfo::Kind::Marker;
                v.start = ec;
                v.span = t.span;
                v.assumptions = as;
                v.expr = out_.graph.add_expr({});
                return add_value(std::move(v));
            }
            case TermKind::DPrint: {
                GraphAction act;
                act.kind = GraphAction::Kind::Print;
                act.id = next_action_id();
                act.fmt = t.text;
                for (const ast::TermPtr& k : t.kids) {
                    uint32_t va = infer(*k, ec, as);
                    act.args.push_back(out_.values[va].expr);
                }
                act.span = t.span;
                out_.graph.events[ec].actions.push_back(std::move(act));
                ValueInfo v;
                v.kind = ValueInfo::Kind::Print;
                v.start = ec;
                v.span = t.span;
                v.assumptions = as;
                v.expr = out_.graph.add_expr({});
                return add_value(std::move(v));
            }
        }
        throw std::logic_error("unhandled term kind");
    }

    // Timing of a synchronization event: dependent modes pin it a fixed
    // offset after the referenced message's latest sync; a static promise on
    // the remote receiver makes a send complete on arrival.
    EventId make_sync(MsgRef m, bool is_send, EventId ec, const Assumptions& as,
                      const SourceSpan& span) {
        const ResolvedMessage& rm = unit_.message(proc_, m);
        int my_side = proc_.endpoints[m.endpoint].side == ast::Side::Left ? 0 : 1;
        const ast::SyncMode& mine = rm.sync[my_side];
        const ast::SyncMode& remote = rm.sync[1 - my_side];

        if (mine.kind == ast::SyncMode::Kind::Dependent) {
            MsgRef ref_msg{m.endpoint, *rm.sync_msg[my_side]};
            auto it = last_sync_.find((uint64_t(ref_msg.endpoint) << 32) | ref_msg.msg);
            EventId sync;
            if (it == last_sync_.end()) {
                // no anchor yet; fall back to a dynamic sync, reported later
                sync = out_.graph.add_msg_sync(m, is_send, ec);
                Obligation o;
                o.kind = Obligation::Kind::DependentArrival;
                o.arrive = ec;
                o.sync = NO_EVENT;
                o.msg = m;
                o.span = span;
                o.assumptions = as;
                out_.obligations.push_back(o);
                return sync;
            }
            sync = out_.graph.add_msg_sync(m, is_send, ec, SyncTiming::Pinned, it->second,
                                           mine.cycles);
            Obligation o;
            o.kind = Obligation::Kind::DependentArrival;
            o.arrive = ec;
            o.sync = sync;
            o.msg = m;
            o.span = span;
            o.assumptions = as;
            out_.obligations.push_back(o);
            return sync;
        }
        if (is_send && remote.kind == ast::SyncMode::Kind::Static)
            return out_.graph.add_msg_sync(m, is_send, ec, SyncTiming::Immediate);
        return out_.graph.add_msg_sync(m, is_send, ec);
    }

    void record_sync(MsgRef m, EventId sync, bool is_send, EventId arrival,
                     const Assumptions& as, const SourceSpan& span) {
        last_sync_[(uint64_t(m.endpoint) << 32) | m.msg] = sync;
        SyncOccurrence occ;
        occ.msg = m;
        occ.ev = sync;
        occ.is_send = is_send;
        occ.arrival = arrival;
        occ.assumptions = as;
        occ.span = span;
        out_.syncs.push_back(std::move(occ));
    }

    // Demands flow from use sites back to the values they constrain; a
    // register read turns each arriving demand into a loan interval.
    void demand_pass() {
        for (size_t i = out_.values.size(); i-- > 0;) {
            ValueInfo& v = out_.values[i];
            if (v.demands.empty()) continue;
            switch (v.kind) {
                case ValueInfo::Kind::RegRead: {
                    for (const PatSet& d : v.demands)
                        out_.loans[v.reg].push_back({v.read_event, d, v.span, v.assumptions});
                    break;
                }
                case ValueInfo::Kind::BinOp:
                case ValueInfo::Kind::UnOp:
                case ValueInfo::Kind::Ref:
                case ValueInfo::Kind::IfResult: {
                    for (uint32_t op : v.operands)
                        for (const PatSet& d : v.demands)
                            out_.values[op].demands.push_back(d);
                    break;
                }
                default:
                    break;
            }
        }
    }
};

} // namespace

bool ThreadCheck::contains_reg_read(uint32_t value) const {
    const ValueInfo& v = values[value];
    if (v.kind == ValueInfo::Kind::RegRead) return true;
    for (uint32_t op : v.operands)
        if (contains_reg_read(op)) return true;
    return false;
}

PatSet ThreadCheck::report_ends(uint32_t value) const {
    const ValueInfo& v = values[value];
    PatSet out = v.ends;
    if (contains_reg_read(value))
        for (const PatSet& d : v.demands)
            out = union_sets(out, d);
    return out;
}

ThreadCheck build_thread(const ResolvedUnit& unit, const ResolvedProc& proc,
                         const ResolvedProc::ThreadR& thread, int iterations) {
    ThreadCheck out;
    Builder b(unit, proc, out);
    b.run(thread, iterations);
    if (!out.graph.check_acyclic())
        throw std::logic_error("event graph construction produced a cycle");
    return out;
}

} // namespace anvil
