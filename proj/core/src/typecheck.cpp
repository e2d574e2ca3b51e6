#include "anvil/typecheck.hpp"

#include "anvil/timing.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace anvil {

std::string render_pat(const EventGraph& g, const Pat& p) {
    if (p.dur == Pat::Dur::Cycles)
        return p.cycles == 0 ? fmt::format("e{}", p.base)
                             : fmt::format("e{}:#{}", p.base, p.cycles);
    return fmt::format("e{}:{}", p.base, g.msg_label(p.msg));
}

std::string render_patset(const EventGraph& g, const PatSet& s) {
    if (s.eternal()) return "∞";
    if (s.pats.size() == 1) return render_pat(g, s.pats[0]);
    std::string out = "{";
    for (size_t i = 0; i < s.pats.size(); ++i) {
        if (i) out += ", ";
        out += render_pat(g, s.pats[i]);
    }
    out += "}";
    return out;
}

std::string render_interval(const EventGraph& g, EventId start, const PatSet& end) {
    return fmt::format("[e{}, {})", start, render_patset(g, end));
}

namespace {

bool assumptions_compatible(const Assumptions& a, const Assumptions& b) {
    for (const Assumption& x : a)
        for (const Assumption& y : b)
            if (x.cond == y.cond && x.side != y.side) return false;
    return true;
}

Assumptions merge_assumptions(const Assumptions& a, const Assumptions& b) {
    Assumptions out = a;
    for (const Assumption& y : b) out = with_assumption(out, y.cond, y.side);
    return out;
}

class Discharger {
  public:
    Discharger(const ResolvedUnit& unit, const ResolvedProc& proc, ThreadCheck& tc,
               DiagnosticEngine& diags)
        : unit_(unit), proc_(proc), tc_(tc), prover_(tc.graph), diags_(diags) {}

    void run() {
        for (const Obligation& o : tc_.obligations) {
            switch (o.kind) {
                case Obligation::Kind::ValueUse: discharge_use(o); break;
                case Obligation::Kind::SendCoverage: discharge_coverage(o); break;
                case Obligation::Kind::RegMutation: discharge_mutation(o); break;
                case Obligation::Kind::DependentArrival: discharge_dependent(o); break;
            }
        }
        discharge_send_overlaps();
        discharge_static_modes();
    }

  private:
    const ResolvedUnit& unit_;
    const ResolvedProc& proc_;
    ThreadCheck& tc_;
    TimingProver prover_;
    DiagnosticEngine& diags_;

    const EventGraph& g() const { return tc_.graph; }

    bool window_within(EventId win_start, const PatSet& win_end, const ValueInfo& v,
                       const Assumptions& as) {
        if (prover_.le(Pat::at(v.start), Pat::at(win_start), as) != Verdict::Proved)
            return false;
        return prover_.le(win_end, v.ends, as) == Verdict::Proved;
    }

    void discharge_use(const Obligation& o) {
        const ValueInfo& v = tc_.values[o.value];
        if (window_within(o.win_start, o.win_end, v, o.assumptions)) return;
        diags_.report({Severity::Error, DiagClass::ValueUse, "Value not live long enough!",
                       o.span, {}});
        diags_.note_on_last(fmt::format("value is live for {} but is used during {}",
                                        render_interval(g(), v.start, v.ends),
                                        render_interval(g(), o.win_start, o.win_end)),
                            v.span);
    }

    void discharge_coverage(const Obligation& o) {
        const ValueInfo& v = tc_.values[o.value];
        if (window_within(o.win_start, o.win_end, v, o.assumptions)) return;
        diags_.report({Severity::Error, DiagClass::SendCoverage,
                       "Value not live long enough in message send!", o.span, {}});
        diags_.note_on_last(
            fmt::format("the contract requires the sent value to be live for {} but it is "
                        "live for {}",
                        render_interval(g(), o.win_start, o.win_end),
                        render_interval(g(), v.start, v.ends)),
            v.span);
    }

    void discharge_mutation(const Obligation& o) {
        auto it = tc_.loans.find(o.reg);
        if (it == tc_.loans.end()) return;
        PatSet mut_done = PatSet::of(Pat::at(o.mut_event, 1));
        for (const LoanInterval& loan : it->second) {
            if (!assumptions_compatible(o.assumptions, loan.assumptions)) continue;
            Assumptions as = merge_assumptions(o.assumptions, loan.assumptions);
            // fine unless the loan can contain both the old and the new value:
            // it must start strictly after the mutation or end by its completion
            if (prover_.lt(Pat::at(o.mut_event), Pat::at(loan.start), as) == Verdict::Proved)
                continue;
            if (prover_.le(loan.end, mut_done, as) == Verdict::Proved) continue;
            diags_.report({Severity::Error, DiagClass::RegMutation,
                           fmt::format("Assignment conflicts with the loan time of register "
                                       "'{}'!",
                                       proc_.reg_names[o.reg]),
                           o.span,
                           {}});
            diags_.note_on_last(
                fmt::format("the register is loaned for {}; mutating it during [e{}, {}) "
                            "doesn't satisfy the timing contract of its readers",
                            render_interval(g(), loan.start, loan.end), o.mut_event,
                            render_pat(g(), Pat::at(o.mut_event, 1))),
                loan.origin);
            return; // one diagnostic per assignment site
        }
    }

    void discharge_dependent(const Obligation& o) {
        const ResolvedMessage& rm = unit_.message(proc_, o.msg);
        std::string name = g().msg_label(o.msg);
        if (o.sync == NO_EVENT) {
            int side = proc_.endpoints[o.msg.endpoint].side == ast::Side::Left ? 0 : 1;
            diags_.report({Severity::Error, DiagClass::SyncDependent,
                           fmt::format("Dependent sync of '{}' has no earlier '{}' "
                                       "synchronization to anchor to",
                                       name, rm.sync[side].message),
                           o.span,
                           {}});
            return;
        }
        if (prover_.le(Pat::at(o.arrive), Pat::at(o.sync), o.assumptions) == Verdict::Proved)
            return;
        diags_.report({Severity::Error, DiagClass::SyncDependent,
                       fmt::format("Cannot reach the dependent-synchronized message '{}' "
                                   "in time",
                                   name),
                       o.span,
                       {}});
    }

    void discharge_send_overlaps() {
        // group send windows by message
        std::map<uint64_t, std::vector<const SyncOccurrence*>> sends;
        for (const SyncOccurrence& s : tc_.syncs)
            if (s.is_send)
                sends[(uint64_t(s.msg.endpoint) << 32) | s.msg.msg].push_back(&s);
        for (auto& [key, occs] : sends) {
            (void)key;
            for (size_t i = 0; i < occs.size(); ++i) {
                for (size_t j = i + 1; j < occs.size(); ++j) {
                    const SyncOccurrence& a = *occs[i];
                    const SyncOccurrence& b = *occs[j];
                    if (!assumptions_compatible(a.assumptions, b.assumptions)) continue;
                    Assumptions as = merge_assumptions(a.assumptions, b.assumptions);
                    if (prover_.le(a.required_end, PatSet::of(Pat::at(b.arrival)), as) ==
                        Verdict::Proved)
                        continue;
                    if (prover_.le(b.required_end, PatSet::of(Pat::at(a.arrival)), as) ==
                        Verdict::Proved)
                        continue;
                    diags_.report(
                        {Severity::Error, DiagClass::SendOverlap,
                         fmt::format("Two sends of message '{}' have overlapping required "
                                     "lifetimes!",
                                     g().msg_label(a.msg)),
                         b.span,
                         {}});
                    diags_.note_on_last(
                        fmt::format("required lifetimes {} and {} may overlap",
                                    render_interval(g(), a.arrival, a.required_end),
                                    render_interval(g(), b.arrival, b.required_end)),
                        a.span);
                }
            }
        }
    }

    void discharge_static_modes() {
        std::map<uint64_t, std::vector<const SyncOccurrence*>> by_msg;
        for (const SyncOccurrence& s : tc_.syncs)
            by_msg[(uint64_t(s.msg.endpoint) << 32) | s.msg.msg].push_back(&s);
        for (auto& [key, occs] : by_msg) {
            (void)key;
            const SyncOccurrence& first = *occs.front();
            const ResolvedMessage& rm = unit_.message(proc_, first.msg);
            int my_side = proc_.endpoints[first.msg.endpoint].side == ast::Side::Left ? 0 : 1;
            const ast::SyncMode& mine = rm.sync[my_side];
            const ast::SyncMode& remote = rm.sync[1 - my_side];
            std::string name = g().msg_label(first.msg);

            if (!first.is_send && mine.kind == ast::SyncMode::Kind::Static) {
                // the receiver promises to be back at the receive within N
                // cycles of each sync, and to be listening from thread entry
                if (prover_.le(Pat::at(first.arrival), Pat::at(tc_.entry),
                               first.assumptions) != Verdict::Proved)
                    report_static(first.span, name, mine.cycles,
                                  "the first receive must be reached at thread entry");
                for (size_t i = 1; i < occs.size(); ++i) {
                    const SyncOccurrence& prev = *occs[i - 1];
                    const SyncOccurrence& cur = *occs[i];
                    if (!assumptions_compatible(prev.assumptions, cur.assumptions)) continue;
                    Assumptions as = merge_assumptions(prev.assumptions, cur.assumptions);
                    if (prover_.le(Pat::at(cur.arrival), Pat::at(prev.ev, mine.cycles), as) !=
                        Verdict::Proved)
                        report_static(cur.span, name, mine.cycles,
                                      "cannot prove the receive is re-reached within the "
                                      "promised window");
                }
            }
            if (first.is_send && remote.kind == ast::SyncMode::Kind::Static) {
                // fire-and-forget send: consecutive sends must be at least N
                // cycles apart so the static receiver is ready again
                for (size_t i = 1; i < occs.size(); ++i) {
                    const SyncOccurrence& prev = *occs[i - 1];
                    const SyncOccurrence& cur = *occs[i];
                    if (!assumptions_compatible(prev.assumptions, cur.assumptions)) continue;
                    Assumptions as = merge_assumptions(prev.assumptions, cur.assumptions);
                    if (prover_.le(Pat::at(prev.ev, remote.cycles), Pat::at(cur.arrival),
                                   as) != Verdict::Proved)
                        report_static(cur.span, name, remote.cycles,
                                      "cannot prove consecutive sends are far enough apart "
                                      "for the static receiver");
                }
            }
        }
    }

    void report_static(const SourceSpan& span, const std::string& msg, uint32_t n,
                       const std::string& why) {
        diags_.report({Severity::Error, DiagClass::SyncStatic,
                       fmt::format("Static sync mode @#{} of '{}' cannot be met", n, msg),
                       span,
                       {}});
        diags_.note_on_last(why);
    }
};

} // namespace

ThreadCheck check_thread(const ResolvedUnit& unit, const ResolvedProc& proc,
                         const ResolvedProc::ThreadR& thread, DiagnosticEngine& diags,
                         const CheckOptions& opts) {
    ThreadCheck tc = build_thread(unit, proc, thread, opts.iterations);
    Discharger d(unit, proc, tc, diags);
    d.run();
    return tc;
}

void check_process(const ResolvedUnit& unit, const ResolvedProc& proc,
                   DiagnosticEngine& diags, const CheckOptions& opts) {
    for (const ResolvedProc::ThreadR& th : proc.threads)
        check_thread(unit, proc, th, diags, opts);
}

void check_program(const ResolvedUnit& unit, DiagnosticEngine& diags,
                   const CheckOptions& opts) {
    for (const ResolvedProc& proc : unit.procs) {
        check_process(unit, proc, diags, opts);

        // dangling internal endpoints: neither spawned away nor used here
        std::vector<bool> owned(proc.endpoints.size(), false);
        for (const auto& s : proc.spawns)
            for (EndpointId ep : s.args) owned[ep] = true;
        for (const ResolvedProc::ThreadR& th : proc.threads) {
            // collect endpoints used by this thread's terms
            std::vector<const ast::Term*> stack{th.body};
            while (!stack.empty()) {
                const ast::Term* t = stack.back();
                stack.pop_back();
                if (t->kind == ast::TermKind::Send || t->kind == ast::TermKind::Recv ||
                    t->kind == ast::TermKind::Ready) {
                    auto it = unit.info.find(t);
                    if (it != unit.info.end()) owned[it->second.msg.endpoint] = true;
                }
                for (const ast::TermPtr& k : t->kids) stack.push_back(k.get());
            }
        }
        for (EndpointId ep = proc.param_count; ep < proc.endpoints.size(); ++ep) {
            if (!owned[ep])
                diags.report({Severity::Error, DiagClass::Structure,
                              fmt::format("Endpoint '{}' of process '{}' is never used",
                                          proc.endpoints[ep].name, proc.name),
                              proc.endpoints[ep].span,
                              {}});
        }
    }
}

} // namespace anvil
