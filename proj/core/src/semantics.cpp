#include "anvil/semantics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <stdexcept>

namespace anvil::sem {

bool Dur::operator<(const Dur& o) const {
    return std::tie(kind, cycles, msg) < std::tie(o.kind, o.cycles, o.msg);
}

bool Action::operator<(const Action& o) const {
    return std::tie(kind, v, regs, vals, msg, dur) <
           std::tie(o.kind, o.v, o.regs, o.vals, o.msg, o.dur);
}

Log empties(size_t k) {
    Log l;
    l.cycles.resize(k);
    return l;
}

static void insert_sorted(CycleActions& c, Action a) {
    c.insert(std::upper_bound(c.begin(), c.end(), a), std::move(a));
}

Log overlap_concat(Log a, const Log& b) {
    if (a.cycles.empty()) return b;
    if (b.cycles.empty()) return a;
    for (const Action& x : b.cycles.front()) insert_sorted(a.cycles.back(), x);
    a.cycles.insert(a.cycles.end(), b.cycles.begin() + 1, b.cycles.end());
    return a;
}

Log merge(Log a, const Log& b) {
    if (a.cycles.size() < b.cycles.size()) a.cycles.resize(b.cycles.size());
    for (size_t i = 0; i < b.cycles.size(); ++i)
        for (const Action& x : b.cycles[i]) insert_sorted(a.cycles[i], x);
    return a;
}

// ---------------------------------------------------------------------------
// Per-term enumeration (the E-rules)

namespace {

struct Binding {
    uint32_t delay = 0;
    ValId value = 0;
};

using Env = std::map<const ast::Term*, Binding>;

Env shift_env(const Env& env, uint32_t k) {
    Env out;
    for (const auto& [node, b] : env)
        out.emplace(node, Binding{b.delay > k ? b.delay - k : 0, b.value});
    return out;
}

struct Enumerator {
    const ResolvedUnit& unit;
    const MsgEnv& env;
    const Bounds& bounds;
    ValId next_id;
    ValId next_placeholder = -1;

    ValId fresh() { return next_id++; }
    ValId fresh_placeholder() { return next_placeholder--; }

    const MsgSem& msg_of(const ast::Term& t) const {
        auto it = unit.info.find(&t);
        if (it == unit.info.end()) throw std::logic_error("unresolved message reference");
        const MsgRef& m = it->second.msg;
        auto jt = env.map.find((uint64_t(m.endpoint) << 32) | m.msg);
        if (jt == env.map.end()) throw std::logic_error("message missing from environment");
        return jt->second;
    }

    using Sink = std::function<void(const Log&, ValId)>;

    void run(const ast::Term& t, const Env& e, const Sink& sink) {
        using ast::TermKind;
        switch (t.kind) {
            case TermKind::Literal:
            case TermKind::Unit:
            case TermKind::Ready: {
                ValId v = fresh();
                Log l = empties(1);
                insert_sorted(l.cycles[0], Action{Action::Kind::Create, v, {}, {}, 0, {}});
                sink(l, v);
                return;
            }
            case TermKind::Cycle: {
                ValId v = fresh();
                Log l = empties(t.cycles + 1);
                insert_sorted(l.cycles.back(), Action{Action::Kind::Create, v, {}, {}, 0, {}});
                sink(l, v);
                return;
            }
            case TermKind::Ident: {
                auto it = unit.info.find(&t);
                const Binding& b = e.at(it->second.binding);
                sink(empties(b.delay + 1), b.value);
                return;
            }
            case TermKind::RegRead: {
                auto it = unit.info.find(&t);
                RegKey r = env.reg_key(it->second.reg);
                ValId v = fresh();
                Log l = empties(1);
                insert_sorted(l.cycles[0], Action{Action::Kind::Create, v, {r}, {}, 0, {}});
                sink(l, v);
                return;
            }
            case TermKind::Wait: {
                run(*t.kids[0], e, [&](const Log& l1, ValId) {
                    Env e2 = shift_env(e, static_cast<uint32_t>(l1.cycles.size() - 1));
                    run(*t.kids[1], e2, [&](const Log& l2, ValId v2) {
                        sink(overlap_concat(l1, l2), v2);
                    });
                });
                return;
            }
            case TermKind::Join: {
                run(*t.kids[0], e, [&](const Log& l1, ValId) {
                    run(*t.kids[1], e, [&](const Log& l2, ValId v2) {
                        sink(merge(l1, l2), v2);
                    });
                });
                return;
            }
            case TermKind::Let: {
                run(*t.kids[0], e, [&](const Log& l1, ValId v1) {
                    if (t.seq) {
                        Env e2 = shift_env(e, static_cast<uint32_t>(l1.cycles.size() - 1));
                        e2[&t] = {0, v1};
                        run(*t.kids[1], e2, [&](const Log& l2, ValId v2) {
                            sink(overlap_concat(l1, l2), v2);
                        });
                    } else {
                        Env e2 = e;
                        e2[&t] = {static_cast<uint32_t>(l1.cycles.size() - 1), v1};
                        run(*t.kids[1], e2, [&](const Log& l2, ValId v2) {
                            sink(merge(l1, l2), v2);
                        });
                    }
                });
                return;
            }
            case TermKind::RegAssign: {
                auto it = unit.info.find(&t);
                RegKey r = env.reg_key(it->second.reg);
                run(*t.kids[0], e, [&](const Log& l, ValId v) {
                    ValId v2 = fresh();
                    Log tail = empties(2);
                    insert_sorted(tail.cycles[0], Action{Action::Kind::Use, v, {}, {}, 0, {}});
                    insert_sorted(tail.cycles[0], Action{Action::Kind::Mut, 0, {r}, {}, 0, {}});
                    insert_sorted(tail.cycles[1], Action{Action::Kind::Create, v2, {}, {}, 0, {}});
                    sink(merge(l, tail), v2);
                });
                return;
            }
            case TermKind::Send: {
                const MsgSem& ms = msg_of(t);
                run(*t.kids[0], e, [&](const Log& l, ValId v) {
                    for (uint32_t k = 0; k <= bounds.slack; ++k) {
                        ValId v2 = fresh();
                        Log tail = empties(k + 1);
                        insert_sorted(tail.cycles.back(),
                                      Action{Action::Kind::Send, v, {}, {}, ms.key, ms.dur});
                        insert_sorted(tail.cycles.back(),
                                      Action{Action::Kind::Create, v2, {}, {}, 0, {}});
                        sink(merge(l, tail), v2);
                    }
                });
                return;
            }
            case TermKind::Recv: {
                const MsgSem& ms = msg_of(t);
                for (uint32_t k = 0; k <= bounds.slack; ++k) {
                    ValId v = fresh_placeholder();
                    ValId u = fresh();
                    Log l = empties(k + 1);
                    insert_sorted(l.cycles.back(),
                                  Action{Action::Kind::Recv, v, {}, {}, ms.key, ms.dur});
                    insert_sorted(l.cycles.back(),
                                  Action{Action::Kind::Create, u, {}, {v}, 0, {}});
                    sink(l, u);
                }
                return;
            }
            case TermKind::If: {
                run(*t.kids[0], e, [&](const Log& l1, ValId v1) {
                    Log use = empties(1);
                    insert_sorted(use.cycles[0], Action{Action::Kind::Use, v1, {}, {}, 0, {}});
                    run(*t.kids[1], e, [&](const Log& l2, ValId v2) {
                        sink(merge(merge(l1, l2), use), v2);
                    });
                    if (t.kids.size() > 2) {
                        run(*t.kids[2], e, [&](const Log& l3, ValId v3) {
                            sink(merge(merge(l1, l3), use), v3);
                        });
                    } else {
                        ValId v3 = fresh();
                        Log l3 = empties(1);
                        insert_sorted(l3.cycles[0],
                                      Action{Action::Kind::Create, v3, {}, {}, 0, {}});
                        sink(merge(merge(l1, l3), use), v3);
                    }
                });
                return;
            }
            case TermKind::BinOp:
            case TermKind::UnOp: {
                run(*t.kids[0], e, [&](const Log& l1, ValId v1) {
                    auto finish = [&](const Log& l12, ValId a, ValId b, bool two) {
                        ValId v = fresh();
                        Log tail = empties(l12.cycles.empty() ? 1 : l12.cycles.size());
                        std::vector<ValId> deps = two ? std::vector<ValId>{a, b}
                                                      : std::vector<ValId>{a};
                        insert_sorted(tail.cycles.back(),
                                      Action{Action::Kind::Create, v, {}, deps, 0, {}});
                        sink(merge(l12, tail), v);
                    };
                    if (t.kind == ast::TermKind::UnOp) {
                        finish(l1, v1, 0, false);
                    } else {
                        run(*t.kids[1], e, [&](const Log& l2, ValId v2) {
                            finish(merge(l1, l2), v1, v2, true);
                        });
                    }
                });
                return;
            }
            case TermKind::DPrint: {
                // displaying a value reads it at the print cycle
                Log acc = empties(1);
                ValId v = fresh();
                insert_sorted(acc.cycles[0], Action{Action::Kind::Create, v, {}, {}, 0, {}});
                std::vector<const ast::Term*> args;
                for (const ast::TermPtr& k : t.kids) args.push_back(k.get());
                std::function<void(size_t, const Log&)> go = [&](size_t i, const Log& sofar) {
                    if (i == args.size()) {
                        sink(sofar, v);
                        return;
                    }
                    run(*args[i], e, [&](const Log& la, ValId va) {
                        Log use = empties(1);
                        insert_sorted(use.cycles[0],
                                      Action{Action::Kind::Use, va, {}, {}, 0, {}});
                        go(i + 1, merge(merge(sofar, la), use));
                    });
                };
                go(0, acc);
                return;
            }
            case TermKind::Recurse:
                throw std::runtime_error(
                    "the execution-log semantics does not cover recursive threads");
        }
    }
};

} // namespace

void enumerate_logs(const ResolvedUnit& unit, const ast::Term& term, const MsgEnv& env,
                    const Bounds& bounds, const std::function<void(const Log&)>& sink,
                    ValId id_base) {
    Enumerator en{unit, env, bounds, id_base + 1, -(id_base + 1)};
    std::set<Log> seen;
    en.run(term, {}, [&](const Log& l, ValId) {
        if (seen.insert(l).second) sink(l);
    });
}

// ---------------------------------------------------------------------------
// Composition

std::optional<Log> compose_logs(const Log& a, const Log& b,
                                const std::vector<MsgKey>& sigma) {
    size_t n = std::max(a.cycles.size(), b.cycles.size());
    std::set<MsgKey> sig(sigma.begin(), sigma.end());
    std::map<ValId, ValId> subst; // receiver placeholder -> sender id
    Log out;
    out.cycles.resize(n);

    auto rewrite = [&](Action x) {
        if (x.kind == Action::Kind::Recv || x.kind == Action::Kind::Send) {
            auto it = subst.find(x.v);
            if (it != subst.end()) x.v = it->second;
        }
        for (ValId& d : x.vals) {
            auto it = subst.find(d);
            if (it != subst.end()) d = it->second;
        }
        return x;
    };

    for (size_t i = 0; i < n; ++i) {
        CycleActions ca = i < a.cycles.size() ? a.cycles[i] : CycleActions{};
        CycleActions cb = i < b.cycles.size() ? b.cycles[i] : CycleActions{};

        // unify matched pairs in both directions
        for (int dir = 0; dir < 2; ++dir) {
            CycleActions& send_side = dir == 0 ? ca : cb;
            CycleActions& recv_side = dir == 0 ? cb : ca;
            for (Action& s : send_side) {
                if (s.kind != Action::Kind::Send || !sig.count(s.msg)) continue;
                bool found = false;
                for (Action& r : recv_side) {
                    if (r.kind != Action::Kind::Recv || r.msg != s.msg) continue;
                    if (r.dur != s.dur) continue;
                    if (r.v < 0 && !subst.count(r.v)) subst[r.v] = s.v;
                    if ((r.v < 0 ? subst[r.v] : r.v) != s.v) continue;
                    found = true;
                    break;
                }
                if (!found) return std::nullopt;
            }
        }
        // every sigma receive must have had a matching send in the same cycle
        for (int dir = 0; dir < 2; ++dir) {
            CycleActions& recv_side = dir == 0 ? ca : cb;
            CycleActions& send_side = dir == 0 ? cb : ca;
            for (const Action& r : recv_side) {
                if (r.kind != Action::Kind::Recv || !sig.count(r.msg)) continue;
                ValId rv = r.v < 0 && subst.count(r.v) ? subst.at(r.v) : r.v;
                bool found = false;
                for (const Action& s : send_side)
                    if (s.kind == Action::Kind::Send && s.msg == r.msg && s.dur == r.dur &&
                        s.v == rv)
                        found = true;
                if (!found) return std::nullopt;
            }
        }

        for (const Action& x : ca) {
            if (sig.count(x.msg) &&
                (x.kind == Action::Kind::Send || x.kind == Action::Kind::Recv))
                continue;
            insert_sorted(out.cycles[i], rewrite(x));
        }
        for (const Action& x : cb) {
            if (sig.count(x.msg) &&
                (x.kind == Action::Kind::Send || x.kind == Action::Kind::Recv))
                continue;
            insert_sorted(out.cycles[i], rewrite(x));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Safety of one log

std::map<ValId, std::vector<RegKey>> reg_dep(const Log& log) {
    std::map<ValId, std::vector<RegKey>> dep;
    for (const CycleActions& c : log.cycles) {
        for (const Action& a : c) {
            if (a.kind != Action::Kind::Create) continue;
            std::set<RegKey> d(a.regs.begin(), a.regs.end());
            bool defined = true;
            for (ValId u : a.vals) {
                auto it = dep.find(u);
                if (it == dep.end()) {
                    defined = false;
                    break;
                }
                d.insert(it->second.begin(), it->second.end());
            }
            if (defined) dep[a.v] = std::vector<RegKey>(d.begin(), d.end());
        }
    }
    return dep;
}

namespace {

constexpr uint64_t UNBOUNDED = ~0ull;

struct ValueFacts {
    std::vector<size_t> use_like;                      // UseSet
    std::vector<std::pair<size_t, Dur>> recvs;         // own receive sites
    std::vector<std::pair<size_t, Dur>> sends;         // own send sites
    std::vector<ValId> deps;                           // direct value deps
};

/// lt(L, i, p): the window promised / demanded starting at cycle i
std::pair<uint64_t, uint64_t> lt_window(const Log& log, size_t i, const Dur& d,
                                        bool truncate) {
    if (d.kind == Dur::Kind::Cycles) return {i, i + d.cycles};
    if (d.kind == Dur::Kind::Eternal) return {i, UNBOUNDED};
    for (size_t j = i; j < log.cycles.size(); ++j)
        for (const Action& a : log.cycles[j])
            if ((a.kind == Action::Kind::Send || a.kind == Action::Kind::Recv) &&
                a.msg == d.msg)
                return {i, j};
    return {i, truncate ? log.cycles.size() : UNBOUNDED};
}

} // namespace

SafetyVerdict check_log_safety(const Log& log) {
    std::map<ValId, ValueFacts> facts;
    for (size_t i = 0; i < log.cycles.size(); ++i) {
        for (const Action& a : log.cycles[i]) {
            switch (a.kind) {
                case Action::Kind::Create:
                    facts[a.v].use_like.push_back(i);
                    facts[a.v].deps = a.vals;
                    break;
                case Action::Kind::Use:
                    facts[a.v].use_like.push_back(i);
                    break;
                case Action::Kind::Send:
                    facts[a.v].use_like.push_back(i);
                    facts[a.v].sends.push_back({i, a.dur});
                    break;
                case Action::Kind::Recv:
                    facts[a.v].use_like.push_back(i);
                    facts[a.v].recvs.push_back({i, a.dur});
                    break;
                case Action::Kind::Mut:
                    break;
            }
        }
    }

    auto dep = reg_dep(log);

    // transitive closures over value dependencies
    std::map<ValId, std::set<ValId>> closure; // v -> values v depends on (incl. v)
    for (auto& [v, f] : facts) {
        std::set<ValId>& c = closure[v];
        std::vector<ValId> stack{v};
        while (!stack.empty()) {
            ValId x = stack.back();
            stack.pop_back();
            if (!c.insert(x).second) continue;
            auto it = facts.find(x);
            if (it != facts.end())
                for (ValId d : it->second.deps) stack.push_back(d);
        }
    }

    for (auto& [v, f] : facts) {
        // UseSet u LT_send
        std::set<size_t> points(f.use_like.begin(), f.use_like.end());
        uint64_t send_hi = 0;
        bool have_send = false;
        for (auto& [u, uc] : closure) {
            if (!uc.count(v)) continue; // u derives from v
            for (auto& [i, d] : facts[u].sends) {
                auto [lo, hi] = lt_window(log, i, d, /*truncate=*/true);
                for (uint64_t x = lo; x < hi; ++x) points.insert(static_cast<size_t>(x));
                if (hi > lo) {
                    send_hi = std::max(send_hi, hi - 1);
                    have_send = true;
                }
            }
        }
        (void)have_send;
        (void)send_hi;
        if (points.empty()) continue;
        uint64_t a = *points.begin();
        uint64_t b = *points.rbegin();

        // LT_recv: intersection over received dependencies
        uint64_t lo = 0, hi = UNBOUNDED;
        for (ValId u : closure[v]) {
            auto it = facts.find(u);
            if (it == facts.end()) continue;
            for (auto& [i, d] : it->second.recvs) {
                auto [wlo, whi] = lt_window(log, i, d, /*truncate=*/false);
                lo = std::max(lo, wlo);
                hi = std::min(hi, whi);
            }
        }
        if (!(lo <= a && (hi == UNBOUNDED || b < hi))) {
            SafetyVerdict out;
            out.safe = false;
            out.witness = v;
            out.reason = SafetyVerdict::Reason::UseOutsideRecvWindow;
            return out;
        }

        // MutSet of the register dependency set within [a, b)
        auto dit = dep.find(v);
        if (dit != dep.end() && !dit->second.empty()) {
            std::set<RegKey> regs(dit->second.begin(), dit->second.end());
            for (uint64_t i = a; i < b && i < log.cycles.size(); ++i) {
                for (const Action& act : log.cycles[static_cast<size_t>(i)]) {
                    if (act.kind == Action::Kind::Mut && !act.regs.empty() &&
                        regs.count(act.regs[0])) {
                        SafetyVerdict out;
                        out.safe = false;
                        out.witness = v;
                        out.reason = SafetyVerdict::Reason::MutationInWindow;
                        return out;
                    }
                }
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Program assembly and verification

namespace {

struct Assembler {
    const ResolvedUnit& unit;
    ProgramThreads out;
    uint64_t next_chan = 0;
    uint64_t next_inst = 0;
    std::string error;
    bool failed = false;

    // endpoint binding of one process instance: endpoint id -> (global chan, side)
    struct Inst {
        const ResolvedProc* proc;
        std::vector<std::pair<uint64_t, ast::Side>> eps;
        uint64_t id;
    };

    MsgKey key_of(uint64_t chan, MsgId m) const { return (chan << 16) | m; }

    void walk(const ResolvedProc& p, std::vector<std::pair<uint64_t, ast::Side>> param_binding) {
        Inst inst{&p, std::move(param_binding), next_inst++};
        // internal channels
        for (EndpointId ep = p.param_count; ep < p.endpoints.size(); ep += 2) {
            uint64_t chan = next_chan++;
            inst.eps.push_back({chan, ast::Side::Left});
            inst.eps.push_back({chan, ast::Side::Right});
            const ResolvedChanType& ct = unit.chan_types[p.endpoints[ep].chan_type];
            for (MsgId m = 0; m < ct.messages.size(); ++m) {
                out.internal.push_back(key_of(chan, m));
                out.msg_names[key_of(chan, m)] =
                    fmt::format("{}--{}.{}", p.endpoints[ep].name, p.endpoints[ep + 1].name,
                                ct.messages[m].name);
            }
        }
        for (const auto& th : p.threads) {
            if (th.recursive) {
                failed = true;
                error = fmt::format("process '{}' has a recursive thread; the bounded "
                                    "oracle covers loop threads only",
                                    p.name);
                return;
            }
            ProgramThreads::Thread t;
            t.body = th.body;
            t.proc = &p;
            t.name = fmt::format("{}#{}", p.name, out.threads.size());
            uint64_t iid = inst.id;
            t.env.reg_key = [iid](RegId r) { return (iid << 16) | r; };
            for (RegId r = 0; r < p.reg_names.size(); ++r)
                out.reg_names[(iid << 16) | r] = fmt::format("{}.{}", p.name, p.reg_names[r]);
            for (EndpointId ep = 0; ep < p.endpoints.size(); ++ep) {
                const ResolvedChanType& ct = unit.chan_types[p.endpoints[ep].chan_type];
                uint64_t chan = inst.eps[ep].first;
                for (MsgId m = 0; m < ct.messages.size(); ++m) {
                    MsgSem ms;
                    ms.key = key_of(chan, m);
                    ms.dur = dur_of(ct, m, chan);
                    const ResolvedMessage& rm = ct.messages[m];
                    int side = p.endpoints[ep].side == ast::Side::Left ? 0 : 1;
                    if (rm.sync[side].kind == ast::SyncMode::Kind::Dependent &&
                        rm.sync_msg[side]) {
                        ms.pinned = true;
                        ms.anchor = key_of(chan, *rm.sync_msg[side]);
                        ms.offset = rm.sync[side].cycles;
                    }
                    t.env.map[(uint64_t(ep) << 32) | m] = ms;
                    if (!out.msg_names.count(key_of(chan, m)))
                        out.msg_names[key_of(chan, m)] =
                            fmt::format("{}.{}", p.endpoints[ep].name, ct.messages[m].name);
                }
            }
            out.threads.push_back(std::move(t));
        }
        for (const auto& sp : p.spawns) {
            std::vector<std::pair<uint64_t, ast::Side>> binding;
            for (EndpointId arg : sp.args) binding.push_back(inst.eps[arg]);
            walk(unit.procs[sp.proc], std::move(binding));
            if (failed) return;
        }
    }

    Dur dur_of(const ResolvedChanType& ct, MsgId m, uint64_t chan) const {
        const ResolvedMessage& rm = ct.messages[m];
        Dur d;
        switch (rm.duration.kind) {
            case ast::Duration::Kind::Eternal: d.kind = Dur::Kind::Eternal; break;
            case ast::Duration::Kind::Cycles:
                d.kind = Dur::Kind::Cycles;
                d.cycles = rm.duration.cycles;
                break;
            case ast::Duration::Kind::Message:
                d.kind = Dur::Kind::Msg;
                d.msg = key_of(chan, *rm.duration_msg);
                break;
        }
        return d;
    }
};

} // namespace

std::optional<ProgramThreads> assemble_program(const ResolvedUnit& unit, ProcId top,
                                               std::string& error) {
    Assembler a{unit, {}, 1000, 0, {}, false};
    const ResolvedProc& p = unit.procs[top];
    std::vector<std::pair<uint64_t, ast::Side>> binding;
    for (EndpointId ep = 0; ep < p.param_count; ++ep) {
        uint64_t chan = a.next_chan++; // environment channel
        binding.push_back({chan, p.endpoints[ep].side});
        const ResolvedChanType& ct = unit.chan_types[p.endpoints[ep].chan_type];
        for (MsgId m = 0; m < ct.messages.size(); ++m)
            a.out.msg_names[a.key_of(chan, m)] =
                fmt::format("{}.{}", p.endpoints[ep].name, ct.messages[m].name);
    }
    a.walk(p, std::move(binding));
    if (a.failed) {
        error = a.error;
        return std::nullopt;
    }
    a.out.unit = &unit;
    std::sort(a.out.internal.begin(), a.out.internal.end());
    return std::move(a.out);
}

std::vector<std::vector<int>> concretizations(const ProgramThreads& prog, int iterations) {
    std::vector<std::vector<int>> out{{}};
    for (size_t t = 0; t < prog.threads.size(); ++t) {
        std::vector<std::vector<int>> next;
        for (const auto& v : out) {
            for (int k = 1; k <= iterations; ++k) {
                auto w = v;
                w.push_back(k);
                next.push_back(std::move(w));
            }
        }
        out = std::move(next);
    }
    return out;
}

bool satisfies_sync_modes(const Log& log, const MsgEnv& env) {
    std::map<MsgKey, std::pair<bool, uint32_t>> pinned; // key -> (anchor seen?, offset)
    std::map<MsgKey, MsgKey> anchor_of;
    for (const auto& [k, ms] : env.map) {
        (void)k;
        if (ms.pinned) anchor_of[ms.key] = ms.anchor, pinned[ms.key] = {false, ms.offset};
    }
    if (anchor_of.empty()) return true;
    std::map<MsgKey, size_t> last;
    for (size_t i = 0; i < log.cycles.size(); ++i) {
        for (const Action& a : log.cycles[i]) {
            if (a.kind != Action::Kind::Send && a.kind != Action::Kind::Recv) continue;
            auto it = anchor_of.find(a.msg);
            if (it != anchor_of.end()) {
                auto jt = last.find(it->second);
                if (jt == last.end()) return false;
                if (i != jt->second + pinned[a.msg].second) return false;
            }
        }
        for (const Action& a : log.cycles[i])
            if (a.kind == Action::Kind::Send || a.kind == Action::Kind::Recv)
                last[a.msg] = i;
    }
    return true;
}

namespace {

/// t >> t >> ... : composes k copies of the body's logs.
void unrolled_logs(const ResolvedUnit& unit, const ProgramThreads::Thread& th, int unroll,
                   const Bounds& bounds, ValId base, std::vector<Log>& out) {
    std::vector<Log> acc{Log{}};
    for (int i = 0; i < unroll; ++i) {
        std::vector<Log> next;
        enumerate_logs(unit, *th.body, th.env, bounds,
                       [&](const Log& l) {
                           for (const Log& pre : acc) next.push_back(overlap_concat(pre, l));
                       },
                       base + i * 100000);
        acc = std::move(next);
        if (acc.size() > bounds.budget) acc.resize(bounds.budget);
    }
    std::set<Log> dedup;
    for (Log& l : acc)
        if (satisfies_sync_modes(l, th.env)) dedup.insert(std::move(l));
    out.assign(dedup.begin(), dedup.end());
}

} // namespace

VerifyReport verify_program(const ProgramThreads& prog, const Bounds& bounds) {
    VerifyReport rep;
    if (prog.threads.empty() || !prog.unit) return rep;
    const ResolvedUnit& unit = *prog.unit;

    auto thread_msgs = [&](size_t t) {
        std::set<MsgKey> keys;
        for (const auto& [k, v] : prog.threads[t].env.map) {
            (void)k;
            keys.insert(v.key);
        }
        return keys;
    };
    std::set<MsgKey> internal(prog.internal.begin(), prog.internal.end());

    // per-(thread, unroll) log families
    std::vector<std::vector<std::vector<Log>>> logs(prog.threads.size());
    for (size_t t = 0; t < prog.threads.size(); ++t) {
        logs[t].resize(static_cast<size_t>(bounds.iterations) + 1);
        for (int k = 1; k <= bounds.iterations; ++k) {
            unrolled_logs(unit, prog.threads[t], k, bounds,
                          static_cast<ValId>((t + 1) * 10000000), logs[t][k]);
            rep.thread_logs += logs[t][k].size();
        }
    }

    // Every node of the composition tree has its own execution logs; the
    // single-thread leaves are where local contract violations (a value dying
    // before a send it feeds) surface, so check those first.
    for (size_t t = 0; t < prog.threads.size(); ++t) {
        for (int k = 1; k <= bounds.iterations; ++k) {
            for (const Log& log : logs[t][k]) {
                ++rep.logs_checked;
                SafetyVerdict v = check_log_safety(log);
                if (!v.safe) {
                    rep.safe = false;
                    rep.witness = log;
                    rep.witness_value = v.witness;
                    rep.reason = v.reason;
                    return rep;
                }
            }
        }
    }

    // fold threads together, preferring partners that share channels so the
    // matching constraint prunes early
    uint64_t budget = bounds.budget;
    for (const std::vector<int>& unrolls : concretizations(prog, bounds.iterations)) {
        std::vector<size_t> remaining;
        for (size_t t = 1; t < prog.threads.size(); ++t) remaining.push_back(t);
        std::vector<Log> acc = logs[0][unrolls[0]];
        std::set<MsgKey> acc_msgs = thread_msgs(0);
        bool truncated = false;
        while (!remaining.empty() && !acc.empty() && !truncated) {
            size_t best_i = 0;
            size_t best_shared = 0;
            for (size_t i = 0; i < remaining.size(); ++i) {
                std::set<MsgKey> mine = thread_msgs(remaining[i]);
                size_t shared = 0;
                for (MsgKey m : mine)
                    if (internal.count(m) && acc_msgs.count(m)) ++shared;
                if (shared > best_shared) {
                    best_shared = shared;
                    best_i = i;
                }
            }
            size_t t = remaining[best_i];
            remaining.erase(remaining.begin() + best_i);
            std::set<MsgKey> mine = thread_msgs(t);
            std::vector<MsgKey> sigma;
            for (MsgKey m : mine)
                if (internal.count(m) && acc_msgs.count(m)) sigma.push_back(m);
            std::set<Log> next;
            for (const Log& a : acc) {
                for (const Log& b : logs[t][unrolls[t]]) {
                    if (budget == 0) {
                        rep.complete = false;
                        truncated = true;
                        break;
                    }
                    --budget;
                    ++rep.compositions;
                    if (auto c = compose_logs(a, b, sigma)) next.insert(std::move(*c));
                }
                if (truncated) break;
            }
            acc.assign(next.begin(), next.end());
            acc_msgs.insert(mine.begin(), mine.end());
        }
        if (truncated) break; // partial folds are not program logs
        for (const Log& log : acc) {
            ++rep.logs_checked;
            SafetyVerdict v = check_log_safety(log);
            if (!v.safe) {
                rep.safe = false;
                rep.witness = log;
                rep.witness_value = v.witness;
                rep.reason = v.reason;
                return rep;
            }
        }
    }
    return rep;
}

std::string render_log(const Log& log, const ProgramThreads& prog) {
    std::string out;
    for (size_t i = 0; i < log.cycles.size(); ++i) {
        out += fmt::format("cycle {}:", i);
        if (log.cycles[i].empty()) out += " (idle)";
        for (const Action& a : log.cycles[i]) {
            auto vname = [&](ValId v) {
                return v < 0 ? fmt::format("env{}", -v) : fmt::format("v{}", v);
            };
            auto mname = [&](MsgKey m) {
                auto it = prog.msg_names.find(m);
                return it != prog.msg_names.end() ? it->second : fmt::format("m{}", m);
            };
            switch (a.kind) {
                case Action::Kind::Create: {
                    std::string deps;
                    for (RegKey r : a.regs) {
                        auto it = prog.reg_names.find(r);
                        deps += fmt::format(" {}", it != prog.reg_names.end()
                                                       ? it->second
                                                       : fmt::format("r{}", r));
                    }
                    for (ValId v : a.vals) deps += " " + vname(v);
                    out += fmt::format(" create {}{}{}", vname(a.v),
                                       deps.empty() ? "" : " <-", deps);
                    break;
                }
                case Action::Kind::Use: out += fmt::format(" use {}", vname(a.v)); break;
                case Action::Kind::Mut: {
                    auto it = prog.reg_names.find(a.regs[0]);
                    out += fmt::format(" mutate {}", it != prog.reg_names.end()
                                                         ? it->second
                                                         : fmt::format("r{}", a.regs[0]));
                    break;
                }
                case Action::Kind::Send:
                    out += fmt::format(" send {} {}", mname(a.msg), vname(a.v));
                    break;
                case Action::Kind::Recv:
                    out += fmt::format(" recv {} {}", mname(a.msg), vname(a.v));
                    break;
            }
        }
        out += "\n";
    }
    return out;
}

} // namespace anvil::sem
