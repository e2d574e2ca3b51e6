#pragma once

#include "anvil/driver.hpp"
#include "anvil/graph.hpp"
#include "anvil/infer.hpp"
#include "anvil/timing.hpp"
#include "anvil/typecheck.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace th {

using namespace anvil;

inline std::string demo_path(const std::string& name) {
    return std::string(ANVIL_DEMO_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline Compilation compile_source(const std::string& text, const std::string& name = "t.anvil") {
    Compilation c;
    frontend_from_sources({{name, text}}, c);
    return c;
}

inline Compilation compile_demo(const std::string& name) {
    Compilation c;
    frontend_from_sources({{name, read_file(demo_path(name))}}, c);
    return c;
}

inline const ResolvedProc& proc_of(const Compilation& c, const std::string& name) {
    auto id = c.unit->find_proc(name);
    if (!id) throw std::runtime_error("no proc " + name);
    return c.unit->procs[*id];
}

/// Events occur at the same time under every timestamp function.
inline bool tau_eq(TimingProver& p, EventId a, EventId b) {
    return p.le(a, b) == Verdict::Proved && p.le(b, a) == Verdict::Proved;
}

/// n-th alive sync event of the named message, in id order.
inline EventId nth_sync(const EventGraph& g, const std::string& label, size_t n) {
    size_t seen = 0;
    for (EventId e = 0; e < g.events.size(); ++e) {
        if (!g.events[e].alive) continue;
        const EventLabel& l = g.label(e);
        if (l.kind != EventLabel::Kind::MsgSync) continue;
        if (g.msg_label(l.msg) != label) continue;
        if (seen++ == n) return e;
    }
    throw std::runtime_error("sync not found: " + label);
}

inline MsgRef msg_ref_of(const Compilation& c, const ResolvedProc& p,
                         const std::string& endpoint, const std::string& msg) {
    auto ep = p.find_endpoint(endpoint);
    auto m = c.unit->chan_of(p, *ep).find(msg);
    return MsgRef{*ep, *m};
}

// ---------------------------------------------------------------------------
// Random event graphs (valid by construction) for soundness testing.

struct RandomGraphCfg {
    size_t max_events = 12;
    int max_delay = 3;
    int messages = 2;
    bool with_actions = false;
};

inline EventGraph random_graph(std::mt19937& rng, const RandomGraphCfg& cfg = {}) {
    EventGraph g;
    g.add_root();
    uint32_t cond = 0;
    uint32_t action_id = 0;
    auto pick = [&](uint32_t n) { return std::uniform_int_distribution<uint32_t>(0, n - 1)(rng); };
    while (g.events.size() < cfg.max_events) {
        uint32_t n = static_cast<uint32_t>(g.events.size());
        switch (pick(5)) {
            case 0:
            case 1: { // delay
                std::vector<EventId> preds{pick(n)};
                if (pick(3) == 0) preds.push_back(pick(n));
                g.add_delay(pick(static_cast<uint32_t>(cfg.max_delay) + 1), preds);
                break;
            }
            case 2: { // message sync
                MsgRef m{0, static_cast<MsgId>(pick(static_cast<uint32_t>(cfg.messages)))};
                EventId pred = pick(n);
                uint32_t style = pick(4);
                if (style == 3) {
                    // pin to an earlier sync of the other message when one exists
                    std::vector<EventId> cands;
                    for (EventId e = 0; e < n; ++e)
                        if (g.label(e).kind == EventLabel::Kind::MsgSync) cands.push_back(e);
                    if (!cands.empty()) {
                        EventId ref = cands[pick(static_cast<uint32_t>(cands.size()))];
                        g.add_msg_sync(m, pick(2) == 0, pred, SyncTiming::Pinned, ref, pick(3));
                        break;
                    }
                }
                g.add_msg_sync(m, pick(2) == 0, pred,
                               style == 2 ? SyncTiming::Immediate : SyncTiming::Dynamic);
                break;
            }
            case 3: { // branch pair
                if (g.events.size() + 2 > cfg.max_events) continue;
                EventId pred = pick(n);
                g.add_branch(cond, true, pred);
                g.add_branch(cond, false, pred);
                ++cond;
                break;
            }
            case 4: { // min-join
                EventId a = pick(n), b = pick(n);
                if (a == b) continue;
                g.add_join({a, b});
                break;
            }
        }
    }
    if (cfg.with_actions) {
        for (EventId e = 0; e < g.events.size(); ++e) {
            if (pick(2) == 0) {
                GraphAction a;
                a.kind = GraphAction::Kind::RegWrite;
                a.id = action_id++;
                a.reg = 0;
                g.events[e].actions.push_back(a);
            }
        }
    }
    return g;
}

inline Pat random_pat(std::mt19937& rng, const EventGraph& g, int messages = 2) {
    auto pick = [&](uint32_t n) { return std::uniform_int_distribution<uint32_t>(0, n - 1)(rng); };
    Pat p;
    p.base = pick(static_cast<uint32_t>(g.events.size()));
    if (pick(2) == 0) {
        p.dur = Pat::Dur::Cycles;
        p.cycles = pick(4);
    } else {
        p.dur = Pat::Dur::Msg;
        p.msg = MsgRef{0, static_cast<MsgId>(pick(static_cast<uint32_t>(messages)))};
    }
    return p;
}

inline PatSet random_patset(std::mt19937& rng, const EventGraph& g) {
    auto pick = [&](uint32_t n) { return std::uniform_int_distribution<uint32_t>(0, n - 1)(rng); };
    PatSet s;
    uint32_t n = pick(3); // 0..2 members; empty = eternal
    for (uint32_t i = 0; i < n; ++i) s.pats.push_back(random_pat(rng, g));
    return s;
}

// ---------------------------------------------------------------------------
// Random well-formed programs for the oracle-agreement and two-iteration
// properties. All sync modes dynamic; registers are never shared between
// threads; every send/recv is well-polarized by construction.

class ProgramGen {
  public:
    explicit ProgramGen(uint64_t seed) : rng_(seed) {}

    std::string generate() {
        src_.clear();
        src_ += "chan c0 {\n";
        int msgs = 1 + int(pick(2));
        for (int m = 0; m < msgs; ++m) {
            // direction right: the left endpoint (environment) sends, the
            // process receives; direction left: the process sends
            bool to_proc = m == 0 ? true : pick(2) == 0;
            std::string dur = pick(2) == 0 ? "@#" + std::to_string(1 + pick(2))
                              : msgs > 1 ? "@m" + std::to_string((m + 1) % msgs)
                                         : "@#1";
            src_ += "   " + std::string(to_proc ? "right" : "left") + " m" +
                    std::to_string(m) + " : (logic[4]" + dur + ")";
            src_ += m + 1 < msgs ? ",\n" : "\n";
            recv_ok_.push_back(to_proc);
        }
        src_ += "}\n\n";
        src_ += "proc Top(e0 : right c0) {\n";
        int regs = int(pick(3));
        for (int r = 0; r < regs; ++r)
            src_ += "   reg r" + std::to_string(r) + " : logic[4];\n";
        src_ += "   loop {\n      ";
        regs_ = regs;
        vars_ = 0;
        syncs_ = 0;
        src_ += gen_term(2 + int(pick(3)), {});
        src_ += "\n   }\n}\n";
        return src_;
    }

  private:
    std::mt19937 rng_;
    std::string src_;
    std::vector<bool> recv_ok_; // message m receivable by the process?
    int regs_ = 0;
    int vars_ = 0;
    int syncs_ = 0;

    uint32_t pick(uint32_t n) {
        return std::uniform_int_distribution<uint32_t>(0, n - 1)(rng_);
    }

    std::string expr(const std::vector<std::string>& scope) {
        std::vector<std::string> atoms;
        atoms.push_back(std::to_string(pick(16)));
        for (int r = 0; r < regs_; ++r) atoms.push_back("*r" + std::to_string(r));
        for (const std::string& v : scope) atoms.push_back(v);
        std::string a = atoms[pick(static_cast<uint32_t>(atoms.size()))];
        if (pick(3) == 0) {
            std::string b = atoms[pick(static_cast<uint32_t>(atoms.size()))];
            const char* ops[] = {"+", "^", "&"};
            return a + " " + ops[pick(3)] + " " + b;
        }
        return a;
    }

    std::string stmt(int depth, std::vector<std::string>& scope) {
        switch (pick(6)) {
            case 0:
                return "cycle " + std::to_string(1 + pick(2));
            case 1:
                if (regs_ > 0)
                    return "set r" + std::to_string(pick(static_cast<uint32_t>(regs_))) +
                           " := " + expr(scope);
                return "cycle 1";
            case 2: {
                if (syncs_ < 3) {
                    for (size_t m = 0; m < recv_ok_.size(); ++m) {
                        if (!recv_ok_[m]) {
                            ++syncs_;
                            return "send e0.m" + std::to_string(m) + "(" + expr(scope) + ")";
                        }
                    }
                }
                return "cycle 1";
            }
            case 3: {
                if (syncs_ < 3) {
                    for (size_t m = 0; m < recv_ok_.size(); ++m) {
                        if (recv_ok_[m]) {
                            ++syncs_;
                            std::string v = "x" + std::to_string(vars_++);
                            scope.push_back(v);
                            return "let " + v + " = recv e0.m" + std::to_string(m);
                        }
                    }
                }
                return "cycle 1";
            }
            case 4:
                if (depth > 0)
                    return "if " + expr(scope) + " { " + gen_term(depth - 1, scope) +
                           " } else { " + gen_term(depth - 1, scope) + " }";
                return std::to_string(pick(16));
            default:
                return std::to_string(pick(16));
        }
    }

    std::string gen_term(int depth, std::vector<std::string> scope) {
        std::string out = stmt(depth, scope);
        int steps = 1 + int(pick(2));
        for (int i = 0; i < steps; ++i) {
            bool wait = pick(3) != 0;
            std::string s = stmt(depth > 0 ? depth - 1 : 0, scope);
            // a let must be followed by '>>' or ';' plus a continuation
            out += wait ? " >>\n      " : ";\n      ";
            out += s;
        }
        // close any trailing let with a final unit-ish step
        out += " >>\n      cycle 1";
        return out;
    }
};

} // namespace th
