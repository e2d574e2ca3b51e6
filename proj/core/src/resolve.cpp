#include "anvil/resolve.hpp"

#include <fmt/format.h>

#include <unordered_set>

namespace anvil {

using namespace ast;

std::optional<MsgId> ResolvedChanType::find(const std::string& n) const {
    for (size_t i = 0; i < messages.size(); ++i)
        if (messages[i].name == n) return static_cast<MsgId>(i);
    return std::nullopt;
}

std::optional<EndpointId> ResolvedProc::find_endpoint(const std::string& n) const {
    for (size_t i = 0; i < endpoints.size(); ++i)
        if (endpoints[i].name == n) return static_cast<EndpointId>(i);
    return std::nullopt;
}

std::optional<RegId> ResolvedProc::find_reg(const std::string& n) const {
    for (size_t i = 0; i < reg_names.size(); ++i)
        if (reg_names[i] == n) return static_cast<RegId>(i);
    return std::nullopt;
}

std::optional<ProcId> ResolvedUnit::find_proc(const std::string& n) const {
    for (size_t i = 0; i < procs.size(); ++i)
        if (procs[i].name == n) return static_cast<ProcId>(i);
    return std::nullopt;
}

namespace {

class Resolver {
  public:
    Resolver(const Program& prog, DiagnosticEngine& diags) : prog_(prog), diags_(diags) {}

    std::optional<ResolvedUnit> run() {
        resolve_types();
        resolve_channels();
        declare_procs();
        for (size_t i = 0; i < prog_.procs.size(); ++i) resolve_proc(prog_.procs[i], unit_.procs[i]);
        if (failed_) return std::nullopt;
        return std::move(unit_);
    }

  private:
    const Program& prog_;
    DiagnosticEngine& diags_;
    ResolvedUnit unit_;
    bool failed_ = false;
    std::unordered_map<std::string, uint32_t> type_widths_;

    void error(const SourceSpan& span, std::string msg) {
        failed_ = true;
        diags_.report({Severity::Error, DiagClass::Resolve, std::move(msg), span, {}});
    }

    uint32_t width_of(const DataType& dt) {
        if (dt.kind == DataType::Kind::Logic) return dt.width;
        auto it = type_widths_.find(dt.name);
        if (it == type_widths_.end()) {
            error(dt.span, fmt::format("Unknown data type '{}'", dt.name));
            return 1;
        }
        return it->second;
    }

    void resolve_types() {
        for (const TypeDef& td : prog_.types) {
            uint32_t w = 0;
            for (const DataType& f : td.fields) {
                if (f.kind == DataType::Kind::Named) {
                    auto it = type_widths_.find(f.name);
                    if (it == type_widths_.end()) {
                        error(f.span, fmt::format("Unknown data type '{}'", f.name));
                        continue;
                    }
                    w += it->second;
                } else {
                    w += f.width;
                }
            }
            if (!type_widths_.emplace(td.name, w).second)
                error(td.span, fmt::format("Duplicate type definition '{}'", td.name));
        }
    }

    void resolve_channels() {
        std::unordered_set<std::string> names;
        for (const ChannelTypeDef& ch : prog_.channels) {
            if (!names.insert(ch.name).second)
                error(ch.span, fmt::format("Duplicate channel type '{}'", ch.name));
            ResolvedChanType rc;
            rc.name = ch.name;
            std::unordered_set<std::string> msg_names;
            for (const MessageDef& m : ch.messages) {
                if (!msg_names.insert(m.ident).second)
                    error(m.span, fmt::format("Duplicate message '{}' in channel '{}'",
                                              m.ident, ch.name));
                ResolvedMessage rm;
                rm.name = m.ident;
                rm.direction = m.direction;
                rm.width = width_of(m.data_type);
                rm.duration = m.duration;
                rm.sync[0] = m.sync_left;
                rm.sync[1] = m.sync_right;
                rm.span = m.span;
                rc.messages.push_back(std::move(rm));
            }
            // second pass: message-relative durations and dependent syncs
            for (size_t i = 0; i < ch.messages.size(); ++i) {
                ResolvedMessage& rm = rc.messages[i];
                auto find_msg = [&](const std::string& n,
                                    const SourceSpan& sp) -> std::optional<MsgId> {
                    for (size_t j = 0; j < rc.messages.size(); ++j)
                        if (rc.messages[j].name == n) return static_cast<MsgId>(j);
                    error(sp, fmt::format("Unknown message '{}' referenced in channel '{}'",
                                          n, ch.name));
                    return std::nullopt;
                };
                if (rm.duration.kind == Duration::Kind::Message)
                    rm.duration_msg = find_msg(rm.duration.message, rm.duration.span);
                for (int s = 0; s < 2; ++s)
                    if (rm.sync[s].kind == SyncMode::Kind::Dependent)
                        rm.sync_msg[s] = find_msg(rm.sync[s].message, rm.sync[s].span);
                bool dep_l = rm.sync[0].kind == SyncMode::Kind::Dependent;
                bool dep_r = rm.sync[1].kind == SyncMode::Kind::Dependent;
                if (dep_l != dep_r)
                    error(rm.span, fmt::format("Message '{}': a dependent sync mode must be "
                                               "declared on both endpoints",
                                               rm.name));
                int sender_side = rm.direction == MsgDir::Right ? 0 : 1;
                if (rm.sync[sender_side].kind == SyncMode::Kind::Static)
                    error(rm.sync[sender_side].span,
                          fmt::format("Message '{}': a static sync mode on the sending "
                                      "endpoint is not supported",
                                      rm.name));
            }
            unit_.chan_types.push_back(std::move(rc));
        }
    }

    std::optional<ChanTypeId> find_chan_type(const std::string& n, const SourceSpan& sp) {
        for (size_t i = 0; i < unit_.chan_types.size(); ++i)
            if (unit_.chan_types[i].name == n) return static_cast<ChanTypeId>(i);
        error(sp, fmt::format("Unknown channel type '{}'", n));
        return std::nullopt;
    }

    void declare_procs() {
        std::unordered_set<std::string> names;
        for (const ProcDef& p : prog_.procs) {
            if (!names.insert(p.name).second)
                error(p.span, fmt::format("Duplicate process '{}'", p.name));
            ResolvedProc rp;
            rp.name = p.name;
            rp.id = static_cast<ProcId>(unit_.procs.size());
            rp.src = &p;
            unit_.procs.push_back(std::move(rp));
        }
    }

    void resolve_proc(const ProcDef& p, ResolvedProc& rp) {
        std::unordered_set<std::string> ep_names;
        for (const Param& pa : p.params) {
            if (!ep_names.insert(pa.name).second)
                error(pa.span, fmt::format("Duplicate endpoint name '{}'", pa.name));
            Endpoint ep;
            ep.name = pa.name;
            ep.side = pa.side;
            ep.is_param = true;
            ep.span = pa.span;
            if (auto ct = find_chan_type(pa.chan_type, pa.span)) ep.chan_type = *ct;
            rp.endpoints.push_back(std::move(ep));
        }
        rp.param_count = static_cast<uint32_t>(rp.endpoints.size());
        for (size_t ci = 0; ci < p.chans.size(); ++ci) {
            const ChanInst& c = p.chans[ci];
            auto ct = find_chan_type(c.chan_type, c.span);
            for (int side = 0; side < 2; ++side) {
                const std::string& n = side == 0 ? c.left : c.right;
                if (!ep_names.insert(n).second)
                    error(c.span, fmt::format("Duplicate endpoint name '{}'", n));
                Endpoint ep;
                ep.name = n;
                ep.side = side == 0 ? Side::Left : Side::Right;
                ep.is_param = false;
                ep.chan_inst = static_cast<uint32_t>(ci);
                ep.span = c.span;
                if (ct) ep.chan_type = *ct;
                rp.endpoints.push_back(std::move(ep));
            }
        }

        std::unordered_set<std::string> reg_names;
        for (const RegDecl& r : p.regs) {
            if (!reg_names.insert(r.name).second)
                error(r.span, fmt::format("Duplicate register '{}'", r.name));
            rp.reg_names.push_back(r.name);
            rp.reg_widths.push_back(width_of(r.type));
            rp.reg_spans.push_back(r.span);
        }

        // Ownership: every endpoint has at most one owner (a spawn argument
        // or this process's threads).
        std::vector<int> owner(rp.endpoints.size(), 0); // 0 none, 1 spawn, 2 threads
        for (const Spawn& s : p.spawns) {
            ResolvedProc::SpawnR sr;
            sr.span = s.span;
            auto pid = unit_.find_proc(s.proc);
            if (!pid) {
                error(s.span, fmt::format("Unknown process '{}'", s.proc));
                continue;
            }
            sr.proc = *pid;
            const ProcDef& callee = *unit_.procs[*pid].src;
            if (callee.params.size() != s.args.size())
                error(s.span, fmt::format("Process '{}' takes {} endpoint(s), {} given",
                                          s.proc, callee.params.size(), s.args.size()));
            for (size_t ai = 0; ai < s.args.size(); ++ai) {
                auto ep = rp.find_endpoint(s.args[ai]);
                if (!ep) {
                    error(s.arg_spans[ai],
                          fmt::format("Unknown endpoint '{}'", s.args[ai]));
                    continue;
                }
                if (owner[*ep] != 0)
                    error(s.arg_spans[ai],
                          fmt::format("Endpoint '{}' already has an owner", s.args[ai]));
                owner[*ep] = 1;
                sr.args.push_back(*ep);
                if (ai < callee.params.size()) {
                    const Param& want = callee.params[ai];
                    const Endpoint& got = rp.endpoints[*ep];
                    auto want_ct = find_chan_type(want.chan_type, s.arg_spans[ai]);
                    if (want_ct && *want_ct != got.chan_type)
                        error(s.arg_spans[ai],
                              fmt::format("Endpoint '{}' has channel type '{}', process "
                                          "'{}' expects '{}'",
                                          s.args[ai], unit_.chan_types[got.chan_type].name,
                                          s.proc, want.chan_type));
                    else if (want.side != got.side)
                        error(s.arg_spans[ai],
                              fmt::format("Endpoint '{}' is the {} endpoint, process '{}' "
                                          "expects the {} endpoint",
                                          s.args[ai],
                                          got.side == Side::Left ? "left" : "right", s.proc,
                                          want.side == Side::Left ? "left" : "right"));
                }
            }
            rp.spawns.push_back(std::move(sr));
        }

        for (const Thread& th : p.threads) {
            rp.threads.push_back({th.recursive, th.body.get(), th.span});
            std::vector<std::pair<std::string, const Term*>> scope;
            resolve_term(*th.body, rp, th.recursive, scope, owner);
        }
    }

    void resolve_term(const Term& t, ResolvedProc& rp, bool in_recursive,
                      std::vector<std::pair<std::string, const Term*>>& scope,
                      std::vector<int>& owner) {
        switch (t.kind) {
            case TermKind::Ident: {
                for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
                    if (it->first == t.text) {
                        unit_.info[&t].binding = it->second;
                        return;
                    }
                }
                error(t.span, fmt::format("Unbound identifier '{}'", t.text));
                return;
            }
            case TermKind::RegRead:
            case TermKind::RegAssign: {
                auto r = rp.find_reg(t.text);
                if (!r) {
                    error(t.span, fmt::format("Unbound identifier '{}'", t.text));
                } else {
                    unit_.info[&t].reg = *r;
                }
                for (const TermPtr& k : t.kids) resolve_term(*k, rp, in_recursive, scope, owner);
                return;
            }
            case TermKind::Send:
            case TermKind::Recv:
            case TermKind::Ready: {
                auto ep = rp.find_endpoint(t.endpoint);
                if (!ep) {
                    error(t.span, fmt::format("Unknown endpoint '{}'", t.endpoint));
                    return;
                }
                if (owner[*ep] == 1) {
                    error(t.span, fmt::format("Endpoint '{}' is owned by a spawned process",
                                              t.endpoint));
                    return;
                }
                owner[*ep] = 2;
                const ResolvedChanType& ct = unit_.chan_types[rp.endpoints[*ep].chan_type];
                auto m = ct.find(t.message);
                if (!m) {
                    error(t.span, fmt::format("Channel type '{}' has no message '{}'",
                                              ct.name, t.message));
                    return;
                }
                TermInfo& info = unit_.info[&t];
                info.msg = {*ep, *m};
                info.polarity = ResolvedUnit::polarity_of(rp.endpoints[*ep].side,
                                                          ct.messages[*m].direction);
                if (t.kind == TermKind::Send && info.polarity != Polarity::Send)
                    error(t.span,
                          fmt::format("Message '{}.{}' is received, not sent, at this endpoint",
                                      t.endpoint, t.message));
                if (t.kind == TermKind::Recv && info.polarity != Polarity::Receive)
                    error(t.span,
                          fmt::format("Message '{}.{}' is sent, not received, at this endpoint",
                                      t.endpoint, t.message));
                for (const TermPtr& k : t.kids) resolve_term(*k, rp, in_recursive, scope, owner);
                return;
            }
            case TermKind::Recurse:
                if (!in_recursive)
                    error(t.span, "'recurse' may only appear inside a recursive thread");
                return;
            case TermKind::Let: {
                resolve_term(*t.kids[0], rp, in_recursive, scope, owner);
                scope.emplace_back(t.text, &t);
                resolve_term(*t.kids[1], rp, in_recursive, scope, owner);
                scope.pop_back();
                return;
            }
            default:
                for (const TermPtr& k : t.kids) resolve_term(*k, rp, in_recursive, scope, owner);
                return;
        }
    }
};

} // namespace

std::optional<ResolvedUnit> resolve(const Program& program, DiagnosticEngine& diags) {
    Resolver r(program, diags);
    return r.run();
}

} // namespace anvil
