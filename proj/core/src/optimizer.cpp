#include "anvil/optimizer.hpp"

#include "anvil/timing.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace anvil {

namespace {

/// Rewrites the graph so that predecessor ids precede their dependents
/// again (passes may append replacement events out of order), dropping dead
/// events. Returns the old-id -> new-id map (dead ids map to their
/// representative's new id via `forward` composition done by the caller).
std::vector<EventId> topo_normalize(EventGraph& g) {
    size_t n = g.events.size();
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<EventId>> succs(n);
    for (EventId e = 0; e < n; ++e) {
        if (!g.events[e].alive) continue;
        auto dep = [&](EventId p) {
            succs[p].push_back(e);
            ++indeg[e];
        };
        for (EventId p : g.events[e].label.preds) dep(p);
        if (g.events[e].label.kind == EventLabel::Kind::MsgSync &&
            g.events[e].label.sync == SyncTiming::Pinned)
            dep(g.events[e].label.sync_ref);
    }
    std::vector<EventId> order;
    std::vector<EventId> ready;
    for (EventId e = 0; e < n; ++e)
        if (g.events[e].alive && indeg[e] == 0) ready.push_back(e);
    // smallest-id-first for deterministic numbering
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<EventId>());
        EventId e = ready.back();
        ready.pop_back();
        order.push_back(e);
        for (EventId s : succs[e])
            if (--indeg[s] == 0) ready.push_back(s);
    }
    std::vector<EventId> remap(n, NO_EVENT);
    std::vector<EventGraph::Event> rebuilt;
    rebuilt.reserve(order.size());
    for (EventId e : order) {
        remap[e] = static_cast<EventId>(rebuilt.size());
        rebuilt.push_back(std::move(g.events[e]));
    }
    for (auto& ev : rebuilt) {
        for (EventId& p : ev.label.preds) p = remap[p];
        std::sort(ev.label.preds.begin(), ev.label.preds.end());
        if (ev.label.sync_ref != NO_EVENT) ev.label.sync_ref = remap[ev.label.sync_ref];
    }
    g.events = std::move(rebuilt);
    g.entry = remap[g.entry];
    return remap;
}

struct Rewriter {
    EventGraph& g;
    std::vector<EventId> forward; // old id -> representative (pre-normalize ids)
    bool changed = false;

    explicit Rewriter(EventGraph& g_) : g(g_) {
        forward.resize(g.events.size());
        for (EventId e = 0; e < forward.size(); ++e) forward[e] = e;
    }

    void merge(EventId from, EventId to) {
        g.merge_into(from, to);
        forward[from] = to;
        changed = true;
    }

    OptResult finish() {
        // chase forwarding chains, then renumber topologically; events
        // deleted without a representative map to NO_EVENT
        for (EventId e = 0; e < forward.size(); ++e) {
            EventId r = e;
            while (r != NO_EVENT && forward[r] != r) r = forward[r];
            forward[e] = r;
        }
        std::vector<EventId> remap = topo_normalize(g);
        OptResult res;
        res.forward.resize(forward.size());
        for (EventId e = 0; e < forward.size(); ++e)
            res.forward[e] = forward[e] == NO_EVENT ? NO_EVENT : remap[forward[e]];
        return res;
    }
};

std::vector<std::vector<EventId>> successors(const EventGraph& g) {
    std::vector<std::vector<EventId>> succ(g.events.size());
    for (EventId e = 0; e < g.events.size(); ++e) {
        if (!g.events[e].alive) continue;
        for (EventId p : g.events[e].label.preds) succ[p].push_back(e);
        if (g.events[e].label.kind == EventLabel::Kind::MsgSync &&
            g.events[e].label.sync == SyncTiming::Pinned)
            succ[g.events[e].label.sync_ref].push_back(e);
    }
    return succ;
}

bool is_latest_join(const EventLabel& l) {
    return l.kind == EventLabel::Kind::Delay && l.delay == 0;
}

} // namespace

OptResult pass_merge_outbound(EventGraph& g) {
    Rewriter rw(g);
    bool progress = true;
    while (progress) {
        progress = false;
        // group alive delay events by (delay, predecessor set)
        std::map<std::pair<uint32_t, std::vector<EventId>>, EventId> seen;
        for (EventId e = 0; e < g.events.size(); ++e) {
            if (!g.events[e].alive) continue;
            const EventLabel& l = g.label(e);
            if (l.kind != EventLabel::Kind::Delay) continue;
            auto key = std::make_pair(l.delay, l.preds);
            auto [it, fresh] = seen.emplace(key, e);
            if (!fresh) {
                rw.merge(e, it->second);
                progress = true;
            }
        }
    }
    return rw.finish();
}

OptResult pass_remove_unbalanced_joins(EventGraph& g) {
    Rewriter rw(g);
    bool progress = true;
    while (progress) {
        progress = false;
        TimingProver prover(g);
        for (EventId e = 0; e < g.events.size(); ++e) {
            if (!g.events[e].alive) continue;
            const EventLabel& l = g.label(e);
            if (!is_latest_join(l)) continue;
            if (l.preds.size() == 1) {
                rw.merge(e, l.preds[0]);
                progress = true;
                break;
            }
            if (l.preds.size() != 2) continue;
            EventId a = l.preds[0], b = l.preds[1];
            if (prover.le(a, b) == Verdict::Proved) {
                rw.merge(e, b);
                progress = true;
                break;
            }
            if (prover.le(b, a) == Verdict::Proved) {
                rw.merge(e, a);
                progress = true;
                break;
            }
        }
    }
    return rw.finish();
}

OptResult pass_shift_branch_joins(EventGraph& g) {
    Rewriter rw(g);
    bool progress = true;
    while (progress) {
        progress = false;
        auto succ = successors(g);
        for (EventId e = 0; e < g.events.size(); ++e) {
            if (!g.events[e].alive) continue;
            const EventLabel& l = g.label(e);
            if (l.kind != EventLabel::Kind::Join || l.preds.size() != 2) continue;
            EventId x = l.preds[0], y = l.preds[1];
            const EventLabel& lx = g.label(x);
            const EventLabel& ly = g.label(y);
            if (lx.kind != EventLabel::Kind::Delay || ly.kind != EventLabel::Kind::Delay)
                continue;
            if (lx.delay != ly.delay || lx.delay == 0) continue;
            if (lx.preds.size() != 1 || ly.preds.size() != 1) continue;
            if (!g.events[x].actions.empty() || !g.events[y].actions.empty()) continue;
            if (succ[x].size() != 1 || succ[y].size() != 1) continue;
            // join first, then delay once
            EventId j2 = g.add_join({lx.preds[0], ly.preds[0]});
            EventLabel dl;
            dl.kind = EventLabel::Kind::Delay;
            dl.delay = lx.delay;
            dl.preds = {j2};
            EventId d = g.add(dl);
            rw.forward.resize(g.events.size(), NO_EVENT);
            rw.forward[j2] = j2;
            rw.forward[d] = d;
            rw.merge(e, d);
            g.events[x].alive = false;
            g.events[y].alive = false;
            progress = true;
            break;
        }
    }
    return rw.finish();
}

OptResult pass_remove_branch_joins(EventGraph& g) {
    Rewriter rw(g);
    bool progress = true;
    while (progress) {
        progress = false;
        for (EventId e = 0; e < g.events.size(); ++e) {
            if (!g.events[e].alive) continue;
            const EventLabel& l = g.label(e);
            if (l.kind != EventLabel::Kind::Join || l.preds.size() != 2) continue;
            const EventLabel& lx = g.label(l.preds[0]);
            const EventLabel& ly = g.label(l.preds[1]);
            if (lx.kind != EventLabel::Kind::Branch || ly.kind != EventLabel::Kind::Branch)
                continue;
            if (lx.cond != ly.cond || lx.branch_side == ly.branch_side) continue;
            if (lx.preds[0] != ly.preds[0]) continue;
            rw.merge(e, lx.preds[0]);
            progress = true;
            break;
        }
    }
    return rw.finish();
}

OptResult optimize(EventGraph& g, const PassConfig& config) {
    OptResult total;
    total.forward.resize(g.events.size());
    for (EventId e = 0; e < total.forward.size(); ++e) total.forward[e] = e;

    auto compose = [&](const OptResult& step) {
        for (EventId& e : total.forward)
            if (e != NO_EVENT) e = step.forward[e];
    };

    for (int iter = 0;; ++iter) {
        if (iter >= config.max_fixpoint_iterations)
            throw std::runtime_error("optimizer failed to reach a fixpoint");
        size_t before = g.alive_count();
        if (config.merge_outbound) compose(pass_merge_outbound(g));
        if (config.remove_unbalanced) compose(pass_remove_unbalanced_joins(g));
        if (config.shift_branch_joins) compose(pass_shift_branch_joins(g));
        if (config.remove_branch_joins) compose(pass_remove_branch_joins(g));
        if (g.alive_count() == before) break;
    }
    return total;
}

} // namespace anvil
