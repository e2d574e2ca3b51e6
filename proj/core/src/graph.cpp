#include "anvil/graph.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace anvil {

namespace {
uint64_t msg_key(MsgRef m) { return (uint64_t(m.endpoint) << 32) | m.msg; }
} // namespace

size_t EventGraph::alive_count() const {
    size_t n = 0;
    for (const Event& e : events)
        if (e.alive) ++n;
    return n;
}

EventId EventGraph::add(EventLabel l) {
    for (EventId p : l.preds)
        if (p >= events.size()) throw std::logic_error("event predecessor out of range");
    if (l.kind == EventLabel::Kind::MsgSync && l.sync == SyncTiming::Pinned &&
        l.sync_ref >= events.size())
        throw std::logic_error("pinned sync reference out of range");
    events.push_back({std::move(l), {}, true});
    return static_cast<EventId>(events.size() - 1);
}

EventId EventGraph::add_root() {
    EventLabel l;
    l.kind = EventLabel::Kind::Root;
    EventId e = add(std::move(l));
    entry = e;
    return e;
}

EventId EventGraph::add_delay(uint32_t k, std::vector<EventId> preds) {
    std::sort(preds.begin(), preds.end());
    preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
    if (k == 0 && preds.size() == 1) return preds[0];
    EventLabel l;
    l.kind = EventLabel::Kind::Delay;
    l.delay = k;
    l.preds = std::move(preds);
    return add(std::move(l));
}

EventId EventGraph::add_msg_sync(MsgRef m, bool is_send, EventId pred, SyncTiming timing,
                                 EventId ref, uint32_t offset) {
    EventLabel l;
    l.kind = EventLabel::Kind::MsgSync;
    l.msg = m;
    l.is_send = is_send;
    l.sync = timing;
    l.sync_ref = ref;
    l.sync_offset = offset;
    l.preds = {pred};
    return add(std::move(l));
}

EventId EventGraph::add_branch(uint32_t cond, bool side, EventId pred) {
    EventLabel l;
    l.kind = EventLabel::Kind::Branch;
    l.cond = cond;
    l.branch_side = side;
    l.preds = {pred};
    return add(std::move(l));
}

EventId EventGraph::add_join(std::vector<EventId> preds) {
    EventLabel l;
    l.kind = EventLabel::Kind::Join;
    l.preds = std::move(preds);
    return add(std::move(l));
}

ExprId EventGraph::add_expr(Expr e) {
    exprs.push_back(std::move(e));
    return static_cast<ExprId>(exprs.size() - 1);
}

void EventGraph::set_msg_label(MsgRef m, std::string name) {
    msg_labels[msg_key(m)] = std::move(name);
}

std::string EventGraph::msg_label(MsgRef m) const {
    auto it = msg_labels.find(msg_key(m));
    if (it != msg_labels.end()) return it->second;
    return fmt::format("ep{}.m{}", m.endpoint, m.msg);
}

std::vector<EventId> EventGraph::syncs_of(MsgRef m) const {
    std::vector<EventId> out;
    for (EventId e = 0; e < events.size(); ++e)
        if (events[e].alive && events[e].label.kind == EventLabel::Kind::MsgSync &&
            events[e].label.msg == m)
            out.push_back(e);
    return out;
}

void EventGraph::merge_into(EventId from, EventId to) {
    if (from == to) return;
    for (Event& ev : events) {
        if (!ev.alive) continue;
        for (EventId& p : ev.label.preds)
            if (p == from) p = to;
        // a node must not list the same predecessor twice
        auto& ps = ev.label.preds;
        std::sort(ps.begin(), ps.end());
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
        if (ev.label.sync_ref == from) ev.label.sync_ref = to;
    }
    Event& f = events[from];
    Event& t = events[to];
    for (GraphAction& a : f.actions) t.actions.push_back(std::move(a));
    f.actions.clear();
    f.alive = false;
    if (entry == from) entry = to;
}

std::vector<EventId> EventGraph::compact() {
    std::vector<EventId> remap(events.size(), NO_EVENT);
    std::vector<Event> kept;
    for (EventId e = 0; e < events.size(); ++e) {
        if (!events[e].alive) continue;
        remap[e] = static_cast<EventId>(kept.size());
        kept.push_back(std::move(events[e]));
    }
    for (Event& ev : kept) {
        for (EventId& p : ev.label.preds) p = remap[p];
        if (ev.label.sync_ref != NO_EVENT) ev.label.sync_ref = remap[ev.label.sync_ref];
    }
    events = std::move(kept);
    entry = remap[entry];
    return remap;
}

bool EventGraph::check_acyclic() const {
    for (EventId e = 0; e < events.size(); ++e) {
        if (!events[e].alive) continue;
        for (EventId p : events[e].label.preds)
            if (p >= e) return false;
        if (events[e].label.sync_ref != NO_EVENT && events[e].label.sync_ref >= e) return false;
    }
    return true;
}

namespace {

std::string label_text(const EventGraph& g, EventId e) {
    const EventLabel& l = g.label(e);
    switch (l.kind) {
        case EventLabel::Kind::Root: return "0";
        case EventLabel::Kind::Delay: return fmt::format("#{}", l.delay);
        case EventLabel::Kind::MsgSync: {
            std::string s = g.msg_label(l.msg);
            if (l.sync == SyncTiming::Pinned)
                s += fmt::format(" (=e{}+{})", l.sync_ref, l.sync_offset);
            if (l.sync == SyncTiming::Immediate) s += " (!)";
            return s;
        }
        case EventLabel::Kind::Branch: return fmt::format("&c{}{}", l.cond, l.branch_side ? "+" : "-");
        case EventLabel::Kind::Join: return "(+)";
    }
    return "?";
}

} // namespace

std::string dump_dot(const EventGraph& g) {
    std::string out = "digraph events {\n  rankdir=TB;\n  node [shape=ellipse];\n";
    for (EventId e = 0; e < g.events.size(); ++e) {
        if (!g.events[e].alive) continue;
        std::string extra;
        if (!g.events[e].actions.empty()) extra = ", peripheries=2";
        out += fmt::format("  e{} [label=\"e{}: {}\"{}];\n", e, e, label_text(g, e), extra);
    }
    for (EventId e = 0; e < g.events.size(); ++e) {
        if (!g.events[e].alive) continue;
        const EventLabel& l = g.label(e);
        for (EventId p : l.preds) {
            switch (l.kind) {
                case EventLabel::Kind::Delay:
                    out += fmt::format("  e{} -> e{} [label=\"#{}\"];\n", p, e, l.delay);
                    break;
                case EventLabel::Kind::MsgSync:
                    out += fmt::format("  e{} -> e{} [label=\"{}\"];\n", p, e, g.msg_label(l.msg));
                    break;
                case EventLabel::Kind::Branch:
                    out += fmt::format("  e{} -> e{} [style=dashed];\n", p, e);
                    break;
                case EventLabel::Kind::Join:
                    out += fmt::format("  e{} -> e{} [style=dotted];\n", p, e);
                    break;
                case EventLabel::Kind::Root:
                    break;
            }
        }
    }
    out += "}\n";
    return out;
}

std::string graph_to_json(const EventGraph& g) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["entry"] = g.entry;
    nlohmann::json events = nlohmann::json::array();
    for (EventId e = 0; e < g.events.size(); ++e) {
        if (!g.events[e].alive) continue;
        const EventLabel& l = g.label(e);
        nlohmann::json je;
        je["id"] = e;
        switch (l.kind) {
            case EventLabel::Kind::Root: je["kind"] = "root"; break;
            case EventLabel::Kind::Delay:
                je["kind"] = "delay";
                je["cycles"] = l.delay;
                break;
            case EventLabel::Kind::MsgSync:
                je["kind"] = "sync";
                je["message"] = g.msg_label(l.msg);
                je["send"] = l.is_send;
                switch (l.sync) {
                    case SyncTiming::Dynamic: je["timing"] = "dynamic"; break;
                    case SyncTiming::Immediate: je["timing"] = "immediate"; break;
                    case SyncTiming::Pinned:
                        je["timing"] = "pinned";
                        je["ref"] = l.sync_ref;
                        je["offset"] = l.sync_offset;
                        break;
                }
                break;
            case EventLabel::Kind::Branch:
                je["kind"] = "branch";
                je["cond"] = l.cond;
                je["side"] = l.branch_side ? "then" : "else";
                break;
            case EventLabel::Kind::Join: je["kind"] = "join"; break;
        }
        if (!l.preds.empty()) je["preds"] = l.preds;
        if (!g.events[e].actions.empty()) {
            nlohmann::json acts = nlohmann::json::array();
            for (const GraphAction& a : g.events[e].actions) {
                nlohmann::json ja;
                switch (a.kind) {
                    case GraphAction::Kind::RegWrite:
                        ja["kind"] = "reg-write";
                        ja["reg"] = a.reg;
                        break;
                    case GraphAction::Kind::Send:
                        ja["kind"] = "send";
                        ja["message"] = g.msg_label(a.msg);
                        break;
                    case GraphAction::Kind::Recv:
                        ja["kind"] = "recv";
                        ja["message"] = g.msg_label(a.msg);
                        break;
                    case GraphAction::Kind::Print:
                        ja["kind"] = "print";
                        ja["format"] = a.fmt;
                        break;
                }
                acts.push_back(ja);
            }
            je["actions"] = acts;
        }
        events.push_back(je);
    }
    j["events"] = events;
    return j.dump(2) + "\n";
}

} // namespace anvil
