#include "anvil/timing.hpp"

#include <algorithm>
#include <unordered_map>

namespace anvil {

Time time_add(Time a, uint64_t k) {
    if (a == INF_TIME) return INF_TIME;
    Time r = a + k;
    return r < a ? INF_TIME : r;
}

Assumptions with_assumption(const Assumptions& a, uint32_t cond, bool side) {
    Assumptions out;
    out.reserve(a.size() + 1);
    bool placed = false;
    for (const Assumption& x : a) {
        if (x.cond == cond) {
            // an existing assumption on the same condition wins
            return a;
        }
        if (!placed && x.cond > cond) {
            out.push_back({cond, side});
            placed = true;
        }
        out.push_back(x);
    }
    if (!placed) out.push_back({cond, side});
    return out;
}

namespace {
/// -1 unknown, 0 forced else, 1 forced then
int forced_side(const Assumptions& as, uint32_t cond) {
    for (const Assumption& a : as)
        if (a.cond == cond) return a.side ? 1 : 0;
    return -1;
}
} // namespace

struct TimingProver::Ctx {
    Assumptions as;
    std::unordered_map<uint64_t, int64_t> bound_memo;
    std::unordered_map<uint64_t, int8_t> infdom_memo;
    std::vector<int8_t> inf_forced_memo; // -1 unknown, 0 no, 1 yes
};

TimingProver::TimingProver(const EventGraph& g) : g_(g) {}
TimingProver::~TimingProver() = default;

TimingProver::Ctx& TimingProver::ctx(const Assumptions& as) {
    auto it = ctxs_.find(as);
    if (it == ctxs_.end()) {
        auto c = std::make_unique<Ctx>();
        c->as = as;
        c->inf_forced_memo.assign(g_.events.size(), -1);
        it = ctxs_.emplace(as, std::move(c)).first;
    }
    return *it->second;
}

const std::vector<uint32_t>& TimingProver::governing_conds(EventId e) {
    auto it = governing_memo_.find(e);
    if (it != governing_memo_.end()) return it->second;
    std::vector<uint32_t> out;
    const EventLabel& l = g_.label(e);
    auto absorb = [&](EventId p) {
        for (uint32_t c : governing_conds(p))
            if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    };
    for (EventId p : l.preds) absorb(p);
    if (l.kind == EventLabel::Kind::MsgSync && l.sync == SyncTiming::Pinned)
        absorb(l.sync_ref);
    if (l.kind == EventLabel::Kind::Branch &&
        std::find(out.begin(), out.end(), l.cond) == out.end())
        out.push_back(l.cond);
    std::sort(out.begin(), out.end());
    return governing_memo_.emplace(e, std::move(out)).first->second;
}

const std::vector<uint32_t>& TimingProver::all_conds() {
    if (!conds_ready_) {
        for (const auto& ev : g_.events) {
            if (!ev.alive || ev.label.kind != EventLabel::Kind::Branch) continue;
            if (std::find(conds_.begin(), conds_.end(), ev.label.cond) == conds_.end())
                conds_.push_back(ev.label.cond);
        }
        std::sort(conds_.begin(), conds_.end());
        conds_ready_ = true;
    }
    return conds_;
}

bool TimingProver::inf_forced(Ctx& c, EventId e) {
    int8_t& memo = c.inf_forced_memo[e];
    if (memo >= 0) return memo != 0;
    memo = 0; // default while recursing (graph is acyclic, but stay safe)
    const EventLabel& l = g_.label(e);
    bool r = false;
    switch (l.kind) {
        case EventLabel::Kind::Root: r = false; break;
        case EventLabel::Kind::Delay:
        case EventLabel::Kind::MsgSync: {
            if (l.kind == EventLabel::Kind::MsgSync && l.sync == SyncTiming::Pinned) {
                r = inf_forced(c, l.sync_ref);
                break;
            }
            for (EventId p : l.preds)
                if (inf_forced(c, p)) r = true;
            break;
        }
        case EventLabel::Kind::Branch: {
            int side = forced_side(c.as, l.cond);
            if (side >= 0 && (side == 1) != l.branch_side) r = true;
            else r = inf_forced(c, l.preds[0]);
            break;
        }
        case EventLabel::Kind::Join: {
            r = !l.preds.empty();
            for (EventId p : l.preds)
                if (!inf_forced(c, p)) r = false;
            break;
        }
    }
    memo = r ? 1 : 0;
    return r;
}

bool TimingProver::inf_dom(Ctx& c, EventId a, EventId b) {
    if (a == b) return true;
    uint64_t key = (uint64_t(a) << 32) | b;
    auto it = c.infdom_memo.find(key);
    if (it != c.infdom_memo.end()) return it->second != 0;
    c.infdom_memo[key] = 0;
    const EventLabel& l = g_.label(b);
    bool r = false;
    switch (l.kind) {
        case EventLabel::Kind::Root: r = false; break;
        case EventLabel::Kind::Delay:
            for (EventId p : l.preds)
                if (inf_dom(c, a, p)) r = true;
            break;
        case EventLabel::Kind::MsgSync:
            if (l.sync == SyncTiming::Pinned) r = inf_dom(c, a, l.sync_ref);
            else r = inf_dom(c, a, l.preds[0]);
            break;
        case EventLabel::Kind::Branch:
            r = inf_dom(c, a, l.preds[0]);
            break;
        case EventLabel::Kind::Join: {
            r = !l.preds.empty();
            for (EventId p : l.preds)
                if (!inf_dom(c, a, p)) r = false;
            break;
        }
    }
    c.infdom_memo[key] = r ? 1 : 0;
    return r;
}

int64_t TimingProver::bound(EventId a, EventId b, const Assumptions& as) {
    return bound_rec(ctx(as), a, b);
}

int64_t TimingProver::bound_rec(Ctx& c, EventId a, EventId b) {
    uint64_t key = (uint64_t(a) << 32) | b;
    auto it = c.bound_memo.find(key);
    if (it != c.bound_memo.end()) return it->second;
    c.bound_memo[key] = NEG_INF_BOUND; // recursion guard

    int64_t best = NEG_INF_BOUND;
    if (inf_forced(c, b)) {
        best = POS_INF_BOUND; // tau(b) = inf, so anything is <= it
    } else {
        if (a == b) best = 0;
        if (g_.label(a).kind == EventLabel::Kind::Root) best = std::max<int64_t>(best, 0);

        auto clamp_add = [](int64_t x, int64_t d) {
            if (x == NEG_INF_BOUND || x == POS_INF_BOUND) return x;
            return x + d;
        };

        // decompose b
        const EventLabel& lb = g_.label(b);
        switch (lb.kind) {
            case EventLabel::Kind::Root:
                break;
            case EventLabel::Kind::Delay:
                for (EventId p : lb.preds)
                    best = std::max(best, clamp_add(bound_rec(c, a, p), lb.delay));
                break;
            case EventLabel::Kind::MsgSync:
                if (lb.sync == SyncTiming::Pinned) {
                    best = std::max(best, clamp_add(bound_rec(c, a, lb.sync_ref),
                                                    lb.sync_offset));
                } else {
                    // tau(b) >= tau(pred) for both Dynamic and Immediate
                    best = std::max(best, bound_rec(c, a, lb.preds[0]));
                }
                break;
            case EventLabel::Kind::Branch:
                // tau(b) is tau(pred) when taken, inf otherwise; both at least
                // dominate anything below tau(pred)
                best = std::max(best, bound_rec(c, a, lb.preds[0]));
                break;
            case EventLabel::Kind::Join: {
                int64_t m = POS_INF_BOUND;
                for (EventId p : lb.preds) m = std::min(m, bound_rec(c, a, p));
                if (!lb.preds.empty()) best = std::max(best, m);
                break;
            }
        }

        // decompose a
        const EventLabel& la = g_.label(a);
        switch (la.kind) {
            case EventLabel::Kind::Root:
                break;
            case EventLabel::Kind::Delay: {
                int64_t m = POS_INF_BOUND;
                for (EventId p : la.preds) m = std::min(m, bound_rec(c, p, b));
                if (!la.preds.empty())
                    best = std::max(best, clamp_add(m, -int64_t(la.delay)));
                break;
            }
            case EventLabel::Kind::MsgSync:
                if (la.sync == SyncTiming::Pinned)
                    best = std::max(best, clamp_add(bound_rec(c, la.sync_ref, b),
                                                    -int64_t(la.sync_offset)));
                else if (la.sync == SyncTiming::Immediate)
                    best = std::max(best, bound_rec(c, la.preds[0], b));
                // Dynamic is unbounded above: only b-side decomposition helps
                break;
            case EventLabel::Kind::Branch: {
                int side = forced_side(c.as, la.cond);
                if (side >= 0) {
                    if ((side == 1) == la.branch_side)
                        best = std::max(best, bound_rec(c, la.preds[0], b));
                    // forced-untaken: tau(a)=inf handled only via inf_forced(b)
                } else if (inf_dom(c, a, b)) {
                    Ctx& taken = ctx(with_assumption(c.as, la.cond, la.branch_side));
                    best = std::max(best, bound_rec(taken, la.preds[0], b));
                }
                break;
            }
            case EventLabel::Kind::Join:
                for (EventId p : la.preds)
                    best = std::max(best, bound_rec(c, p, b));
                break;
        }

        // case split on a branch condition governing either side: the bound
        // holds if it holds under both outcomes
        if (best == NEG_INF_BOUND) {
            std::vector<uint32_t> cands = governing_conds(a);
            for (uint32_t cd : governing_conds(b))
                if (std::find(cands.begin(), cands.end(), cd) == cands.end())
                    cands.push_back(cd);
            for (uint32_t cd : cands) {
                if (forced_side(c.as, cd) >= 0) continue;
                Ctx& then_ctx = ctx(with_assumption(c.as, cd, true));
                Ctx& else_ctx = ctx(with_assumption(c.as, cd, false));
                int64_t split = std::min(bound_rec(then_ctx, a, b), bound_rec(else_ctx, a, b));
                best = std::max(best, split);
                if (best > NEG_INF_BOUND) break;
            }
        }
    }

    c.bound_memo[key] = best;
    return best;
}

bool TimingProver::finite_forced(const Assumptions& as, EventId e, int depth) {
    const EventLabel& l = g_.label(e);
    switch (l.kind) {
        case EventLabel::Kind::Root: return true;
        case EventLabel::Kind::Delay: {
            for (EventId p : l.preds)
                if (!finite_forced(as, p, depth)) return false;
            return !l.preds.empty();
        }
        case EventLabel::Kind::MsgSync:
            if (l.sync == SyncTiming::Pinned) return finite_forced(as, l.sync_ref, depth);
            return finite_forced(as, l.preds[0], depth);
        case EventLabel::Kind::Branch: {
            int side = forced_side(as, l.cond);
            if (side >= 0 && (side == 1) == l.branch_side)
                return finite_forced(as, l.preds[0], depth);
            return false;
        }
        case EventLabel::Kind::Join: {
            // min over predecessors: finite when, in every world, at least
            // one predecessor is finite
            for (EventId p : l.preds)
                if (finite_forced(as, p, depth)) return true;
            // split on one condition: a join of the two sides of a branch is
            // finite because exactly one side is taken
            if (depth >= 4) return false;
            for (uint32_t cnd : all_conds()) {
                if (forced_side(as, cnd) >= 0) continue;
                Assumptions at = with_assumption(as, cnd, true);
                Assumptions ae = with_assumption(as, cnd, false);
                bool then_any = false, else_any = false;
                for (EventId p : l.preds) {
                    if (finite_forced(at, p, depth + 1)) then_any = true;
                    if (finite_forced(ae, p, depth + 1)) else_any = true;
                }
                if (then_any && else_any) return true;
            }
            return false;
        }
    }
    return false;
}

bool TimingProver::le_pat(const Assumptions& as, Pat a, Pat b, int64_t k) {
    if (a.dur == Pat::Dur::Msg && b.dur == Pat::Dur::Msg && a.base == b.base &&
        a.msg == b.msg)
        return k <= 0;
    if (a.dur == Pat::Dur::Msg) {
        // upper-bound the left pattern by a sync that is always a candidate
        for (EventId cand : g_.syncs_of(a.msg)) {
            if (bound(a.base, cand, as) < 0) continue; // not always at-or-after base
            if (le_pat(as, Pat::at(cand), b, k)) return true;
        }
        return false;
    }
    if (b.dur == Pat::Dur::Cycles) {
        return bound(a.base, b.base, as) >= k + int64_t(a.cycles) - int64_t(b.cycles);
    }
    // b is a message pattern: every sync of the message either can never be
    // the first match or is itself dominated
    for (EventId cand : g_.syncs_of(b.msg)) {
        bool excluded = bound(cand, b.base, as) >= 1; // always strictly before base
        if (excluded) continue;
        if (bound(a.base, cand, as) < k + int64_t(a.cycles)) return false;
    }
    return true;
}

bool TimingProver::le_set(const Assumptions& as, const PatSet& a, const PatSet& b, int64_t k) {
    for (const Pat& pb : b.pats) {
        bool ok = false;
        for (const Pat& pa : a.pats) {
            if (le_pat(as, pa, pb, k)) {
                ok = true;
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

bool TimingProver::pat_finite(const Assumptions& as, const Pat& p) {
    if (p.dur == Pat::Dur::Cycles) return finite_forced(as, p.base);
    for (EventId cand : g_.syncs_of(p.msg)) {
        if (bound(p.base, cand, as) < 0) continue;
        if (finite_forced(as, cand)) return true;
    }
    return false;
}

bool TimingProver::set_finite(const Assumptions& as, const PatSet& s) {
    for (const Pat& p : s.pats)
        if (pat_finite(as, p)) return true;
    return false;
}

Verdict TimingProver::le(const PatSet& a, const PatSet& b, const Assumptions& as) {
    return le_set(as, a, b, 0) ? Verdict::Proved : Verdict::Unknown;
}

Verdict TimingProver::lt(const PatSet& a, const PatSet& b, const Assumptions& as) {
    if (a.pats.empty()) return Verdict::Unknown; // inf < anything never holds
    if (!le_set(as, a, b, 1)) return Verdict::Unknown;
    return set_finite(as, a) ? Verdict::Proved : Verdict::Unknown;
}

Verdict TimingProver::le(Pat a, Pat b, const Assumptions& as) {
    return le(PatSet::of(a), PatSet::of(b), as);
}
Verdict TimingProver::lt(Pat a, Pat b, const Assumptions& as) {
    return lt(PatSet::of(a), PatSet::of(b), as);
}
Verdict TimingProver::le(EventId a, EventId b, const Assumptions& as) {
    return le(Pat::at(a), Pat::at(b), as);
}
Verdict TimingProver::lt(EventId a, EventId b, const Assumptions& as) {
    return lt(Pat::at(a), Pat::at(b), as);
}

// --------------------------------------------------------------------------
// Enumeration oracle

namespace {

struct Enumerator {
    const EventGraph& g;
    uint32_t bound;
    const std::function<void(const TimestampFn&)>& fn;
    const Assumptions& as;
    TimestampFn t;
    std::unordered_map<uint32_t, bool> side; // condition -> then?

    Enumerator(const EventGraph& g_, uint32_t b, const std::function<void(const TimestampFn&)>& f,
               const Assumptions& a)
        : g(g_), bound(b), fn(f), as(a) {
        t.at.assign(g.events.size(), INF_TIME);
    }

    Time pred_max(const EventLabel& l) {
        Time m = 0;
        for (EventId p : l.preds) m = std::max(m, t.at[p]);
        return m;
    }

    void step(EventId e) {
        if (e == g.events.size()) {
            fn(t);
            return;
        }
        if (!g.events[e].alive) {
            t.at[e] = INF_TIME;
            step(e + 1);
            return;
        }
        const EventLabel& l = g.label(e);
        switch (l.kind) {
            case EventLabel::Kind::Root:
                t.at[e] = 0;
                step(e + 1);
                return;
            case EventLabel::Kind::Delay:
                t.at[e] = time_add(pred_max(l), l.delay);
                step(e + 1);
                return;
            case EventLabel::Kind::Join: {
                Time m = INF_TIME;
                for (EventId p : l.preds) m = std::min(m, t.at[p]);
                t.at[e] = m;
                step(e + 1);
                return;
            }
            case EventLabel::Kind::MsgSync: {
                if (l.sync == SyncTiming::Immediate) {
                    t.at[e] = t.at[l.preds[0]];
                    step(e + 1);
                    return;
                }
                if (l.sync == SyncTiming::Pinned) {
                    t.at[e] = time_add(t.at[l.sync_ref], l.sync_offset);
                    step(e + 1);
                    return;
                }
                Time base = pred_max(l);
                if (base == INF_TIME) {
                    t.at[e] = INF_TIME;
                    step(e + 1);
                    return;
                }
                for (uint32_t k = 0; k <= bound; ++k) {
                    t.at[e] = base + k;
                    step(e + 1);
                }
                return;
            }
            case EventLabel::Kind::Branch: {
                Time base = t.at[l.preds[0]];
                if (base == INF_TIME) {
                    t.at[e] = INF_TIME;
                    step(e + 1);
                    return;
                }
                auto it = side.find(l.cond);
                if (it != side.end()) {
                    t.at[e] = it->second == l.branch_side ? base : INF_TIME;
                    step(e + 1);
                    return;
                }
                int forced = forced_side(as, l.cond);
                for (int s = 0; s < 2; ++s) {
                    if (forced >= 0 && forced != s) continue;
                    side[l.cond] = s == 1;
                    t.at[e] = (s == 1) == l.branch_side ? base : INF_TIME;
                    step(e + 1);
                }
                side.erase(l.cond);
                return;
            }
        }
    }
};

} // namespace

void for_each_timestamp(const EventGraph& g, uint32_t bound,
                        const std::function<void(const TimestampFn&)>& fn,
                        const Assumptions& as) {
    Enumerator en(g, bound, fn, as);
    en.step(0);
}

uint64_t count_timestamps(const EventGraph& g, uint32_t bound, const Assumptions& as) {
    uint64_t n = 0;
    for_each_timestamp(g, bound, [&](const TimestampFn&) { ++n; }, as);
    return n;
}

Time pattern_time(const EventGraph& g, const TimestampFn& t, const Pat& p) {
    Time base = t.at[p.base];
    if (p.dur == Pat::Dur::Cycles) return time_add(base, p.cycles);
    Time best = INF_TIME;
    for (EventId e : g.syncs_of(p.msg)) {
        Time te = t.at[e];
        if (te == INF_TIME) continue;
        if (base != INF_TIME && te >= base) best = std::min(best, te);
    }
    return best;
}

Time patset_time(const EventGraph& g, const TimestampFn& t, const PatSet& s) {
    Time best = INF_TIME;
    for (const Pat& p : s.pats) best = std::min(best, pattern_time(g, t, p));
    return best;
}

bool oracle_le(const EventGraph& g, const PatSet& a, const PatSet& b, uint32_t bound,
               const Assumptions& as) {
    bool ok = true;
    for_each_timestamp(g, bound, [&](const TimestampFn& t) {
        if (!ok) return;
        if (patset_time(g, t, a) > patset_time(g, t, b)) ok = false;
    }, as);
    return ok;
}

bool oracle_lt(const EventGraph& g, const PatSet& a, const PatSet& b, uint32_t bound,
               const Assumptions& as) {
    bool ok = true;
    for_each_timestamp(g, bound, [&](const TimestampFn& t) {
        if (!ok) return;
        Time ta = patset_time(g, t, a);
        Time tb = patset_time(g, t, b);
        if (!(ta < tb)) ok = false;
    }, as);
    return ok;
}

} // namespace anvil
