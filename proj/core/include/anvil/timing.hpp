#pragma once

#include "anvil/graph.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace anvil {

enum class Verdict { Proved, Unknown };

/// A branch side taken as given while deciding a relation. Obligations that
/// originate inside a branch arm are discharged under the arm's side, so the
/// never-taken (infinite) alternative does not poison the comparison.
struct Assumption {
    uint32_t cond = 0;
    bool side = false;
    bool operator<(const Assumption& o) const {
        return cond != o.cond ? cond < o.cond : side < o.side;
    }
    bool operator==(const Assumption&) const = default;
};
using Assumptions = std::vector<Assumption>; // sorted by cond, at most one per cond

Assumptions with_assumption(const Assumptions& a, uint32_t cond, bool side);

/// Extended-natural time; INF_TIME marks events that never occur.
using Time = uint64_t;
constexpr Time INF_TIME = ~0ull;
Time time_add(Time a, uint64_t k);

struct TimestampFn {
    std::vector<Time> at; // indexed by EventId (dead events hold INF_TIME)
};

/// Sound approximation of the relations over all timestamp functions.
/// `Proved` is returned only when the relation holds for every timestamp
/// function of the graph (restricted to the given branch assumptions);
/// everything else is `Unknown`.
class TimingProver {
  public:
    explicit TimingProver(const EventGraph& g);
    ~TimingProver();

    Verdict le(const PatSet& a, const PatSet& b, const Assumptions& as = {});
    Verdict lt(const PatSet& a, const PatSet& b, const Assumptions& as = {});
    Verdict le(Pat a, Pat b, const Assumptions& as = {});
    Verdict lt(Pat a, Pat b, const Assumptions& as = {});
    Verdict le(EventId a, EventId b, const Assumptions& as = {});
    Verdict lt(EventId a, EventId b, const Assumptions& as = {});

    /// Largest k provably satisfying  tau(a) + k <= tau(b)  for all
    /// timestamp functions; NEG_INF_BOUND when nothing can be proved.
    int64_t bound(EventId a, EventId b, const Assumptions& as = {});

    static constexpr int64_t NEG_INF_BOUND = INT64_MIN / 4;
    static constexpr int64_t POS_INF_BOUND = INT64_MAX / 4;

  private:
    struct Ctx; // per-assumption-set memo tables
    Ctx& ctx(const Assumptions& as);

    int64_t bound_rec(Ctx& c, EventId a, EventId b);
    const std::vector<uint32_t>& governing_conds(EventId e);
    bool inf_dom(Ctx& c, EventId a, EventId b);   // tau(a)=inf  =>  tau(b)=inf
    bool inf_forced(Ctx& c, EventId e);           // tau(e)=inf always
    bool finite_forced(const Assumptions& as, EventId e, int depth = 0);

    bool le_pat(const Assumptions& as, Pat a, Pat b, int64_t k);
    bool le_set(const Assumptions& as, const PatSet& a, const PatSet& b, int64_t k);
    bool pat_finite(const Assumptions& as, const Pat& p);
    bool set_finite(const Assumptions& as, const PatSet& s);

    const EventGraph& g_;
    std::map<Assumptions, std::unique_ptr<Ctx>> ctxs_;
    std::vector<uint32_t> conds_; // lazily collected condition ids
    bool conds_ready_ = false;
    const std::vector<uint32_t>& all_conds();
    std::map<EventId, std::vector<uint32_t>> governing_memo_;
};

// --------------------------------------------------------------------------
// Bounded-exhaustive oracle over timestamp functions.

/// Calls `fn` once per timestamp function obtainable by giving every dynamic
/// MsgSync a slack in [0, bound] past its predecessor and choosing a side for
/// every reachable branch pair. Every function satisfies the label clauses.
void for_each_timestamp(const EventGraph& g, uint32_t bound,
                        const std::function<void(const TimestampFn&)>& fn,
                        const Assumptions& as = {});

uint64_t count_timestamps(const EventGraph& g, uint32_t bound, const Assumptions& as = {});

/// Time of `e:p` under `t`: first matching sync at or after the base time
/// (INF_TIME when none), base time plus k for cycle durations.
Time pattern_time(const EventGraph& g, const TimestampFn& t, const Pat& p);
Time patset_time(const EventGraph& g, const TimestampFn& t, const PatSet& s);

/// True iff the relation holds under every enumerated timestamp function.
bool oracle_le(const EventGraph& g, const PatSet& a, const PatSet& b, uint32_t bound,
               const Assumptions& as = {});
bool oracle_lt(const EventGraph& g, const PatSet& a, const PatSet& b, uint32_t bound,
               const Assumptions& as = {});

} // namespace anvil
