#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "hira/dram_core.hpp"
#include "hira/event_log.hpp"
#include "hira/hira_op.hpp"
#include "hira/refresh_structs.hpp"
#include "hira/rng.hpp"

namespace hira {

enum class SchedulerMode {
  NoRefresh,    // ideal anchor: no periodic refresh, REF disabled
  BaselineRef,  // rank-level REF every tREFI
  Hira,         // per-row refresh requests with deadlines, HiRA parallelization
};

// How preventive refreshes are performed. Queued is the HiRA-MC path
// (PR-FIFO + Refresh Table + deadline); Immediate performs each preventive
// refresh standalone right away, which is PARA as originally proposed.
enum class PreventivePolicy { Queued, Immediate };

struct SchedulerConfig {
  SchedulerMode mode = SchedulerMode::Hira;
  int slack_multiple = 2;  // tRefSlack = N * tRC (HiRA-N)
  bool para_enabled = false;
  double p_th = 0.0;
  PreventivePolicy preventive_policy = PreventivePolicy::Queued;
  std::uint64_t rng_seed = 1;
  std::size_t refresh_table_capacity = 68;  // per rank
  std::size_t pr_fifo_capacity = 4;         // per bank
  std::size_t queue_depth = 64;  // per-bank demand queue; the front end
                                 // back-pressures beyond this
  picoseconds command_slot = 833;  // command bus occupancy per DRAM command
  // Engineered delays used for every HiRA operation the scheduler builds.
  picoseconds hira_t1 = 3000;
  picoseconds hira_t2 = 3000;

  picoseconds refresh_slack(const TimingParams& tp) const {
    return static_cast<picoseconds>(slack_multiple) * tp.tRC;
  }
};

struct DemandRequest {
  int source = 0;
  bool is_write = false;
  DramAddress addr;
  picoseconds arrival = 0;
  std::uint64_t seq = 0;
};

// Generation instant of periodic refresh request k for one bank:
// floor(tREFW * (bank + k * banks_per_rank) / (rows_per_bank * banks_per_rank)).
// Per-bank period tREFW / rows_per_bank, banks staggered by 1/banks_per_rank
// of the period, exactly rows_per_bank requests per bank per window despite
// the non-integral period (the floor distributes the remainder).
picoseconds periodic_generation_time(picoseconds t_refw,
                                     std::int64_t rows_per_bank,
                                     std::int64_t banks_per_rank, BankId bank,
                                     std::int64_t k);

struct SourceStats {
  std::int64_t injected = 0;
  std::int64_t served = 0;
  picoseconds latency_sum = 0;
};

struct SchedulerStats {
  std::int64_t served = 0;
  std::int64_t hira_ra = 0;
  std::int64_t hira_rr = 0;
  std::int64_t standalone_refreshes = 0;
  std::int64_t refs = 0;
  std::int64_t periodic_generated = 0;
  std::int64_t preventive_generated = 0;
  std::int64_t deadline_violations = 0;
  std::int64_t commands_issued = 0;
  picoseconds bus_busy = 0;
  picoseconds tfaw_stall = 0;
  std::size_t refresh_table_peak = 0;  // max over ranks
  std::vector<SourceStats> sources;
};

// Per-channel memory controller: FR-FCFS demand scheduling plus the HiRA-MC
// refresh machinery (PeriodicRC, PreventiveRC with PARA, Refresh Table,
// RefPtr Table, PR-FIFO, SPT, Concurrent Refresh Finder Cases 1 and 2).
// Deterministic: all randomness flows from the seeded generator in the
// config.
class Controller {
 public:
  Controller(DramChip& chip, const SchedulerConfig& cfg,
             EventLog* log = nullptr);

  void add_request(int source, bool is_write, const DramAddress& addr,
                   picoseconds arrival);

  // Advance simulation to t_end (inclusive of events at t_end).
  void run_until(picoseconds t_end) { run_until(t_end, false); }

  // Run until all injected demand requests are served, but no further than
  // hard_stop. Returns the finish time.
  picoseconds run_to_drain(picoseconds hard_stop);

  picoseconds now() const { return now_; }
  bool demand_drained() const;

  const SchedulerStats& stats() const { return stats_; }
  const DramChip& chip() const { return *chip_; }
  const RefreshTable& refresh_table(RankId r) const {
    return tables_[static_cast<std::size_t>(r)];
  }
  SubarrayPairsTable& spt() { return spt_; }

  // Worst-case issue latency the deadline check allows on top of a request's
  // deadline: closing an open row (tRAS), the precharge (tRP), and a full
  // four-activation window stall.
  picoseconds deadline_grace() const;

 private:
  struct CommittedRefresh {
    RowId row1 = -1;
    RowId row2 = -1;  // paired refresh-refresh partner, -1 if standalone
    RefreshKind kind1 = RefreshKind::Invalid;
    RefreshKind kind2 = RefreshKind::Invalid;
    picoseconds deadline1 = 0;
    picoseconds deadline2 = 0;
    // Immediate-policy preventive refreshes predate the deadline machinery
    // (original PARA performs them as soon as the bank allows); they are not
    // deadline-accounted.
    bool track_deadline = true;
  };

  struct PendingAccessPair {
    bool active = false;
    RowId refresh_row = -1;
    RefreshKind kind = RefreshKind::Invalid;
    picoseconds deadline = 0;
    picoseconds ready_at = 0;  // pre_time + tRP
  };

  struct BankCtl {
    std::deque<DemandRequest> queue;
    std::deque<CommittedRefresh> committed;
    PendingAccessPair pair;
    bool fenced = false;  // an imminent refresh reserves the bank
  };

  struct RankCtl {
    picoseconds next_ref_at = 0;
    picoseconds busy_until = 0;  // tRFC block after a REF
    std::vector<picoseconds> act_times;  // ring of 4, scheduler-side tFAW
    int act_head = 0;
  };

  // Candidate scheduler decisions, ordered by (time, priority, bank).
  enum class ActionKind {
    None,
    RefreshStep,   // committed refresh: PRE-close / ACT / closing PRE / HiRA op
    RefStep,       // baseline REF flow: PRE-close or REF
    PairedAct,     // HiRA refresh-access transaction
    DemandColumn,  // RD/WR row hit
    DemandPre,     // conflict close (consults Case 1)
    DemandAct,
    DualClose,     // closing PRE of a dual-open bank
  };

  struct Action {
    ActionKind kind = ActionKind::None;
    picoseconds at = 0;
    // Time ties break on the refresh deadline the action carries (demand
    // actions carry none), then on the class priority, then on the bank.
    picoseconds deadline = std::numeric_limits<picoseconds>::max() / 4;
    int priority = 0;
    RankId rank = 0;
    BankId bank = 0;
  };

  std::size_t gbank(RankId r, BankId b) const {
    return static_cast<std::size_t>(r) * geom_.banks_per_rank + b;
  }

  // --- bookkeeping ---
  void admit_arrivals();
  picoseconds next_periodic_time(std::size_t gb) const;
  void generate_periodic_at(std::size_t gb);
  void case2_scan();
  void update_fences();

  // --- tFAW (scheduler side) ---
  void record_act(RankId rank, picoseconds t);
  picoseconds tfaw_earliest(RankId rank, picoseconds t, int acts) const;

  // --- issue helpers ---
  picoseconds busify(picoseconds t) const;
  void bus_consume(picoseconds t, int commands, picoseconds span);
  CommandResult must_issue(RankId rank, BankId bank, const Command& cmd,
                           picoseconds t, bool hira = false);
  void para_sample(RankId rank, BankId bank, RowId row, picoseconds t);
  void note_refresh_performed(picoseconds act_time, picoseconds deadline);

  void run_until(picoseconds t_end, bool stop_on_drain);

  // --- decision logic ---
  Action best_action() const;
  void execute(const Action& a);
  std::optional<RowId> find_case1_pair(RankId rank, BankId bank,
                                       RowId demand_row);
  void try_case1_after_pre(RankId rank, BankId bank, picoseconds t);
  void commit_refresh(RankId rank, const RefreshRequest& head);
  bool demand_act_allowed(RankId rank, BankId bank) const;

  void serve_column(RankId rank, BankId bank, picoseconds t, RowId open_row);
  void run_hira_transaction(RankId rank, BankId bank, RowId first, RowId second,
                            picoseconds t, bool refresh_refresh);

  DramChip* chip_;
  SchedulerConfig cfg_;
  Geometry geom_;
  TimingParams tp_;
  EventLog* log_;
  Rng rng_;

  SubarrayPairsTable spt_;
  std::vector<RefreshTable> tables_;   // per rank
  std::vector<RefPtrTable> refptr_;    // per rank
  std::vector<PrFifo> prfifo_;         // per global bank
  std::vector<BankCtl> banks_;         // per global bank
  std::vector<RankCtl> ranks_;

  // Periodic generation: request k of global bank gb fires at
  // floor(tREFW * (bank_phase + k * banks_per_rank) / (rows * banks_per_rank)).
  std::vector<std::int64_t> periodic_k_;

  std::deque<DemandRequest> arrivals_;  // sorted by arrival
  std::uint64_t next_req_seq_ = 0;

  picoseconds now_ = 0;
  picoseconds bus_free_ = 0;
  picoseconds next_scan_ = 0;
  picoseconds scan_period_ = 0;

  SchedulerStats stats_;
};

}  // namespace hira
