#include "hira/scheduler.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace hira {

namespace {
constexpr picoseconds kFar = std::numeric_limits<picoseconds>::max() / 4;
// A committed entry whose refresh ACT already happened and only awaits the
// closing PRE.
constexpr RowId kCloseOnly = -2;
}  // namespace

Controller::Controller(DramChip& chip, const SchedulerConfig& cfg, EventLog* log)
    : chip_(&chip),
      cfg_(cfg),
      geom_(chip.geometry()),
      tp_(chip.timing()),
      log_(log),
      rng_(cfg.rng_seed),
      spt_(chip.isolation()) {
  if (cfg_.slack_multiple < 0)
    throw std::invalid_argument("slack multiple must be >= 0");
  if (cfg_.p_th < 0.0 || cfg_.p_th > 1.0)
    throw std::invalid_argument("p_th must be in [0, 1]");
  // Every operation this controller builds must satisfy the operating
  // conditions; the subarray-isolation condition is checked per pair against
  // the SPT, the timing windows once here. Refresh-access pairs hand the
  // bank I/O to the demand row, so the stricter purpose applies.
  {
    HiraConfig hc;
    hc.t1 = cfg_.hira_t1;
    hc.t2 = cfg_.hira_t2;
    hc.purpose = HiraPurpose::RefreshAccess;
    hc.validate(tp_);
    const ElectricalWindows& w = chip.windows();
    if (hc.t1 < w.sense_enable_min || hc.t2 > w.wordline_disable_max ||
        hc.t2 < w.bankio_disconnect_min)
      throw std::invalid_argument(
          "hira_t1/hira_t2 violate the chip's electrical windows");
  }
  if (cfg_.mode == SchedulerMode::NoRefresh && cfg_.para_enabled)
    throw std::invalid_argument("the no-refresh anchor runs without PARA");
  if (cfg_.mode == SchedulerMode::BaselineRef)
    cfg_.preventive_policy = PreventivePolicy::Immediate;

  const std::size_t nranks = static_cast<std::size_t>(geom_.ranks_per_channel);
  const std::size_t nbanks = static_cast<std::size_t>(geom_.banks_per_channel());
  tables_.assign(nranks, RefreshTable(cfg_.refresh_table_capacity));
  refptr_.assign(nranks, RefPtrTable(geom_.banks_per_rank,
                                     geom_.subarrays_per_bank,
                                     geom_.rows_per_subarray));
  prfifo_.assign(nbanks, PrFifo(cfg_.pr_fifo_capacity));
  banks_.assign(nbanks, BankCtl{});
  ranks_.assign(nranks, RankCtl{});
  for (auto& r : ranks_) {
    r.next_ref_at = tp_.tREFI;
    r.act_times.assign(4, std::numeric_limits<picoseconds>::min() / 4);
  }
  periodic_k_.assign(nbanks, 0);
  scan_period_ = tp_.tRC / 2;
  next_scan_ = scan_period_;
}

// Worst-case forced latency between deciding to perform a refresh and its
// ACT: closing an open row (tRAS), precharge (tRP), detection jitter of the
// deadline scan, four-activation-window serialization with commands already
// in flight plus one sibling refresh-access burst, and command-bus occupancy
// of an in-flight engineered transaction. Refresh requests must be performed
// within deadline + this bound; with nonzero tRefSlack they are normally
// performed well before it.
picoseconds Controller::deadline_grace() const {
  // Bus term: at the instant the refresh becomes issuable, each bank can hold
  // at most one command with a strictly earlier slot; later candidates tie
  // and lose to the refresh's priority.
  return tp_.tRAS + tp_.tRP + scan_period_ + 3 * tp_.tFAW + cfg_.hira_t1 +
         cfg_.hira_t2 +
         (geom_.banks_per_channel() + 2) * cfg_.command_slot;
}

void Controller::add_request(int source, bool is_write, const DramAddress& addr,
                             picoseconds arrival) {
  if (!arrivals_.empty() && arrival < arrivals_.back().arrival)
    throw std::invalid_argument("requests must be added in arrival order");
  if (source < 0) throw std::invalid_argument("source must be >= 0");
  DemandRequest r;
  r.source = source;
  r.is_write = is_write;
  r.addr = addr;
  r.arrival = arrival;
  r.seq = next_req_seq_++;
  arrivals_.push_back(r);
  if (stats_.sources.size() <= static_cast<std::size_t>(source))
    stats_.sources.resize(static_cast<std::size_t>(source) + 1);
  ++stats_.sources[static_cast<std::size_t>(source)].injected;
}

bool Controller::demand_drained() const {
  if (!arrivals_.empty()) return false;
  for (const auto& b : banks_)
    if (!b.queue.empty() || b.pair.active) return false;
  return true;
}

void Controller::admit_arrivals() {
  while (!arrivals_.empty() && arrivals_.front().arrival <= now_) {
    const DemandRequest& r = arrivals_.front();
    auto& queue = banks_[gbank(r.addr.rank, r.addr.bank)].queue;
    if (queue.size() >= cfg_.queue_depth) break;  // front end back-pressures
    queue.push_back(r);
    arrivals_.pop_front();
  }
}

picoseconds periodic_generation_time(picoseconds t_refw,
                                     std::int64_t rows_per_bank,
                                     std::int64_t banks_per_rank, BankId bank,
                                     std::int64_t k) {
  const __int128 num = static_cast<__int128>(t_refw) *
                       (bank + static_cast<__int128>(k) * banks_per_rank);
  return static_cast<picoseconds>(
      num / (static_cast<__int128>(rows_per_bank) * banks_per_rank));
}

picoseconds Controller::next_periodic_time(std::size_t gb) const {
  return periodic_generation_time(tp_.tREFW, geom_.rows_per_bank(),
                                  geom_.banks_per_rank,
                                  static_cast<BankId>(gb % geom_.banks_per_rank),
                                  periodic_k_[gb]);
}

void Controller::generate_periodic_at(std::size_t gb) {
  const RankId rank = static_cast<RankId>(gb / geom_.banks_per_rank);
  const BankId bank = static_cast<BankId>(gb % geom_.banks_per_rank);
  tables_[static_cast<std::size_t>(rank)].insert(
      now_ + cfg_.refresh_slack(tp_), bank, RefreshKind::Periodic);
  ++periodic_k_[gb];
  ++stats_.periodic_generated;
}

void Controller::record_act(RankId rank, picoseconds t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  r.act_times[static_cast<std::size_t>(r.act_head)] = t;
  r.act_head = (r.act_head + 1) % 4;
}

picoseconds Controller::tfaw_earliest(RankId rank, picoseconds t,
                                      int acts) const {
  const auto& r = ranks_[static_cast<std::size_t>(rank)];
  picoseconds in_window[4];
  int n = 0;
  for (picoseconds a : r.act_times)
    if (a > t - tp_.tFAW) in_window[n++] = a;
  const int budget = 4 - acts;
  if (n <= budget) return t;
  std::sort(in_window, in_window + n);
  return in_window[n - budget - 1] + tp_.tFAW;
}

picoseconds Controller::busify(picoseconds t) const {
  return std::max(t, bus_free_);
}

void Controller::bus_consume(picoseconds t, int commands, picoseconds span) {
  bus_free_ = t + span + cfg_.command_slot;
  stats_.bus_busy += static_cast<picoseconds>(commands) * cfg_.command_slot;
  stats_.commands_issued += commands;
}

CommandResult Controller::must_issue(RankId rank, BankId bank,
                                     const Command& cmd, picoseconds t,
                                     bool hira) {
  CommandResult r = chip_->issue(rank, bank, cmd, t, hira);
  if (!r.accepted)
    throw std::logic_error("scheduler issued an illegal command: " + r.violation);
  return r;
}

void Controller::note_refresh_performed(picoseconds act_time,
                                        picoseconds deadline) {
  if (act_time > deadline + deadline_grace()) {
    ++stats_.deadline_violations;
    std::fprintf(stderr, "[dbg] late refresh: act=%lld deadline=%lld late_by=%lld\n",
                 (long long)act_time, (long long)deadline,
                 (long long)(act_time - deadline - deadline_grace()));
  }
}

void Controller::para_sample(RankId rank, BankId bank, RowId row,
                             picoseconds t) {
  if (!cfg_.para_enabled || cfg_.p_th <= 0.0) return;
  const double u = rng_.next_double();
  if (u >= cfg_.p_th) return;
  const bool low_side = u < cfg_.p_th / 2.0;
  const RowId victim = row + (low_side ? -1 : 1);
  if (victim < 0 || victim >= geom_.rows_per_bank()) return;
  if (geom_.subarray_of(victim) != geom_.subarray_of(row)) return;
  ++stats_.preventive_generated;

  if (cfg_.mode == SchedulerMode::Hira &&
      cfg_.preventive_policy == PreventivePolicy::Queued) {
    prfifo_[gbank(rank, bank)].push(victim);
    tables_[static_cast<std::size_t>(rank)].insert(
        t + cfg_.refresh_slack(tp_), bank, RefreshKind::Preventive, victim);
  } else {
    CommittedRefresh c;
    c.row1 = victim;
    c.kind1 = RefreshKind::Preventive;
    c.deadline1 = t;
    c.track_deadline = false;
    banks_[gbank(rank, bank)].committed.push_back(c);
  }
}

void Controller::update_fences() {
  const picoseconds fence_lead = tp_.tRC + tp_.tFAW + scan_period_;
  for (auto& b : banks_) b.fenced = false;
  for (RankId r = 0; r < geom_.ranks_per_channel; ++r) {
    for (const auto& e : tables_[static_cast<std::size_t>(r)].entries()) {
      if (e.deadline - now_ <= fence_lead)
        banks_[gbank(r, e.bank)].fenced = true;
    }
  }
}

void Controller::commit_refresh(RankId rank, const RefreshRequest& head) {
  auto& table = tables_[static_cast<std::size_t>(rank)];
  const BankId bank = head.bank;
  const std::size_t gb = gbank(rank, bank);
  auto& refptr = refptr_[static_cast<std::size_t>(rank)];

  CommittedRefresh c;
  c.kind1 = head.kind;
  c.deadline1 = head.deadline;
  if (head.kind == RefreshKind::Preventive) {
    c.row1 = prfifo_[gb].pop();
  } else {
    const auto pick = refptr.pick_balanced(bank);
    if (!pick) throw std::logic_error("refptr has no incomplete subarray");
    c.row1 = refptr.take(bank, *pick);
  }
  table.remove(head.seq);

  // Refresh-refresh pairing: first same-bank entry with a row in a subarray
  // isolated from row1's. Only the oldest preventive entry is reachable (its
  // victim is the PR-FIFO head).
  const SubarrayId sa1 = geom_.subarray_of(c.row1);
  bool preventive_tried = false;
  for (const auto& e : table.ordered(bank)) {
    if (e.kind == RefreshKind::Preventive) {
      if (preventive_tried) continue;
      preventive_tried = true;
      const RowId victim = prfifo_[gb].front();
      if (!spt_.isolated(geom_.subarray_of(victim), sa1)) continue;
      prfifo_[gb].pop();
      c.row2 = victim;
      c.kind2 = RefreshKind::Preventive;
      c.deadline2 = e.deadline;
      table.remove(e.seq);
      break;
    }
    // Periodic partner: least-refreshed subarray among those isolated from
    // row1's.
    std::optional<SubarrayId> best;
    std::int64_t best_count = 0;
    for (SubarrayId sa : spt_.partners(sa1)) {
      if (sa >= geom_.subarrays_per_bank) continue;
      const std::int64_t cnt = refptr.refreshed_count(bank, sa);
      if (cnt >= geom_.rows_per_subarray) continue;
      if (!best || cnt < best_count) {
        best = sa;
        best_count = cnt;
      }
    }
    if (best) {
      c.row2 = refptr.take(bank, *best);
      c.kind2 = RefreshKind::Periodic;
      c.deadline2 = e.deadline;
      table.remove(e.seq);
      break;
    }
  }

  banks_[gb].committed.push_back(c);
}

void Controller::case2_scan() {
  for (RankId rank = 0; rank < geom_.ranks_per_channel; ++rank) {
    auto& table = tables_[static_cast<std::size_t>(rank)];
    while (true) {
      // Scan-order first among the entries due for commitment. Refreshes
      // already committed to a bank serialize at about one row cycle each,
      // so the commit horizon widens with the bank's backlog.
      const RefreshRequest* due = nullptr;
      for (const auto& e : table.entries()) {
        const picoseconds horizon =
            tp_.tRC *
            static_cast<picoseconds>(
                1 + banks_[gbank(rank, e.bank)].committed.size());
        if (e.deadline - now_ > horizon) continue;
        if (!due || refresh_scan_before(e, *due)) due = &e;
      }
      if (!due) break;
      const RefreshRequest head = *due;  // commit mutates the table
      commit_refresh(rank, head);
    }
    stats_.refresh_table_peak =
        std::max(stats_.refresh_table_peak, table.peak_occupancy());
  }
  update_fences();
}

std::optional<RowId> Controller::find_case1_pair(RankId rank, BankId bank,
                                                 RowId demand_row) {
  auto& table = tables_[static_cast<std::size_t>(rank)];
  auto& refptr = refptr_[static_cast<std::size_t>(rank)];
  const std::size_t gb = gbank(rank, bank);
  const SubarrayId demand_sa = geom_.subarray_of(demand_row);
  const bool fifo_full = cfg_.para_enabled && prfifo_[gb].full();

  bool preventive_tried = false;
  for (const auto& e : table.ordered(bank)) {
    if (e.kind == RefreshKind::Preventive) {
      // Only the FIFO head is reachable; later preventive entries cannot be
      // reordered past it.
      if (preventive_tried) continue;
      preventive_tried = true;
      const RowId victim = prfifo_[gb].front();
      if (!spt_.isolated(geom_.subarray_of(victim), demand_sa)) continue;
      prfifo_[gb].pop();
      banks_[gb].pair.kind = RefreshKind::Preventive;
      banks_[gb].pair.deadline = e.deadline;
      table.remove(e.seq);
      return victim;
    }
    // Periodic: the pair's demand activation samples PARA, so it needs
    // PR-FIFO head-room; a full FIFO leaves only preventive pairing (which
    // frees a slot).
    if (fifo_full) continue;
    const auto pick = refptr.pick_isolated_balanced(
        bank, [&](SubarrayId sa) { return spt_.isolated(sa, demand_sa); });
    if (!pick) continue;
    const RowId row = refptr.take(bank, *pick);
    banks_[gb].pair.kind = RefreshKind::Periodic;
    banks_[gb].pair.deadline = e.deadline;
    table.remove(e.seq);
    return row;
  }
  return std::nullopt;
}

bool Controller::demand_act_allowed(RankId rank, BankId bank) const {
  const std::size_t gb = gbank(rank, bank);
  if (banks_[gb].fenced) return false;
  // A refresh whose bank is already precharged is waiting only for the
  // four-activation window (plus tRP); demand ACTs on sibling banks would
  // keep refilling that window ahead of it, so they yield until it fires.
  // Refreshes still closing their bank do not gate siblings.
  for (BankId b = 0; b < geom_.banks_per_rank; ++b) {
    const BankCtl& sibling = banks_[gbank(rank, b)];
    if (sibling.committed.empty() && !sibling.pair.active) continue;
    const BankPhase phase = chip_->bank(rank, b).phase;
    if (phase == BankPhase::Precharged) return false;
  }
  if (cfg_.para_enabled && cfg_.mode == SchedulerMode::Hira &&
      cfg_.preventive_policy == PreventivePolicy::Queued &&
      prfifo_[gb].full())
    return false;  // back-pressure: the ACT's own preventive must fit
  return true;
}

void Controller::run_hira_transaction(RankId rank, BankId bank, RowId first,
                                      RowId second, picoseconds t,
                                      bool refresh_refresh) {
  // Issued back-to-back as one bus transaction so t1 and t2 are exact.
  must_issue(rank, bank, Command::act(first), t);
  must_issue(rank, bank, Command::pre(), t + cfg_.hira_t1, true);
  const CommandResult second_act = must_issue(
      rank, bank, Command::act(second), t + cfg_.hira_t1 + cfg_.hira_t2, true);
  record_act(rank, t);
  record_act(rank, t + cfg_.hira_t1 + cfg_.hira_t2);
  bus_consume(t, 3, cfg_.hira_t1 + cfg_.hira_t2);
  if (!refresh_refresh && second_act.hira != HiraOutcome::SecondActIgnored) {
    // The demand activation of a refresh-access pair samples PARA.
    para_sample(rank, bank, second, t + cfg_.hira_t1 + cfg_.hira_t2);
  }
}

Controller::Action Controller::best_action() const {
  Action best;
  best.at = kFar;
  auto consider = [&](Action a) {
    if (a.at > best.at) return;
    if (a.at == best.at) {
      if (a.deadline > best.deadline) return;
      if (a.deadline == best.deadline) {
        if (a.priority > best.priority) return;
        if (a.priority == best.priority &&
            gbank(a.rank, std::max<BankId>(a.bank, 0)) >=
                gbank(best.rank, std::max<BankId>(best.bank, 0)))
          return;
      }
    }
    best = a;
  };

  for (RankId rank = 0; rank < geom_.ranks_per_channel; ++rank) {
    const auto& rc = ranks_[static_cast<std::size_t>(rank)];
    const picoseconds rank_free = rc.busy_until;  // tRFC block after REF

    if (cfg_.mode == SchedulerMode::BaselineRef) {
      // Precharge-all, then REF, at every tREFI boundary. Demand on the rank
      // pauses once the boundary passes.
      picoseconds ready = std::max(rc.next_ref_at, rank_free);
      bool open = false;
      for (BankId b = 0; b < geom_.banks_per_rank; ++b) {
        const BankState& bs = chip_->bank(rank, b);
        if (bs.phase == BankPhase::Active || bs.phase == BankPhase::DualActive) {
          open = true;
          const picoseconds hold_ok =
              bs.phase == BankPhase::DualActive ? bs.act_b_time + tp_.tRAS
                                                : bs.act_a_time + tp_.tRAS;
          consider({ActionKind::RefStep,
                    busify(std::max({rc.next_ref_at, hold_ok, rank_free, now_})),
                    rc.next_ref_at, 0, rank, b});
        } else {
          ready = std::max(ready, bs.pre_time + tp_.tRP);
        }
      }
      if (!open)
        consider({ActionKind::RefStep, busify(std::max(ready, now_)),
                  rc.next_ref_at, 0, rank, -1});
      if (now_ >= rc.next_ref_at) continue;  // demand waits out the REF flow
    }

    for (BankId b = 0; b < geom_.banks_per_rank; ++b) {
      const std::size_t gb = gbank(rank, b);
      const BankCtl& ctl = banks_[gb];
      const BankState& bs = chip_->bank(rank, b);

      // A pending refresh-access pair predates anything committed since (it
      // consumed the earliest same-bank deadline when the committed queue was
      // empty), so it runs first.
      if (ctl.pair.active) {
        picoseconds t = std::max({now_, ctl.pair.ready_at,
                                  bs.pre_time + tp_.tRP,
                                  bs.last_act_time + tp_.tRC, rank_free});
        t = std::max(t, tfaw_earliest(rank, t, 2));
        consider({ActionKind::PairedAct, busify(t), ctl.pair.deadline, 1, rank,
                  b});
        continue;
      }

      if (!ctl.committed.empty()) {
        const CommittedRefresh& head = ctl.committed.front();
        Action a{ActionKind::RefreshStep, kFar, head.deadline1, 2, rank, b};
        if (bs.phase == BankPhase::Active || bs.phase == BankPhase::DualActive) {
          const picoseconds hold_ok =
              bs.phase == BankPhase::DualActive ? bs.act_b_time + tp_.tRAS
                                                : bs.act_a_time + tp_.tRAS;
          a.at = busify(std::max({now_, hold_ok, rank_free}));
        } else if (head.row1 == kCloseOnly) {
          // Refresh ACT done and bank already precharged (closed by another
          // path); nothing left but dropping the record.
          a.at = now_;
        } else {
          picoseconds t = std::max({now_, bs.pre_time + tp_.tRP,
                                    bs.last_act_time + tp_.tRC, rank_free});
          const int acts = head.row2 >= 0 ? 2 : 1;
          t = std::max(t, tfaw_earliest(rank, t, acts));
          a.at = busify(t);
        }
        consider(a);
        continue;  // the committed refresh owns the bank
      }

      switch (bs.phase) {
        case BankPhase::DualActive: {
          bool has_hit = false;
          for (const auto& req : ctl.queue)
            if (geom_.bank_row(req.addr.subarray, req.addr.row_in_subarray) ==
                bs.row_b) {
              has_hit = true;
              break;
            }
          if (has_hit)
            consider({ActionKind::DemandColumn,
                      busify(std::max({now_, bs.act_b_time + tp_.tRCD,
                                       rank_free})),
                      kFar, 3, rank, b});
          else
            consider({ActionKind::DualClose,
                      busify(std::max({now_, bs.act_b_time + tp_.tRAS,
                                       rank_free})),
                      kFar, 6, rank, b});
          break;
        }
        case BankPhase::Active: {
          bool has_hit = false;
          for (const auto& req : ctl.queue)
            if (geom_.bank_row(req.addr.subarray, req.addr.row_in_subarray) ==
                bs.row_a) {
              has_hit = true;
              break;
            }
          if (has_hit)
            consider({ActionKind::DemandColumn,
                      busify(std::max({now_, bs.act_a_time + tp_.tRCD,
                                       rank_free})),
                      kFar, 3, rank, b});
          else if (!ctl.queue.empty())
            consider({ActionKind::DemandPre,
                      busify(std::max({now_, bs.act_a_time + tp_.tRAS,
                                       rank_free})),
                      kFar, 4, rank, b});
          break;
        }
        case BankPhase::Precharged: {
          if (!ctl.queue.empty() && demand_act_allowed(rank, b)) {
            picoseconds t = std::max({now_, bs.pre_time + tp_.tRP,
                                      bs.last_act_time + tp_.tRC, rank_free});
            t = std::max(t, tfaw_earliest(rank, t, 1));
            consider({ActionKind::DemandAct, busify(t), kFar, 5, rank, b});
          }
          break;
        }
        default:
          break;
      }
    }
  }
  return best;
}

void Controller::try_case1_after_pre(RankId rank, BankId bank, picoseconds t) {
  auto& ctl = banks_[gbank(rank, bank)];
  if (cfg_.mode != SchedulerMode::Hira || ctl.queue.empty()) return;
  if (!ctl.committed.empty()) return;  // a deadline refresh owns the bank
  const RowId demand_row = geom_.bank_row(ctl.queue.front().addr.subarray,
                                          ctl.queue.front().addr.row_in_subarray);
  const auto pairing = find_case1_pair(rank, bank, demand_row);
  if (pairing) {
    ctl.pair.active = true;
    ctl.pair.refresh_row = *pairing;
    ctl.pair.ready_at = t + tp_.tRP;
    update_fences();
  }
}

void Controller::execute(const Action& a) {
  const RankId rank = a.rank;
  const BankId bank = a.bank;
  const picoseconds t = a.at;
  const std::int64_t global_bank =
      bank >= 0 ? static_cast<std::int64_t>(gbank(rank, bank))
                : static_cast<std::int64_t>(rank) * geom_.banks_per_rank;

  switch (a.kind) {
    case ActionKind::RefStep: {
      if (bank >= 0) {
        const RowId closing = chip_->bank(rank, bank).row_a;
        must_issue(rank, bank, Command::pre(), t);
        bus_consume(t, 1, 0);
        if (log_) log_->emit(t, EventKind::Pre, global_bank, closing);
        return;
      }
      must_issue(rank, 0, Command::ref(), t);
      bus_consume(t, 1, 0);
      ++stats_.refs;
      auto& rc = ranks_[static_cast<std::size_t>(rank)];
      rc.busy_until = t + tp_.tRFC;
      rc.next_ref_at += tp_.tREFI;
      if (log_) log_->emit(t, EventKind::Ref, global_bank);
      return;
    }

    case ActionKind::RefreshStep: {
      auto& ctl = banks_[gbank(rank, bank)];
      CommittedRefresh& head = ctl.committed.front();
      const BankState& bs = chip_->bank(rank, bank);
      if (bs.phase == BankPhase::Active || bs.phase == BankPhase::DualActive) {
        const RowId closing =
            bs.phase == BankPhase::DualActive ? bs.row_b : bs.row_a;
        must_issue(rank, bank, Command::pre(), t);
        bus_consume(t, 1, 0);
        if (log_) log_->emit(t, EventKind::Pre, global_bank, closing);
        if (head.row1 == kCloseOnly) ctl.committed.pop_front();
        return;
      }
      if (head.row1 == kCloseOnly) {  // closed by another path (e.g. REF flow)
        ctl.committed.pop_front();
        return;
      }
      const CommittedRefresh work = head;
      if (work.row2 >= 0) {
        run_hira_transaction(rank, bank, work.row1, work.row2, t, true);
        if (work.track_deadline) {
          note_refresh_performed(t, work.deadline1);
          note_refresh_performed(t + cfg_.hira_t1 + cfg_.hira_t2, work.deadline2);
        }
        ++stats_.hira_rr;
        if (log_)
          log_->emit(t, EventKind::HiraRr, global_bank, work.row1, work.row2,
                     work.kind1);
      } else {
        must_issue(rank, bank, Command::act(work.row1), t);
        record_act(rank, t);
        bus_consume(t, 1, 0);
        if (work.track_deadline) note_refresh_performed(t, work.deadline1);
        ++stats_.standalone_refreshes;
        if (log_)
          log_->emit(t, EventKind::RefreshStandalone, global_bank, work.row1,
                     -1, work.kind1);
      }
      head.row1 = kCloseOnly;  // next step: the closing PRE after tRAS
      head.row2 = -1;
      return;
    }

    case ActionKind::PairedAct: {
      auto& ctl = banks_[gbank(rank, bank)];
      const RowId demand_row = geom_.bank_row(ctl.queue.front().addr.subarray,
                                              ctl.queue.front().addr.row_in_subarray);
      const RowId refresh_row = ctl.pair.refresh_row;
      const RefreshKind kind = ctl.pair.kind;
      const picoseconds deadline = ctl.pair.deadline;
      ctl.pair = PendingAccessPair{};
      run_hira_transaction(rank, bank, refresh_row, demand_row, t, false);
      note_refresh_performed(t, deadline);
      ++stats_.hira_ra;
      if (log_)
        log_->emit(t, EventKind::HiraRa, global_bank, refresh_row, demand_row,
                   kind);
      update_fences();
      return;
    }

    case ActionKind::DemandColumn: {
      const BankState& bs = chip_->bank(rank, bank);
      const RowId open_row =
          bs.phase == BankPhase::DualActive ? bs.row_b : bs.row_a;
      serve_column(rank, bank, t, open_row);
      return;
    }

    case ActionKind::DemandPre: {
      const RowId closing = chip_->bank(rank, bank).row_a;
      must_issue(rank, bank, Command::pre(), t);
      bus_consume(t, 1, 0);
      if (log_) log_->emit(t, EventKind::Pre, global_bank, closing);
      try_case1_after_pre(rank, bank, t);
      return;
    }

    case ActionKind::DemandAct: {
      auto& ctl = banks_[gbank(rank, bank)];
      const RowId row = geom_.bank_row(ctl.queue.front().addr.subarray,
                                       ctl.queue.front().addr.row_in_subarray);
      const BankState& bs = chip_->bank(rank, bank);
      const picoseconds unconstrained = std::max(
          {now_, bs.pre_time + tp_.tRP, bs.last_act_time + tp_.tRC});
      stats_.tfaw_stall += std::max<picoseconds>(
          0, tfaw_earliest(rank, unconstrained, 1) - unconstrained);
      must_issue(rank, bank, Command::act(row), t);
      record_act(rank, t);
      bus_consume(t, 1, 0);
      if (log_) log_->emit(t, EventKind::Act, global_bank, row);
      para_sample(rank, bank, row, t);
      return;
    }

    case ActionKind::DualClose: {
      const RowId closing = chip_->bank(rank, bank).row_b;
      must_issue(rank, bank, Command::pre(), t);
      bus_consume(t, 1, 0);
      if (log_) log_->emit(t, EventKind::Pre, global_bank, closing);
      try_case1_after_pre(rank, bank, t);
      return;
    }

    default:
      throw std::logic_error("unknown scheduler action");
  }
}

void Controller::serve_column(RankId rank, BankId bank, picoseconds t,
                              RowId open_row) {
  auto& ctl = banks_[gbank(rank, bank)];
  for (auto it = ctl.queue.begin(); it != ctl.queue.end(); ++it) {
    const RowId row = geom_.bank_row(it->addr.subarray, it->addr.row_in_subarray);
    if (row != open_row) continue;
    const Command cmd = it->is_write ? Command::write(it->addr.column)
                                     : Command::read(it->addr.column);
    must_issue(rank, bank, cmd, t);
    bus_consume(t, 1, 0);
    if (log_)
      log_->emit(t, it->is_write ? EventKind::Wr : EventKind::Rd,
                 static_cast<std::int64_t>(gbank(rank, bank)), open_row);
    auto& src = stats_.sources[static_cast<std::size_t>(it->source)];
    ++src.served;
    src.latency_sum += t - it->arrival;
    ++stats_.served;
    ctl.queue.erase(it);
    return;
  }
  throw std::logic_error("no row hit to serve");
}

void Controller::run_until(picoseconds t_end, bool stop_on_drain) {
  while (true) {
    admit_arrivals();
    if (stop_on_drain && demand_drained()) return;

    picoseconds t_book = kFar;
    if (!arrivals_.empty()) {
      const DemandRequest& head = arrivals_.front();
      if (banks_[gbank(head.addr.rank, head.addr.bank)].queue.size() <
          cfg_.queue_depth)
        t_book = std::min(t_book, head.arrival);
    }
    if (cfg_.mode == SchedulerMode::Hira) {
      t_book = std::min(t_book, next_scan_);
      for (std::size_t gb = 0; gb < banks_.size(); ++gb)
        t_book = std::min(t_book, next_periodic_time(gb));
    }

    const Action a = best_action();
    const picoseconds t_next = std::min(t_book, a.at);
    if (t_next > t_end) {
      now_ = t_end;
      return;
    }

    if (t_book <= a.at) {
      now_ = t_book;
      admit_arrivals();
      if (cfg_.mode == SchedulerMode::Hira) {
        for (std::size_t gb = 0; gb < banks_.size(); ++gb)
          while (next_periodic_time(gb) <= now_) generate_periodic_at(gb);
        if (next_scan_ <= now_) {
          case2_scan();
          while (next_scan_ <= now_) next_scan_ += scan_period_;
        }
      }
      continue;
    }

    now_ = a.at;
    execute(a);
  }
}

picoseconds Controller::run_to_drain(picoseconds hard_stop) {
  run_until(hard_stop, true);
  return now_;
}

}  // namespace hira
